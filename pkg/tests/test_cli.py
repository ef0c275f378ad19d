import json
import os
import subprocess
import sys
from pathlib import Path

SRC = Path(__file__).resolve().parents[1] / "src"


def run_cli(args, cwd, check=True):
    env = dict(os.environ)
    env["PYTHONPATH"] = str(SRC) + os.pathsep + env.get("PYTHONPATH", "")
    proc = subprocess.run([sys.executable, "-m", "fanet_aka.cli", *args],
                          cwd=cwd, env=env, capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"cli {args} failed ({proc.returncode}):\n"
                             f"{proc.stdout}\n{proc.stderr}")
    return proc


def bootstrap(tmp_path, seed=0):
    run_cli(["--seed", str(seed), "init-gwn"], tmp_path)
    run_cli(["--seed", str(seed), "register-user", "--user", "alice",
             "--password", "pw-alice"], tmp_path)
    run_cli(["--seed", str(seed), "register-uav", "--uav", "uav-1"], tmp_path)


def test_full_session_flow(tmp_path):
    bootstrap(tmp_path)
    proc = run_cli(["run-aka", "--user", "alice", "--uav", "uav-1"], tmp_path)
    session = json.loads(proc.stdout)
    assert session["bit_counts"]["total"] == 1856
    assert session["keys_agree"] is True
    assert session["op_counts"]["user"]["hash"] == 11
    assert len(session["session_key_fingerprint"]) == 40

    report = json.loads(run_cli(["report"], tmp_path).stdout)
    assert report["proposed"]["bits"] == 1856
    table = run_cli(["--format", "table", "report"], tmp_path).stdout
    assert "baseline-fe-hash" in table


def test_state_files_hold_no_cleartext_key(tmp_path):
    bootstrap(tmp_path)
    run_cli(["run-aka", "--user", "alice", "--uav", "uav-1"], tmp_path)
    session = json.loads((tmp_path / "state" / "last_session.json").read_text())
    assert "session_key" not in json.dumps(sorted(session)).replace(
        "session_key_fingerprint", "")
    # the secrets file is explicit about what it is
    secrets = json.loads((tmp_path / "state" / "secrets.json").read_text())
    assert "simulation-only" in secrets["_comment"]
    assert "gwn_secret" in secrets


def test_missing_state_exit_code(tmp_path):
    proc = run_cli(["run-aka", "--user", "alice", "--uav", "uav-1"],
                   tmp_path, check=False)
    assert proc.returncode == 3


def test_unknown_subcommand_exit_code(tmp_path):
    proc = run_cli(["frobnicate"], tmp_path, check=False)
    assert proc.returncode == 2


def test_malformed_config_exit_code(tmp_path):
    (tmp_path / "bad.cfg").write_text("closure_depth = not-a-number\n")
    proc = run_cli(["--config", "bad.cfg", "init-gwn"], tmp_path, check=False)
    assert proc.returncode == 4
    (tmp_path / "unknown.cfg").write_text("no_such_knob = 1\n")
    proc = run_cli(["--config", "unknown.cfg", "init-gwn"], tmp_path, check=False)
    assert proc.returncode == 4


def test_config_file_keys_are_applied(tmp_path):
    (tmp_path / "sim.cfg").write_text("seed = 7\ndelta_t = 5\n")
    run_cli(["--config", "sim.cfg", "init-gwn"], tmp_path)
    gwn = json.loads((tmp_path / "state" / "gwn.json").read_text())
    assert gwn["delta_t"] == 5


def test_lifecycle_subcommands(tmp_path):
    bootstrap(tmp_path)
    run_cli(["run-aka", "--user", "alice", "--uav", "uav-1"], tmp_path)
    run_cli(["update-credentials", "--user", "alice",
             "--new-password", "pw-alice-2"], tmp_path)
    proc = run_cli(["run-aka", "--user", "alice", "--uav", "uav-1"], tmp_path)
    assert json.loads(proc.stdout)["keys_agree"] is True
    # stale password now fails the local credential check
    proc = run_cli(["run-aka", "--user", "alice", "--uav", "uav-1",
                    "--password", "pw-alice"], tmp_path, check=False)
    assert proc.returncode == 1

    run_cli(["replace-card", "--user", "alice",
             "--new-password", "pw-alice-3"], tmp_path)
    proc = run_cli(["run-aka", "--user", "alice", "--uav", "uav-1"], tmp_path)
    assert json.loads(proc.stdout)["keys_agree"] is True

    run_cli(["add-uav", "--uav", "uav-2"], tmp_path)
    proc = run_cli(["run-aka", "--user", "alice", "--uav", "uav-2"], tmp_path)
    assert json.loads(proc.stdout)["keys_agree"] is True


def test_attack_subcommand_exit_codes(tmp_path):
    proc = run_cli(["attack", "replay"], tmp_path)
    report = json.loads(proc.stdout)
    assert report["passed"] is True
    assert proc.returncode == 0
    proc = run_cli(["attack", "not-a-scenario"], tmp_path, check=False)
    assert proc.returncode == 2  # argparse rejects unknown choices


def test_attack_table_format(tmp_path):
    proc = run_cli(["--format", "table", "attack", "mutual_auth"], tmp_path)
    assert "pass" in proc.stdout
    assert "session keys agree" in proc.stdout


def test_same_seed_same_state_files(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    for root in (a, b):
        bootstrap(root, seed=9)
        run_cli(["--seed", "9", "run-aka", "--user", "alice",
                 "--uav", "uav-1"], root)
    for name in ("gwn.json", "user_alice.json", "uav_uav-1.json",
                 "secrets.json", "last_session.json"):
        assert (a / "state" / name).read_bytes() == \
            (b / "state" / name).read_bytes(), name
