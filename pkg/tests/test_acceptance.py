"""Acceptance gate: every exit criterion at its pinned tolerance.

Each test prints one PASS/FAIL line (visible with ``pytest -s`` and in the
CLI ``selftest``, which runs the same list).
"""

import json
import os
import subprocess
import sys
import time
from pathlib import Path

import pytest

from fanet_aka import acceptance
from fanet_aka.simnet import SimConfig

SRC = Path(__file__).resolve().parents[1] / "src"

CONFIG = SimConfig(seed=0)


@pytest.fixture(scope="module")
def results():
    """Run every criterion once; individual tests assert on the shared run."""
    out = {}
    for fn in acceptance.CRITERIA:
        start = time.perf_counter()
        result = fn(CONFIG)
        result.elapsed_s = time.perf_counter() - start
        out[result.number] = result
    return out


@pytest.mark.parametrize("number,name", [
    (1, "communication overhead parity (672/672/512, total 1856, 3 messages)"),
    (2, "computation overhead parity (user 1fe+11h, gwn 6h, uav 1puf+8h)"),
    (3, "timing estimate arithmetic (0.643/0.006/0.023/0.672 ms)"),
    (4, "protocol correctness over 1000 randomized seeds"),
    (5, "tamper exhaustion over all 1856 message bits"),
    (6, "replay rejected inside and outside the freshness window"),
    (7, "knowledge-closure suite at depth 4 with positive control"),
    (8, "fuzzy extractor tolerance, 500 cases plus targeted failure"),
    (9, "lifecycle integrations: update, replacement, dynamic addition"),
    (10, "DoS bound: 10000 garbage requests, at most 3 hashes each"),
    (11, "deterministic reports under a fixed seed"),
])
def test_criterion(results, number, name):
    result = results[number]
    print(result.line())
    assert result.passed, f"criterion {number} ({name}): {result.details}"
    bound = acceptance.RUNTIME_BOUNDS_S.get(number)
    if bound is not None:
        assert result.elapsed_s < bound, \
            f"criterion {number} took {result.elapsed_s:.1f}s, bound {bound}s"


def test_selftest_cli_is_byte_deterministic(tmp_path):
    """The CLI selftest twice at one seed yields byte-identical reports."""
    env = dict(os.environ)
    env["PYTHONPATH"] = str(SRC) + os.pathsep + env.get("PYTHONPATH", "")
    reports = []
    for run in ("one", "two"):
        out = tmp_path / f"report-{run}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "fanet_aka.cli", "--seed", "0", "selftest",
             "--report-file", str(out)],
            cwd=tmp_path, env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert "PASS criterion 11" in proc.stdout
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]
    assert json.loads(reports[0])["passed"] is True
