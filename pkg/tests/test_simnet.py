import json

import pytest

from fanet_aka.bits import BitString
from fanet_aka.errors import DisallowedAction, StaleTimestamp
from fanet_aka.simnet import (SimClock, SimConfig, build_world, enroll_user,
                              enroll_uav, run_aka)
from fanet_aka.wire import decode_msg1, protocol_bits


def _ready(seed=0, **kwargs):
    world = build_world(SimConfig(seed=seed, **kwargs))
    enroll_user(world, "alice", "pw-alice")
    enroll_uav(world, "uav-1")
    return world


def test_clock_is_monotone():
    clock = SimClock()
    assert clock.advance(3) == 3
    with pytest.raises(ValueError):
        clock.advance(-1)
    assert clock.now == 3


def test_channel_records_secure_and_public_separately():
    world = _ready()
    assert world.channel.log, "registration traffic should be recorded"
    assert all(tr.secure for tr in world.channel.log)
    assert world.channel.public_payloads() == []
    run_aka(world, "alice", "uav-1")
    assert len(world.channel.public_payloads()) == 3


def test_adversary_cannot_touch_secure_channel():
    world = _ready()
    secure_tr = world.channel.log[0]
    adversary = world.adversary()
    with pytest.raises(DisallowedAction):
        adversary.tamper_bit(secure_tr, 0)
    with pytest.raises(DisallowedAction):
        adversary.replay(secure_tr)
    assert adversary.observe() == []
    insider = world.adversary(insider=True)
    assert len(insider.observe()) == len(world.channel.log)


def test_adversary_actions_are_logged():
    world = _ready()
    result = run_aka(world, "alice", "uav-1")
    adversary = world.adversary()
    tr = result.transcript[0]
    adversary.tamper_bit(tr, 5)
    adversary.delay(tr, 1)
    assert "tampered bit 5" in tr.events
    assert "delayed 1 ticks" in tr.events


def test_dropped_message_stalls_without_keys():
    world = _ready(seed=2)
    result = run_aka(world, "alice", "uav-1",
                     intercept=lambda kind, p: None if kind == "MSG2" else p)
    assert not result.ok
    assert result.stage == "MSG2"
    assert result.user_sk is None and result.uav_sk is None


def test_delayed_msg1_goes_stale():
    world = _ready(seed=3)

    def hold(kind, payload):
        if kind == "MSG1":
            world.clock.advance(world.config.delta_t)
        return payload

    result = run_aka(world, "alice", "uav-1", intercept=hold)
    assert not result.ok
    assert result.error == "StaleTimestamp"


def test_honest_run_produces_expected_accounting():
    world = _ready(seed=4)
    result = run_aka(world, "alice", "uav-1")
    assert result.ok and result.keys_agree
    assert protocol_bits(result.transcript)["total"] == 1856
    assert result.op_counts["user"]["hash"] == 11
    assert result.op_counts["gwn"]["hash"] == 6
    assert result.op_counts["uav"]["hash"] == 8
    assert [tr.kind for tr in result.transcript] == ["MSG1", "MSG2", "MSG3"]


def test_session_keys_never_equal_any_payload_fragment():
    world = _ready(seed=5)
    result = run_aka(world, "alice", "uav-1")
    for tr in result.transcript:
        assert not tr.payload.contains(result.user_sk)


def test_same_seed_same_transcript_bytes():
    def transcript_json(seed):
        world = _ready(seed=seed)
        result = run_aka(world, "alice", "uav-1")
        return json.dumps([tr.to_json() for tr in result.transcript],
                          sort_keys=True)

    assert transcript_json(11) == transcript_json(11)
    assert transcript_json(11) != transcript_json(12)


def test_worlds_are_isolated():
    first = _ready(seed=6)
    second = _ready(seed=6)
    run_aka(first, "alice", "uav-1")
    assert second.channel.public_payloads() == []
    assert second.clock.now != first.clock.now


def test_transmission_json_shape():
    world = _ready(seed=7)
    result = run_aka(world, "alice", "uav-1")
    doc = result.transcript[0].to_json()
    assert set(doc) == {"tick", "origin", "dest", "kind", "secure", "hex",
                        "events"}
    assert doc["kind"] == "MSG1"
    assert decode_msg1(BitString.from_hex(doc["hex"])).ts1.value == doc["tick"]
