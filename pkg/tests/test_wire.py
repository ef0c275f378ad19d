import random

import pytest
from hypothesis import given, strategies as st

from fanet_aka.bits import BitString
from fanet_aka.errors import IncompleteTranscript, WidthMismatch
from fanet_aka import wire
from fanet_aka.wire import (Msg1, Msg2, Msg3, UserRegRequest, UavRegResponse,
                            decode, decode_msg1, decode_msg2, decode_msg3,
                            encode, protocol_bits, ts_bits)


def field(width=160):
    return st.integers(min_value=0, max_value=(1 << width) - 1).map(
        lambda v: BitString(width, v))


def test_message_widths_match_the_contract():
    assert sum(Msg1.WIDTHS) == 672
    assert sum(Msg2.WIDTHS) == 672
    assert sum(Msg3.WIDTHS) == 512
    assert sum(UserRegRequest.WIDTHS) == 320
    assert sum(UavRegResponse.WIDTHS) == 320


def test_encode_msg1_layout_offsets():
    msg = Msg1(mac1=BitString(160, 1), rid_j=BitString(160, 2),
               g_i=BitString(160, 3), f_i_prime=BitString(160, 4),
               ts1=ts_bits(5))
    raw = encode(msg)
    assert raw.width == 672
    assert raw.slice(0, 160).value == 1
    assert raw.slice(160, 320).value == 2
    assert raw.slice(320, 480).value == 3
    assert raw.slice(480, 640).value == 4
    assert raw.slice(640, 672).value == 5


def test_msg3_timestamp_sits_third():
    msg = Msg3(v5=BitString(160, 9), v4=BitString(160, 8),
               ts3=ts_bits(7), v2=BitString(160, 6))
    raw = encode(msg)
    assert raw.width == 512
    assert raw.slice(320, 352).value == 7
    assert raw.slice(352, 512).value == 6


def test_encode_rejects_bad_field_width():
    msg = Msg1(mac1=BitString(128, 1), rid_j=BitString(160, 2),
               g_i=BitString(160, 3), f_i_prime=BitString(160, 4),
               ts1=ts_bits(5))
    with pytest.raises(WidthMismatch):
        encode(msg)


def test_decode_rejects_wrong_total_width():
    with pytest.raises(WidthMismatch):
        decode_msg1(BitString(671, 0))
    with pytest.raises(WidthMismatch):
        decode_msg3(BitString(672, 0))


@given(field(), field(), field(), field(), field(32))
def test_msg1_round_trip(a, b, c, d, ts):
    msg = Msg1(a, b, c, d, ts)
    assert decode_msg1(encode(msg)) == msg


@given(field(), field(), field(), field(), field(32))
def test_msg2_round_trip(a, b, c, d, ts):
    msg = Msg2(a, b, c, d, ts)
    assert decode_msg2(encode(msg)) == msg


@given(field(), field(), field(32), field())
def test_msg3_round_trip(a, b, ts, c):
    msg = Msg3(a, b, ts, c)
    assert decode_msg3(encode(msg)) == msg


@pytest.mark.parametrize("cls", wire.MESSAGE_TYPES)
def test_every_type_round_trips(cls):
    rng = random.Random(17)
    values = [BitString.random(w, rng) for w in cls.WIDTHS]
    msg = cls(*values)
    assert decode(cls, encode(msg)) == msg
    assert encode(decode(cls, encode(msg))) == encode(msg)


def test_fuzzed_decode_is_total():
    rng = random.Random(23)
    for _ in range(500):
        msg = decode_msg1(BitString.random(672, rng))
        assert msg.ts1.width == 32
        msg = decode_msg3(BitString.random(512, rng))
        assert msg.v2.width == 160


def test_ts_bits_wraps_to_32_bits():
    assert ts_bits(5).value == 5
    assert ts_bits(2 ** 32 + 5).value == 5


class _FakeEntry:
    def __init__(self, kind, width):
        self.kind = kind
        self.payload = BitString.zeros(width)


def test_protocol_bits_requires_complete_run():
    with pytest.raises(IncompleteTranscript):
        protocol_bits([_FakeEntry("MSG1", 672)])


def test_protocol_bits_measures_serialized_widths():
    transcript = [_FakeEntry("MSG1", 672), _FakeEntry("MSG2", 672),
                  _FakeEntry("MSG3", 512)]
    assert protocol_bits(transcript) == {
        "MSG1": 672, "MSG2": 672, "MSG3": 512,
        "total": 1856, "message_count": 3,
    }


def test_hex_representation_is_lowercase_unseparated():
    raw = encode(Msg3(BitString(160, 0xAB), BitString(160, 0xCD),
                      ts_bits(1), BitString(160, 0xEF)))
    text = raw.hex()
    assert text == text.lower()
    assert len(text) == 512 // 4
