"""Wire protocol: frozen byte fixtures, round-trips, resync, corruption, fuzz."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegate import wire
from eegate.wire import (
    DataRow,
    DecoderState,
    Packet,
    attention_row,
    blink_row,
    decode_stream,
    encode_packet,
    flush_decoder,
    parse_payload_rows,
    raw_row,
    rows_to_samples,
)

from .oracles import checksum_oracle, frame_oracle


# --- encode -----------------------------------------------------------------

def test_encode_attention_row_frozen_bytes():
    assert encode_packet([attention_row(0x32)]) == bytes.fromhex("aaaa020432c9")


def test_encode_blink_row_frozen_bytes():
    assert encode_packet([blink_row(0x3C)]) == bytes.fromhex("aaaa02163cad")


def test_encode_raw_row_frozen_bytes():
    assert encode_packet([raw_row(256)]) == bytes.fromhex("aaaa04800201007c")


def test_encode_matches_frame_oracle():
    rows = [attention_row(50), wire.meditation_row(61), blink_row(7)]
    payload = bytes([0x04, 50, 0x05, 61, 0x16, 7])
    assert encode_packet(rows) == frame_oracle(payload)


def test_encode_rejects_out_of_range_values():
    with pytest.raises(wire.WireError):
        encode_packet([attention_row(101)])
    with pytest.raises(wire.WireError):
        encode_packet([wire.signal_quality_row(201)])
    with pytest.raises(wire.WireError):
        raw_row(40000)


def test_encode_rejects_oversized_payload():
    rows = [attention_row(1)] * 85  # 170 bytes
    with pytest.raises(wire.WireError):
        encode_packet(rows)


def test_encode_rejects_empty_packet():
    with pytest.raises(wire.WireError):
        encode_packet([])


# --- decode -----------------------------------------------------------------

def test_decode_single_frame():
    packets, diags, state = decode_stream(bytes.fromhex("aaaa020432c9"))
    assert packets == [Packet((DataRow(0x04, 0x32),))]
    assert diags == []
    assert state.buffer == b"" and state.pending_skip == 0


def test_decode_skips_leading_garbage_with_resync_diagnostic():
    packets, diags, _ = decode_stream(bytes.fromhex("ff") + bytes.fromhex("aaaa020432c9"))
    assert len(packets) == 1
    assert [d.kind for d in diags] == ["resync"]
    assert diags[0].skipped == 1


def test_decode_checksum_mismatch_discards_frame():
    packets, diags, _ = decode_stream(bytes.fromhex("aaaa02043200"))
    assert packets == []
    assert [d.kind for d in diags] == ["checksum_mismatch"]


def test_decode_partial_frame_retained_across_calls():
    frame = encode_packet([attention_row(50)])
    packets, diags, state = decode_stream(frame[:4])
    assert packets == [] and diags == []
    packets, diags, state = decode_stream(frame[4:], state)
    assert packets == [Packet((DataRow(0x04, 50),))]
    assert flush_decoder(state) == []


def test_decode_recovers_frame_overlapping_discarded_span():
    # a bogus sync+length claims bytes that belong to a real frame
    data = bytes.fromhex("aaaa05") + encode_packet([attention_row(50)])
    packets, diags, _ = decode_stream(data)
    assert packets == [Packet((DataRow(0x04, 50),))]
    assert "checksum_mismatch" in [d.kind for d in diags]


def test_decode_invalid_length_resyncs():
    # declared length 0xAA exceeds the 169 cap; the repeated-sync prefix slides off
    data = b"\xaa\xaa\xaa" + encode_packet([attention_row(9)])[2:]
    packets, _, _ = decode_stream(data)
    assert packets == [Packet((DataRow(0x04, 9),))]


def test_flush_reports_trailing_partial_frame_and_garbage():
    _, _, state = decode_stream(b"\x01\x02\xaa\xaa\x05\x04")
    diags = flush_decoder(state)
    kinds = [d.kind for d in diags]
    assert kinds == ["resync", "truncated_frame"]
    assert diags[0].skipped == 2


def test_decoder_state_is_never_mutated():
    state = DecoderState(b"\xaa", 3)
    decode_stream(b"\xaa\x02\x04\x32\xc9", state)
    assert state == DecoderState(b"\xaa", 3)


# --- rows -> samples --------------------------------------------------------

def test_rows_to_samples_attention():
    samples, diags = rows_to_samples(Packet((DataRow(0x04, 50),)), t_ms=1000)
    assert [(s.t_ms, s.track, s.value) for s in samples] == [(1000, "attention", 50)]
    assert diags == []


def test_rows_to_samples_raw_big_endian():
    samples, _ = rows_to_samples(Packet((DataRow(0x80, b"\x01\x00"),)), t_ms=5)
    assert samples[0].value == 256
    samples, _ = rows_to_samples(Packet((DataRow(0x80, b"\xff\xff"),)), t_ms=5)
    assert samples[0].value == -1


def test_rows_to_samples_skips_unknown_code():
    samples, diags = rows_to_samples(
        Packet((DataRow(0x7F, 9), DataRow(0x04, 40))), t_ms=0
    )
    assert [s.track for s in samples] == ["attention"]
    assert [d.kind for d in diags] == ["unknown_code"]


def test_rows_to_samples_drops_esense_zero_with_diagnostic():
    samples, diags = rows_to_samples(Packet((DataRow(0x04, 0),)), t_ms=0)
    assert samples == []
    assert [d.kind for d in diags] == ["esense_unreliable"]


def test_rows_to_samples_all_values_satisfy_track_ranges():
    samples, _ = rows_to_samples(
        Packet((DataRow(0x02, 200), DataRow(0x16, 0), DataRow(0x05, 100))), t_ms=1
    )
    for s in samples:
        s.validate()


def test_parse_payload_rows_truncated_row_diagnosed():
    rows, diags = parse_payload_rows(bytes([0x04, 7, 0x16]))
    assert rows == [DataRow(0x04, 7)]
    assert [d.kind for d in diags] == ["row_truncated"]


# --- properties -------------------------------------------------------------

def esense_rows():
    return st.one_of(
        st.integers(0, 100).map(lambda v: DataRow(wire.CODE_ATTENTION, v)),
        st.integers(0, 100).map(lambda v: DataRow(wire.CODE_MEDITATION, v)),
        st.integers(0, 100).map(lambda v: DataRow(wire.CODE_BLINK, v)),
        st.integers(0, 200).map(lambda v: DataRow(wire.CODE_SIGNAL_QUALITY, v)),
        st.integers(-32768, 32767).map(raw_row),
    )


def row_lists():
    return st.lists(esense_rows(), min_size=1, max_size=20)


@given(row_lists())
def test_roundtrip_property(rows):
    packets, diags, state = decode_stream(encode_packet(rows))
    assert packets == [Packet(tuple(rows))]
    assert diags == []
    assert flush_decoder(state) == []


def has_straddling_valid_frame(data: bytes, boundary: int) -> bool:
    """True when a checksum-valid frame candidate crosses ``boundary``.

    Independent enumeration over every offset; such prefixes are the one
    case where a greedy decoder legitimately consumes past the boundary.
    """
    for i in range(boundary):
        if data[i : i + 2] != b"\xaa\xaa" or i + 2 >= len(data):
            continue
        length = data[i + 2]
        end = i + 4 + length
        if not 1 <= length <= 169 or end > len(data) or end <= boundary:
            continue
        if checksum_oracle(data[i + 3 : i + 3 + length]) == data[end - 1]:
            return True
    return False


@given(st.binary(max_size=64), row_lists())
def test_resync_soundness_property(garbage, rows):
    from hypothesis import assume

    frame = encode_packet(rows)
    data = garbage + frame
    assume(not has_straddling_valid_frame(data, len(garbage)))
    packets, _, _ = decode_stream(data)
    assert Packet(tuple(rows)) in packets


@given(st.binary(max_size=512))
@settings(max_examples=300)
def test_totality_fuzz_property(data):
    packets, diags, state = decode_stream(data)
    flush_decoder(state)  # never raises either
    for p in packets:
        for row in p.rows:
            assert 0 <= row.code <= 0xFF


@given(row_lists(), st.data())
def test_single_bit_corruption_rejected_property(rows, data):
    frame = bytearray(encode_packet(rows))
    bit = data.draw(st.integers(0, len(frame) * 8 - 1))
    frame[bit // 8] ^= 1 << (bit % 8)
    packets, _, _ = decode_stream(bytes(frame))
    assert Packet(tuple(rows)) not in packets


@given(st.lists(row_lists(), min_size=1, max_size=6), st.binary(max_size=6), st.integers(0, 2**32 - 1))
def test_chunking_independence_property(row_groups, garbage, seed):
    stream = garbage + b"".join(encode_packet(rows) for rows in row_groups)

    whole_packets, whole_diags, whole_state = decode_stream(stream)

    rng = random.Random(seed)
    chunk_packets, chunk_diags = [], []
    state = None
    pos = 0
    while pos < len(stream):
        step = rng.randint(1, 4)
        packets, diags, state = decode_stream(stream[pos : pos + step], state)
        chunk_packets.extend(packets)
        chunk_diags.extend(diags)
        pos += step

    assert chunk_packets == whole_packets
    assert chunk_diags == whole_diags
    assert state == whole_state


def test_chunking_one_byte_at_a_time_matches_whole_buffer():
    rng = random.Random(1234)
    frames = []
    for _ in range(40):
        frames.append(b"\x00" * rng.randint(0, 3))
        frames.append(encode_packet([attention_row(rng.randint(1, 100))]))
    stream = b"".join(frames)

    whole = decode_stream(stream)
    state = None
    packets, diags = [], []
    for i in range(len(stream)):
        p, d, state = decode_stream(stream[i : i + 1], state)
        packets.extend(p)
        diags.extend(d)
    assert (packets, diags, state) == (whole[0], whole[1], whole[2])
