"""Framed binary serial protocol of the headset: encoder, streaming decoder, sample mapping.

Frame layout (documented in docs/wire-format.md):

    0xAA 0xAA | length P (1..169) | P payload bytes | checksum

The checksum is the bitwise complement of the low 8 bits of the byte-sum of
the payload.  The payload is a sequence of data rows: a row code below 0x80
carries exactly one value byte; a code at or above 0x80 carries a length byte
L (0..169) followed by L value bytes (big-endian for numeric values).

Recognized row codes:

    0x02  signal quality   0..200 (0 = good contact, 200 = off-head)
    0x04  attention        0..100 (eSense; 0 means "unable to compute")
    0x05  meditation       0..100 (eSense; 0 means "unable to compute")
    0x16  blink strength   0..100
    0x80  raw EEG          L = 2, signed 16-bit big-endian

The decoder is total: arbitrary bytes never raise, malformed input surfaces
as diagnostics.  Garbage before a sync pair is skipped and reported once a
valid frame is re-established (or at flush); a checksum mismatch discards
only the offending frame, and scanning resumes one byte past its first sync
byte so that any valid frame overlapping the discarded span is still found.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

SYNC = 0xAA
MAX_PAYLOAD = 169
_SYNC_PAIR = bytes([SYNC, SYNC])

CODE_SIGNAL_QUALITY = 0x02
CODE_ATTENTION = 0x04
CODE_MEDITATION = 0x05
CODE_BLINK = 0x16
CODE_RAW = 0x80

TRACK_ATTENTION = "attention"
TRACK_MEDITATION = "meditation"
TRACK_BLINK = "blink"
TRACK_RAW = "raw"
TRACK_SIGNAL_QUALITY = "signal_quality"

TRACKS = (
    TRACK_ATTENTION,
    TRACK_MEDITATION,
    TRACK_BLINK,
    TRACK_RAW,
    TRACK_SIGNAL_QUALITY,
)

# value range on the wire, per single-byte code
_CODE_RANGES = {
    CODE_SIGNAL_QUALITY: (0, 200),
    CODE_ATTENTION: (0, 100),
    CODE_MEDITATION: (0, 100),
    CODE_BLINK: (0, 100),
}

_CODE_TRACKS = {
    CODE_SIGNAL_QUALITY: TRACK_SIGNAL_QUALITY,
    CODE_ATTENTION: TRACK_ATTENTION,
    CODE_MEDITATION: TRACK_MEDITATION,
    CODE_BLINK: TRACK_BLINK,
    CODE_RAW: TRACK_RAW,
}

# semantic range per track; eSense tracks are 1..100, 0 on the wire is the
# vendor's "unable to compute" marker and never becomes a Sample
TRACK_RANGES = {
    TRACK_ATTENTION: (1, 100),
    TRACK_MEDITATION: (1, 100),
    TRACK_BLINK: (0, 100),
    TRACK_RAW: (-32768, 32767),
    TRACK_SIGNAL_QUALITY: (0, 200),
}


class WireError(ValueError):
    """Invalid input to the encoder (never raised by the decoder)."""


@dataclass(frozen=True)
class DataRow:
    """One row of a frame payload.

    ``value`` is an int (one byte) for codes below 0x80 and raw bytes for
    length-prefixed codes at or above 0x80.
    """

    code: int
    value: int | bytes

    def encoded_length(self) -> int:
        if self.code < 0x80:
            return 2
        assert isinstance(self.value, bytes)
        return 2 + len(self.value)


@dataclass(frozen=True)
class Packet:
    rows: tuple[DataRow, ...]


@dataclass(frozen=True)
class Sample:
    """A timestamped reading on one track."""

    t_ms: int
    track: str
    value: int

    def validate(self) -> None:
        if self.track not in TRACK_RANGES:
            raise ValueError(f"unknown track {self.track!r}")
        lo, hi = TRACK_RANGES[self.track]
        if not lo <= self.value <= hi:
            raise ValueError(
                f"{self.track} value {self.value} outside [{lo}, {hi}]"
            )


@dataclass(frozen=True)
class Diagnostic:
    """Non-fatal decoder report: resync, checksum mismatch, bad row, ..."""

    kind: str
    message: str
    skipped: int = 0


@dataclass(frozen=True)
class DecoderState:
    """Carries unconsumed trailing bytes and not-yet-reported skip count.

    A value owned by one caller at a time; decode_stream returns a new state
    and never mutates its argument.
    """

    buffer: bytes = b""
    pending_skip: int = 0


def checksum(payload: bytes) -> int:
    return ~(sum(payload) & 0xFF) & 0xFF


def encode_row(row: DataRow) -> bytes:
    if not 0 <= row.code <= 0xFF:
        raise WireError(f"row code {row.code} out of byte range")
    if row.code < 0x80:
        if not isinstance(row.value, int):
            raise WireError(f"code {row.code:#04x} requires a single-byte int value")
        if not 0 <= row.value <= 0xFF:
            raise WireError(f"value {row.value} out of byte range")
        lo, hi = _CODE_RANGES.get(row.code, (0, 0xFF))
        if not lo <= row.value <= hi:
            raise WireError(
                f"value {row.value} out of range [{lo}, {hi}] for code {row.code:#04x}"
            )
        return bytes([row.code, row.value])
    if not isinstance(row.value, bytes):
        raise WireError(f"code {row.code:#04x} requires a bytes value")
    if len(row.value) > MAX_PAYLOAD:
        raise WireError(f"row value length {len(row.value)} exceeds {MAX_PAYLOAD}")
    if row.code == CODE_RAW and len(row.value) != 2:
        raise WireError("raw EEG rows carry exactly 2 value bytes")
    return bytes([row.code, len(row.value)]) + row.value


def encode_packet(rows: Sequence[DataRow]) -> bytes:
    """Serialize rows into one frame: sync, length, payload, checksum."""
    if not rows:
        raise WireError("a packet needs at least one row")
    payload = b"".join(encode_row(r) for r in rows)
    if len(payload) > MAX_PAYLOAD:
        raise WireError(f"payload length {len(payload)} exceeds {MAX_PAYLOAD}")
    return _SYNC_PAIR + bytes([len(payload)]) + payload + bytes([checksum(payload)])


def raw_row(value: int) -> DataRow:
    """Convenience constructor for a signed 16-bit raw EEG row."""
    if not -32768 <= value <= 32767:
        raise WireError(f"raw value {value} outside signed 16-bit range")
    return DataRow(CODE_RAW, value.to_bytes(2, "big", signed=True))


def parse_payload_rows(payload: bytes) -> tuple[list[DataRow], list[Diagnostic]]:
    """Split a checksum-valid payload into rows; truncation is diagnosed, not fatal."""
    rows: list[DataRow] = []
    diags: list[Diagnostic] = []
    i = 0
    n = len(payload)
    while i < n:
        code = payload[i]
        if code < 0x80:
            if i + 1 >= n:
                diags.append(
                    Diagnostic("row_truncated", f"code {code:#04x} missing value byte")
                )
                break
            rows.append(DataRow(code, payload[i + 1]))
            i += 2
        else:
            if i + 1 >= n:
                diags.append(
                    Diagnostic("row_truncated", f"code {code:#04x} missing length byte")
                )
                break
            length = payload[i + 1]
            if i + 2 + length > n:
                diags.append(
                    Diagnostic(
                        "row_truncated",
                        f"code {code:#04x} declares {length} bytes, "
                        f"{n - i - 2} available",
                    )
                )
                break
            rows.append(DataRow(code, bytes(payload[i + 2 : i + 2 + length])))
            i += 2 + length
    return rows, diags


def decode_stream(
    data: bytes, state: DecoderState | None = None
) -> tuple[list[Packet], list[Diagnostic], DecoderState]:
    """Decode every well-formed frame in ``state.buffer + data``.

    Never raises on any input.  Returns the decoded packets, diagnostics for
    malformed spans, and the decoder state holding a partial trailing frame
    (or a lone trailing sync byte) for the next call.  Packets are identical
    however the byte stream is chunked across calls.
    """
    if state is None:
        state = DecoderState()
    buf = state.buffer + data
    pending_skip = state.pending_skip
    packets: list[Packet] = []
    diags: list[Diagnostic] = []
    pos = 0
    n = len(buf)

    while True:
        sync = buf.find(_SYNC_PAIR, pos)
        if sync < 0:
            # no sync pair; everything up to a possible trailing 0xAA is garbage
            keep = n - 1 if n > pos and buf[n - 1] == SYNC else n
            pending_skip += keep - pos
            tail = buf[keep:]
            return packets, diags, DecoderState(tail, pending_skip)
        pending_skip += sync - pos
        pos = sync
        if pos + 2 >= n:
            # sync seen, length byte not yet available
            return packets, diags, DecoderState(buf[pos:], pending_skip)
        length = buf[pos + 2]
        if not 1 <= length <= MAX_PAYLOAD:
            # bad declared length: resync one byte past the first sync byte
            pending_skip += 1
            pos += 1
            continue
        end = pos + 3 + length + 1
        if end > n:
            # complete header, partial frame: retain for the next call
            return packets, diags, DecoderState(buf[pos:], pending_skip)
        payload = buf[pos + 3 : pos + 3 + length]
        if checksum(payload) != buf[end - 1]:
            diags.append(
                Diagnostic(
                    "checksum_mismatch",
                    f"frame at skew {pos}: expected {checksum(payload):#04x}, "
                    f"got {buf[end - 1]:#04x}",
                )
            )
            # discard this frame only; rescan inside it for overlapping frames
            pending_skip += 1
            pos += 1
            continue
        if pending_skip:
            diags.append(
                Diagnostic(
                    "resync",
                    f"skipped {pending_skip} byte(s) before sync",
                    skipped=pending_skip,
                )
            )
            pending_skip = 0
        rows, row_diags = parse_payload_rows(payload)
        diags.extend(row_diags)
        packets.append(Packet(tuple(rows)))
        pos = end


def flush_decoder(state: DecoderState) -> list[Diagnostic]:
    """Report what a finished stream leaves behind: skipped bytes, partial frame."""
    diags: list[Diagnostic] = []
    if state.pending_skip:
        diags.append(
            Diagnostic(
                "resync",
                f"skipped {state.pending_skip} byte(s) at end of stream",
                skipped=state.pending_skip,
            )
        )
    if state.buffer:
        diags.append(
            Diagnostic(
                "truncated_frame",
                f"{len(state.buffer)} byte(s) of incomplete frame at end of stream",
            )
        )
    return diags


def rows_to_samples(
    packet: Packet, t_ms: int
) -> tuple[list[Sample], list[Diagnostic]]:
    """Map recognized rows onto track samples stamped at packet receipt.

    Unrecognized codes are skipped with a diagnostic.  eSense zero values
    (vendor: measurement unreliable) and out-of-range values are dropped
    likewise, so every returned Sample satisfies its track range.
    """
    samples: list[Sample] = []
    diags: list[Diagnostic] = []
    for row in packet.rows:
        track = _CODE_TRACKS.get(row.code)
        if track is None:
            diags.append(
                Diagnostic("unknown_code", f"row code {row.code:#04x} skipped")
            )
            continue
        if row.code == CODE_RAW:
            assert isinstance(row.value, bytes)
            if len(row.value) != 2:
                diags.append(
                    Diagnostic(
                        "bad_raw_length",
                        f"raw row carries {len(row.value)} bytes, expected 2",
                    )
                )
                continue
            value = int.from_bytes(row.value, "big", signed=True)
        else:
            assert isinstance(row.value, int)
            value = row.value
        lo, hi = TRACK_RANGES[track]
        if not lo <= value <= hi:
            kind = (
                "esense_unreliable"
                if value == 0 and track in (TRACK_ATTENTION, TRACK_MEDITATION)
                else "value_out_of_range"
            )
            diags.append(
                Diagnostic(kind, f"{track} value {value} outside [{lo}, {hi}]")
            )
            continue
        samples.append(Sample(t_ms=t_ms, track=track, value=value))
    return samples, diags


def attention_row(value: int) -> DataRow:
    return DataRow(CODE_ATTENTION, value)


def meditation_row(value: int) -> DataRow:
    return DataRow(CODE_MEDITATION, value)


def blink_row(value: int) -> DataRow:
    return DataRow(CODE_BLINK, value)


def signal_quality_row(value: int) -> DataRow:
    return DataRow(CODE_SIGNAL_QUALITY, value)
