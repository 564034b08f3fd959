"""Sample sources for the gateway pump: replayed sessions, synthetic scenarios, device byte streams.

Every source is an async iterator of SessionRecords.  Replay and synth pace
themselves from record gaps divided by speed; the device source reads a raw
byte stream (serial port node, FIFO, or captured file -- OS-level port setup
is out of scope), runs the frame decoder, and stamps samples at receipt.
"""

from __future__ import annotations

import asyncio
from typing import AsyncIterator, Sequence

from .clock import MonotonicStamper
from .session import KIND_EVENT, SAMPLE_KINDS, SessionRecord, read_session_file, replay_schedule, synthesize
from .session import load_scenario
from .wire import TRACK_RAW, TRACKS, DecoderState, decode_stream, rows_to_samples

NATIVE_HZ = {track: 512.0 if track == TRACK_RAW else 1.0 for track in TRACKS}

_DEVICE_CHUNK = 4096


class RecordSource:
    """Replays a fixed record list on the event loop clock."""

    def __init__(
        self,
        records: Sequence[SessionRecord],
        speed: float = 1.0,
        sleep: bool = True,
        label: str = "records",
    ):
        self.records = [r for r in records if r.kind != KIND_EVENT]
        self.speed = speed
        self.sleep = sleep
        self.label = label
        self.tracks = sorted(
            {r.kind for r in self.records if r.kind in SAMPLE_KINDS}
        )

    async def stream(self) -> AsyncIterator[SessionRecord]:
        for delay_ms, record in replay_schedule(self.records, self.speed):
            if self.sleep and delay_ms > 0:
                await asyncio.sleep(delay_ms / 1000.0)
            else:
                await asyncio.sleep(0)  # stay cooperative when not pacing
            yield record


def replay_source(path: str, speed: float, sleep: bool = True) -> RecordSource:
    records, _diags = read_session_file(path)
    return RecordSource(records, speed=speed, sleep=sleep, label=f"replay:{path}")


def synth_source(path: str, speed: float, sleep: bool = True) -> RecordSource:
    records = synthesize(load_scenario(path))
    return RecordSource(records, speed=speed, sleep=sleep, label=f"synth:{path}")


class DeviceSource:
    """Decodes the framed wire protocol from a byte-stream path."""

    def __init__(self, path: str):
        self.path = path
        self.label = f"device:{self.path}"
        self.tracks = list(TRACKS)

    async def stream(self) -> AsyncIterator[SessionRecord]:
        loop = asyncio.get_running_loop()
        stamper = MonotonicStamper()
        state = DecoderState()
        with open(self.path, "rb", buffering=0) as port:
            while True:
                chunk = await loop.run_in_executor(None, port.read, _DEVICE_CHUNK)
                if not chunk:
                    break
                packets, _diags, state = decode_stream(chunk, state)
                for packet in packets:
                    samples, _ = rows_to_samples(packet, stamper.stamp())
                    for sample in samples:
                        yield SessionRecord.sample(sample.t_ms, sample.track, sample.value)


def build_source(kind: str, path: str, speed: float, sleep: bool = True):
    if kind == "replay":
        return replay_source(path, speed, sleep)
    if kind == "synth":
        return synth_source(path, speed, sleep)
    if kind == "device":
        return DeviceSource(path)
    raise ValueError(f"unknown source kind {kind!r}")
