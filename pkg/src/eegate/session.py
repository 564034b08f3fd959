"""Persist, replay, and synthesize sample/scroll streams (JSON Lines sessions).

A session file is line-delimited JSON, one record per line, sorted by ``t``.
The format is documented field-by-field in docs/session-format.md:

    {"t": 1000, "kind": "attention", "v": 42}
    {"t": 1250, "kind": "scroll", "page": "wiki-home", "offset": 0,
     "viewport": 800, "content": 1600}
    {"t": 1300, "kind": "event", "event": "doubleBlink", "detail": {...}}

Sample kinds mirror the wire tracks; ``scroll`` carries the page telemetry
triple; ``event`` records are an audit trail of engine output and are
ignored by replay-as-source and by analytics.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Sequence

from .clock import MonotonicClock
from .wire import TRACKS, Diagnostic, Sample

KIND_SCROLL = "scroll"
KIND_EVENT = "event"
SAMPLE_KINDS = TRACKS
RECORD_KINDS = SAMPLE_KINDS + (KIND_SCROLL, KIND_EVENT)


@dataclass(frozen=True)
class SessionRecord:
    """One line of a session file; ``kind`` determines which fields are set."""

    t_ms: int
    kind: str
    value: int | None = None
    page_id: str | None = None
    scroll_offset_px: int | None = None
    viewport_h_px: int | None = None
    content_h_px: int | None = None
    event: str | None = None
    detail: dict | None = None

    @staticmethod
    def sample(t_ms: int, kind: str, value: int) -> "SessionRecord":
        if kind not in SAMPLE_KINDS:
            raise ValueError(f"not a sample kind: {kind!r}")
        return SessionRecord(t_ms=t_ms, kind=kind, value=value)

    @staticmethod
    def scroll(
        t_ms: int,
        page_id: str,
        scroll_offset_px: int,
        viewport_h_px: int,
        content_h_px: int,
    ) -> "SessionRecord":
        return SessionRecord(
            t_ms=t_ms,
            kind=KIND_SCROLL,
            page_id=page_id,
            scroll_offset_px=scroll_offset_px,
            viewport_h_px=viewport_h_px,
            content_h_px=content_h_px,
        )

    @staticmethod
    def engine_event(t_ms: int, event: str, detail: dict | None = None) -> "SessionRecord":
        return SessionRecord(t_ms=t_ms, kind=KIND_EVENT, event=event, detail=detail)

    def to_sample(self) -> Sample:
        if self.kind not in SAMPLE_KINDS or self.value is None:
            raise ValueError(f"record kind {self.kind!r} is not a sample")
        return Sample(t_ms=self.t_ms, track=self.kind, value=self.value)


def record_to_json(record: SessionRecord) -> str:
    """Canonical one-line serialization (stable key order, compact separators)."""
    obj: dict = {"t": record.t_ms, "kind": record.kind}
    if record.kind == KIND_SCROLL:
        obj["page"] = record.page_id
        obj["offset"] = record.scroll_offset_px
        obj["viewport"] = record.viewport_h_px
        obj["content"] = record.content_h_px
    elif record.kind == KIND_EVENT:
        obj["event"] = record.event
        if record.detail is not None:
            obj["detail"] = record.detail
    else:
        obj["v"] = record.value
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True)


def record_from_json(line: str) -> SessionRecord:
    obj = json.loads(line)
    t_ms = obj["t"]
    kind = obj["kind"]
    if not isinstance(t_ms, int):
        raise ValueError("t must be an integer millisecond stamp")
    if kind == KIND_SCROLL:
        return SessionRecord.scroll(
            t_ms, obj["page"], obj["offset"], obj["viewport"], obj["content"]
        )
    if kind == KIND_EVENT:
        return SessionRecord.engine_event(t_ms, obj["event"], obj.get("detail"))
    if kind not in SAMPLE_KINDS:
        raise ValueError(f"unknown record kind {kind!r}")
    value = obj["v"]
    if not isinstance(value, int):
        raise ValueError("v must be an integer")
    return SessionRecord.sample(t_ms, kind, value)


def write_session(records: Iterable[SessionRecord], sink: IO[str]) -> int:
    """Write one line per record; returns the record count."""
    count = 0
    for record in records:
        sink.write(record_to_json(record))
        sink.write("\n")
        count += 1
    return count


def read_session(
    source: IO[str],
) -> tuple[list[SessionRecord], list[Diagnostic]]:
    """Read records in file order; malformed lines become diagnostics."""
    records: list[SessionRecord] = []
    diags: list[Diagnostic] = []
    for lineno, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(record_from_json(line))
        except (ValueError, KeyError, TypeError) as exc:
            diags.append(
                Diagnostic("malformed_record", f"line {lineno}: {exc}")
            )
    return records, diags


def read_session_file(path: str) -> tuple[list[SessionRecord], list[Diagnostic]]:
    with open(path, "r", encoding="utf-8") as fh:
        return read_session(fh)


def write_session_file(path: str, records: Iterable[SessionRecord]) -> int:
    with open(path, "w", encoding="utf-8") as fh:
        return write_session(records, fh)


def replay_schedule(
    records: Sequence[SessionRecord], speed: float
) -> list[tuple[float, SessionRecord]]:
    """(delay_ms, record) pairs: each delay is the gap to the previous record over speed."""
    if speed <= 0:
        raise ValueError("replay speed must be positive")
    schedule: list[tuple[float, SessionRecord]] = []
    prev_t: int | None = None
    for record in records:
        if prev_t is not None and record.t_ms < prev_t:
            raise ValueError("records must be time-ordered for replay")
        delay = 0.0 if prev_t is None else (record.t_ms - prev_t) / speed
        schedule.append((delay, record))
        prev_t = record.t_ms
    return schedule


def replay(
    records: Sequence[SessionRecord],
    speed: float = 1.0,
    clock=None,
    restamp: bool = False,
) -> Iterator[SessionRecord]:
    """Emit each record after (gap to previous)/speed on the given clock.

    With ``restamp`` the emitted records carry the emission time instead of
    their recorded time (live-source emulation); order is always preserved.
    """
    clock = clock or MonotonicClock()
    for delay, record in replay_schedule(records, speed):
        clock.sleep_ms(delay)
        if restamp:
            record = SessionRecord(
                t_ms=clock.now_ms(),
                kind=record.kind,
                value=record.value,
                page_id=record.page_id,
                scroll_offset_px=record.scroll_offset_px,
                viewport_h_px=record.viewport_h_px,
                content_h_px=record.content_h_px,
                event=record.event,
                detail=record.detail,
            )
        yield record


@dataclass(frozen=True)
class Segment:
    duration_ms: int
    mean: float
    stddev: float


@dataclass(frozen=True)
class SynthScenario:
    """Deterministic stand-in for a live user.

    Attention samples are drawn per segment from a Gaussian (Mersenne
    Twister via ``random.Random(seed)``, then ``gauss``), rounded half-even
    and clamped to 1..100; blinks fire exactly at their scripted times.
    The generator is pinned in docs/session-format.md so identical scenarios
    produce bitwise-identical sessions on every platform.
    """

    seed: int
    segments: tuple[Segment, ...]
    blink_script: tuple[tuple[int, int], ...] = ()
    sample_period_ms: int = 1000

    def validate(self) -> None:
        if self.sample_period_ms <= 0:
            raise ValueError("sample_period_ms must be positive")
        for seg in self.segments:
            if seg.duration_ms <= 0:
                raise ValueError("segment durations must be positive")
        for t_ms, strength in self.blink_script:
            if not 0 <= strength <= 100:
                raise ValueError(f"blink strength {strength} outside 0..100")
            if t_ms < 0:
                raise ValueError("blink times must be non-negative")

    def to_json_obj(self) -> dict:
        return {
            "seed": self.seed,
            "sample_period_ms": self.sample_period_ms,
            "segments": [
                {"duration_ms": s.duration_ms, "mean": s.mean, "stddev": s.stddev}
                for s in self.segments
            ],
            "blink_script": [[t, s] for t, s in self.blink_script],
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "SynthScenario":
        scenario = SynthScenario(
            seed=obj["seed"],
            segments=tuple(
                Segment(s["duration_ms"], s["mean"], s["stddev"])
                for s in obj["segments"]
            ),
            blink_script=tuple(
                (int(t), int(s)) for t, s in obj.get("blink_script", [])
            ),
            sample_period_ms=obj.get("sample_period_ms", 1000),
        )
        scenario.validate()
        return scenario


def load_scenario(path: str) -> SynthScenario:
    with open(path, "r", encoding="utf-8") as fh:
        return SynthScenario.from_json_obj(json.load(fh))


def save_scenario(path: str, scenario: SynthScenario) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario.to_json_obj(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def synthesize(scenario: SynthScenario) -> list[SessionRecord]:
    """Pure function of the scenario: same seed, same records, every run."""
    scenario.validate()
    rng = random.Random(scenario.seed)
    records: list[SessionRecord] = []
    cursor = 0
    for seg in scenario.segments:
        t = cursor
        while t < cursor + seg.duration_ms:
            value = round(rng.gauss(seg.mean, seg.stddev))
            value = max(1, min(100, value))
            records.append(SessionRecord.sample(t, "attention", value))
            t += scenario.sample_period_ms
        cursor += seg.duration_ms
    for t_ms, strength in scenario.blink_script:
        records.append(SessionRecord.sample(t_ms, "blink", strength))
    records.sort(key=lambda r: r.t_ms)  # stable: attention before blink on ties
    return records
