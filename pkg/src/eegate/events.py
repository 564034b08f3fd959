"""Streaming state machines turning sample streams into control events.

Protocol (defaults follow the headset study: threshold 30, hold 1 s, blink
delta 20):

* attention at/above the threshold continuously for ``hold_ms`` enters the
  sustained-high state (``sustainedHighEnter``); the first sample below the
  threshold afterwards exits it.  While *not* sustained-high, a
  ``focusAdvance`` fires whenever ``advance_period_ms`` has elapsed since
  the previous advance (or stream start) -- high attention holds the focus,
  low attention walks it forward.  ``advance_on_high`` flips that polarity.
* a blink whose strength exceeds the previous blink's by at least
  ``blink_delta`` is deliberate; two deliberate blinks whose gap falls in
  ``[double_blink_min_gap_ms, double_blink_max_gap_ms]`` form a
  ``doubleBlink``, consuming the pair.

All transitions are pure functions over an explicit state value: one engine
state per source stream, replay-deterministic, safe to move between
contexts but never shared concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple, Sequence

from .wire import (
    TRACK_ATTENTION,
    TRACK_BLINK,
    TRACK_SIGNAL_QUALITY,
    Diagnostic,
    Sample,
)

EVENT_SUSTAINED_HIGH_ENTER = "sustainedHighEnter"
EVENT_SUSTAINED_HIGH_EXIT = "sustainedHighExit"
EVENT_FOCUS_ADVANCE = "focusAdvance"
EVENT_DELIBERATE_BLINK = "deliberateBlink"
EVENT_DOUBLE_BLINK = "doubleBlink"

EVENT_KINDS = (
    EVENT_SUSTAINED_HIGH_ENTER,
    EVENT_SUSTAINED_HIGH_EXIT,
    EVENT_FOCUS_ADVANCE,
    EVENT_DELIBERATE_BLINK,
    EVENT_DOUBLE_BLINK,
)

DEFAULT_ATTENTION_THRESHOLD = 30


@dataclass(frozen=True)
class EventConfig:
    attention_threshold: int = DEFAULT_ATTENTION_THRESHOLD
    hold_ms: int = 1000
    advance_period_ms: int = 1000
    blink_delta: int = 20
    double_blink_min_gap_ms: int = 100
    double_blink_max_gap_ms: int = 1000
    signal_quality_gate: int = 200  # 200 = gating disabled (quality never exceeds it)
    advance_on_high: bool = False  # flip the navigation polarity
    absolute_blink_delta: bool = False

    def validate(self) -> None:
        if not 1 <= self.attention_threshold <= 100:
            raise ValueError("attention_threshold must be in 1..100")
        if self.hold_ms <= 0 or self.advance_period_ms <= 0:
            raise ValueError("durations must be positive")
        if not 0 < self.double_blink_min_gap_ms < self.double_blink_max_gap_ms:
            raise ValueError("require 0 < min gap < max gap")
        if not 0 <= self.signal_quality_gate <= 200:
            raise ValueError("signal_quality_gate must be in 0..200")


@dataclass(frozen=True)
class ControlEvent:
    t_ms: int
    kind: str
    detail: dict

    def to_json_obj(self) -> dict:
        return {"t": self.t_ms, "event": self.kind, "detail": self.detail}


@dataclass(frozen=True)
class EngineState:
    """Fully determined by the consumed sample prefix plus config."""

    last_t: int | None = None
    stream_start_t: int | None = None
    run_start_t: int | None = None
    in_high: bool = False
    last_advance_t: int | None = None
    prev_blink: int = 0  # first blink of a stream compares against 0
    pending_blink_t: int | None = None
    signal_quality: int = 0


class Transition(NamedTuple):
    events: list[ControlEvent]
    diagnostics: list[Diagnostic]
    state: EngineState


def _reject_out_of_order(sample: Sample, state: EngineState) -> Transition | None:
    if state.last_t is not None and sample.t_ms < state.last_t:
        diag = Diagnostic(
            "out_of_order",
            f"{sample.track} sample at {sample.t_ms} behind {state.last_t}; dropped",
        )
        return Transition([], [diag], state)
    return None


def on_attention(
    sample: Sample, state: EngineState, config: EventConfig
) -> Transition:
    """Advance the sustained-high / focus-advance machine by one sample."""
    if sample.track != TRACK_ATTENTION:
        raise ValueError(f"expected attention sample, got {sample.track}")
    rejected = _reject_out_of_order(sample, state)
    if rejected is not None:
        return rejected

    t = sample.t_ms
    events: list[ControlEvent] = []
    changes: dict = {"last_t": t}
    if state.stream_start_t is None:
        changes["stream_start_t"] = t

    if sample.value >= config.attention_threshold:
        run_start = state.run_start_t if state.run_start_t is not None else t
        changes["run_start_t"] = run_start
        if not state.in_high and t - run_start >= config.hold_ms:
            events.append(
                ControlEvent(t, EVENT_SUSTAINED_HIGH_ENTER, {"value": sample.value})
            )
            changes["in_high"] = True
            if config.advance_on_high:
                changes["last_advance_t"] = t  # anchor ticks at entry
    else:
        if state.in_high:
            events.append(
                ControlEvent(t, EVENT_SUSTAINED_HIGH_EXIT, {"value": sample.value})
            )
            changes["in_high"] = False
            if config.advance_on_high:
                changes["last_advance_t"] = None
        changes["run_start_t"] = None

    state = replace(state, **changes)

    if config.advance_on_high:
        should_advance = (
            state.in_high
            and state.last_advance_t is not None
            and t - state.last_advance_t >= config.advance_period_ms
        )
    else:
        anchor = (
            state.last_advance_t
            if state.last_advance_t is not None
            else state.stream_start_t
        )
        should_advance = not state.in_high and t - anchor >= config.advance_period_ms
    if should_advance:
        events.append(ControlEvent(t, EVENT_FOCUS_ADVANCE, {"value": sample.value}))
        state = replace(state, last_advance_t=t)

    return Transition(events, [], state)


def on_blink(sample: Sample, state: EngineState, config: EventConfig) -> Transition:
    """Advance the deliberate/double-blink machine by one sample."""
    if sample.track != TRACK_BLINK:
        raise ValueError(f"expected blink sample, got {sample.track}")
    rejected = _reject_out_of_order(sample, state)
    if rejected is not None:
        return rejected

    t = sample.t_ms
    events: list[ControlEvent] = []
    delta = sample.value - state.prev_blink
    if config.absolute_blink_delta:
        delta = abs(delta)
    pending = state.pending_blink_t

    if delta >= config.blink_delta:
        events.append(
            ControlEvent(
                t,
                EVENT_DELIBERATE_BLINK,
                {"strength": sample.value, "delta": delta},
            )
        )
        if pending is None:
            pending = t
        else:
            gap = t - pending
            if config.double_blink_min_gap_ms <= gap <= config.double_blink_max_gap_ms:
                events.append(
                    ControlEvent(
                        t, EVENT_DOUBLE_BLINK, {"gapMs": gap, "firstTMs": pending}
                    )
                )
                pending = None  # pair consumed; a third blink starts fresh
            elif gap > config.double_blink_max_gap_ms:
                pending = t  # stale partner; this blink opens a new pair
            # gap below the minimum is sensor jitter: the original pending
            # blink stays armed and this one never pairs

    state = replace(
        state,
        last_t=t,
        prev_blink=sample.value,
        pending_blink_t=pending,
    )
    return Transition(events, [], state)


def process(sample: Sample, state: EngineState, config: EventConfig) -> Transition:
    """Route any-track samples: gate on signal quality, run the machines."""
    if sample.track == TRACK_SIGNAL_QUALITY:
        return Transition([], [], replace(state, signal_quality=sample.value))
    if sample.track in (TRACK_ATTENTION, TRACK_BLINK):
        if state.signal_quality > config.signal_quality_gate:
            diag = Diagnostic(
                "signal_gated",
                f"{sample.track} sample at {sample.t_ms} dropped: "
                f"signal quality {state.signal_quality} exceeds gate "
                f"{config.signal_quality_gate}",
            )
            return Transition([], [diag], state)
        if sample.track == TRACK_ATTENTION:
            return on_attention(sample, state, config)
        return on_blink(sample, state, config)
    return Transition([], [], state)  # meditation / raw are passive tracks


def process_stream(
    samples: Iterable[Sample],
    config: EventConfig,
    state: EngineState | None = None,
) -> Transition:
    """Fold a whole sample sequence; chunking into calls never changes the output."""
    state = state or EngineState()
    events: list[ControlEvent] = []
    diags: list[Diagnostic] = []
    for sample in samples:
        step = process(sample, state, config)
        events.extend(step.events)
        diags.extend(step.diagnostics)
        state = step.state
    return Transition(events, diags, state)


def calibrate(samples: Sequence[Sample | int], default: int = DEFAULT_ATTENTION_THRESHOLD) -> int:
    """Personal threshold from a still baseline recording.

    Nearest-rank 75th percentile of the attention values, clamped to
    [20, 80]; fewer than 10 samples falls back to the stock threshold.
    """
    values = [s.value if isinstance(s, Sample) else int(s) for s in samples]
    if len(values) < 10:
        return default
    values.sort()
    rank = math.ceil(0.75 * len(values))  # nearest-rank, 1-indexed
    return max(20, min(80, values[rank - 1]))
