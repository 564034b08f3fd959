"""Independent brute-force oracles the test suite checks the package against.

Everything here recomputes expected results from whole inputs by direct
enumeration, deliberately sharing no code with the implementation paths it
verifies.
"""

from __future__ import annotations

import math


def checksum_oracle(payload: bytes) -> int:
    """Byte-sum checksum: 255 minus the low byte of the payload sum."""
    return 255 - (sum(payload) % 256)


def frame_oracle(payload: bytes) -> bytes:
    """Assemble a frame directly from the documented layout."""
    assert 1 <= len(payload) <= 169
    return b"\xaa\xaa" + bytes([len(payload)]) + payload + bytes([checksum_oracle(payload)])


def percentile_oracle(values: list[int], default: int = 30) -> int:
    """Nearest-rank p75 clamped to [20, 80]; short inputs fall back."""
    if len(values) < 10:
        return default
    ordered = sorted(values)
    n = len(ordered)
    # nearest rank: smallest 1-based index i with i/n >= 0.75
    rank = next(i for i in range(1, n + 1) if i / n >= 0.75)
    return min(80, max(20, ordered[rank - 1]))


def event_trace_oracle(samples, config):
    """Recompute the full event sequence from the whole trace.

    ``samples`` are (t_ms, track, value) triples in stream order covering the
    attention and blink tracks.  Returns (t, kind, detail-items) tuples in
    emission order.  Works from global structure: maximal threshold runs for
    enter/exit, then an interval walk for advances, then blink delta/pair
    scans -- rather than a per-sample state machine.
    """
    attention = [(t, v) for t, track, v in samples if track == "attention"]
    blinks = [(t, v) for t, track, v in samples if track == "blink"]

    # maximal runs of value >= threshold over the attention samples
    runs: list[list[tuple[int, int]]] = []
    current: list[tuple[int, int]] = []
    breakers: list[tuple[int, int] | None] = []  # sample that ended each run
    for t, v in attention:
        if v >= config.attention_threshold:
            current.append((t, v))
        else:
            if current:
                runs.append(current)
                breakers.append((t, v))
                current = []
    if current:
        runs.append(current)
        breakers.append(None)

    enters: dict[int, int] = {}  # t -> value
    exits: dict[int, int] = {}
    high_intervals: list[tuple[int, float]] = []
    for run, breaker in zip(runs, breakers):
        start = run[0][0]
        entered_at = None
        for t, v in run:
            if t - start >= config.hold_ms:
                entered_at = (t, v)
                break
        if entered_at is None:
            continue
        enters[entered_at[0]] = entered_at[1]
        if breaker is not None:
            exits[breaker[0]] = breaker[1]
            high_intervals.append((entered_at[0], breaker[0]))
        else:
            high_intervals.append((entered_at[0], math.inf))

    def in_high(t):
        return any(lo <= t < hi for lo, hi in high_intervals)

    advances: dict[int, int] = {}
    if attention:
        anchor = attention[0][0]
        for t, v in attention:
            if config.advance_on_high:
                continue  # handled below
            if not in_high(t) and t - anchor >= config.advance_period_ms:
                advances[t] = v
                anchor = t
    if config.advance_on_high:
        for lo, hi in high_intervals:
            anchor = lo
            for t, v in attention:
                if lo <= t < hi and t - anchor >= config.advance_period_ms:
                    advances[t] = v
                    anchor = t

    # blink deltas against the previous blink sample (stream seed 0)
    deliberate: list[tuple[int, int, int]] = []
    prev = 0
    for t, v in blinks:
        delta = abs(v - prev) if config.absolute_blink_delta else v - prev
        if delta >= config.blink_delta:
            deliberate.append((t, v, delta))
        prev = v

    doubles: dict[int, tuple[int, int]] = {}  # t -> (gap, first_t)
    deliberate_at: dict[int, tuple[int, int]] = {}
    pending = None
    for t, v, delta in deliberate:
        deliberate_at[t] = (v, delta)
        if pending is None:
            pending = t
        else:
            gap = t - pending
            if config.double_blink_min_gap_ms <= gap <= config.double_blink_max_gap_ms:
                doubles[t] = (gap, pending)
                pending = None
            elif gap > config.double_blink_max_gap_ms:
                pending = t
            # below the minimum gap: jitter, first blink stays armed

    events = []
    for t, track, v in samples:
        if track == "attention":
            if t in enters and enters[t] == v:
                events.append((t, "sustainedHighEnter", (("value", v),)))
                del enters[t]
            if t in exits and exits[t] == v:
                events.append((t, "sustainedHighExit", (("value", v),)))
                del exits[t]
            if t in advances and advances[t] == v:
                events.append((t, "focusAdvance", (("value", v),)))
                del advances[t]
        elif track == "blink":
            if t in deliberate_at:
                strength, delta = deliberate_at.pop(t)
                if strength == v:
                    events.append(
                        (t, "deliberateBlink", (("delta", delta), ("strength", strength)))
                    )
                    if t in doubles:
                        gap, first = doubles.pop(t)
                        events.append(
                            (t, "doubleBlink", (("firstTMs", first), ("gapMs", gap)))
                        )
    return events


def join_oracle(attention, scroll, max_skew_ms):
    """All-pairs nearest-timestamp join; ties prefer the earlier scroll sample.

    ``attention``: (t, value); ``scroll``: (t, pct, page).  Returns joined
    (t, value, pct, page) tuples plus the dropped count.
    """
    joined = []
    dropped = 0
    for t, value in attention:
        best = None
        for s_t, pct, page in scroll:
            key = (abs(s_t - t), s_t)
            if best is None or key < best[0]:
                best = (key, pct, page)
        if best is None or best[0][0] > max_skew_ms:
            dropped += 1
            continue
        joined.append((t, value, best[1], best[2]))
    return joined, dropped


def bucket_oracle(joined, bucket_count):
    """Group (pct, attention) pairs by section; returns per-bucket (mean, count, max)."""
    groups: dict[int, list[int]] = {}
    for pct, att in joined:
        idx = min(int(pct * bucket_count // 100), bucket_count - 1)
        groups.setdefault(idx, []).append(att)
    stats = []
    for i in range(bucket_count):
        values = groups.get(i, [])
        if values:
            stats.append((sum(values) / len(values), len(values), max(values)))
        else:
            stats.append((None, 0, None))
    return stats
