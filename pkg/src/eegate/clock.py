"""Clock abstraction so timed paths (replay, gateway pump) are testable without sleeping."""

from __future__ import annotations

import time


class MonotonicClock:
    """Wall clock: epoch milliseconds for stamps, real sleeps for pacing."""

    def now_ms(self) -> int:
        return time.time_ns() // 1_000_000

    def sleep_ms(self, duration_ms: float) -> None:
        if duration_ms > 0:
            time.sleep(duration_ms / 1000.0)


class VirtualClock:
    """Deterministic clock: sleeps advance time instantly."""

    def __init__(self, start_ms: int = 0):
        self._now = start_ms

    def now_ms(self) -> int:
        return self._now

    def sleep_ms(self, duration_ms: float) -> None:
        if duration_ms > 0:
            self._now += int(duration_ms)

    def advance_ms(self, duration_ms: int) -> None:
        self._now += duration_ms


class MonotonicStamper:
    """Strictly increasing millisecond stamps from a clock.

    The gateway stamps every received packet and scroll message through one
    stamper, so recorded sessions keep their sorted-by-time invariant even
    when events land within the same millisecond.
    """

    def __init__(self, clock=None):
        self._clock = clock or MonotonicClock()
        self._last = -1

    def stamp(self) -> int:
        t = self._clock.now_ms()
        if t <= self._last:
            t = self._last + 1
        self._last = t
        return t
