"""Millisecond clocks: the wall clock and a deterministic virtual clock.

Every timestamp in the pipeline comes from one of these. Log headers record
which source produced the stamps (``clock=wall`` or ``clock=virtual``) so an
analyzer never has to guess whether cross-log differencing is meaningful.
"""
from __future__ import annotations

import heapq
import itertools
import time
from typing import Callable


class WallClock:
    """System time in milliseconds since the Unix epoch."""

    name = "wall"
    virtual = False

    def now_ms(self) -> float:
        return time.time_ns() / 1e6

    def sleep_until_ms(self, deadline_ms: float) -> None:
        while True:
            dt_ms = deadline_ms - self.now_ms()
            if dt_ms <= 0:
                return
            time.sleep(dt_ms / 1000.0)


class VirtualClock:
    """Manually advanced clock with an event queue.

    ``sleep_until_ms`` runs every event scheduled at or before the deadline
    (in time order, ties broken by scheduling order) and then lands exactly on
    the deadline, which makes whole pipeline runs deterministic and instant.
    Single-threaded by design: callbacks run on the caller's thread.
    """

    name = "virtual"
    virtual = True

    def __init__(self, start_ms: float = 0.0):
        self._now = start_ms
        self._events: list[tuple[float, int, Callable[[], None]]] = []
        self._tie = itertools.count()

    def now_ms(self) -> float:
        return self._now

    def schedule(self, at_ms: float, fn: Callable[[], None]) -> None:
        heapq.heappush(self._events, (max(at_ms, self._now), next(self._tie), fn))

    def sleep_until_ms(self, deadline_ms: float) -> None:
        while self._events and self._events[0][0] <= deadline_ms:
            at_ms, _, fn = heapq.heappop(self._events)
            self._now = max(self._now, at_ms)
            fn()
        self._now = max(self._now, deadline_ms)

    def run_until_idle(self) -> None:
        """Drain the event queue, advancing time to each event."""
        while self._events:
            at_ms, _, fn = heapq.heappop(self._events)
            self._now = max(self._now, at_ms)
            fn()
