"""Clock abstraction: a mock clock for deterministic tests and a real one.

Lease expiry, re-announcement and subscription deadlines all go through a
Clock so the whole discovery/eventing machinery can be driven by advancing
a MockClock manually. One clock instance is shared by every node of a
deployment; firing order under the mock clock is (deadline, registration
order), which makes multi-node timer interleavings reproducible.
"""

from __future__ import annotations

import heapq
import itertools
import threading
import time
from typing import Callable, Optional


class TimerHandle:
    def __init__(self):
        self._cancelled = False

    def cancel(self) -> None:
        self._cancelled = True

    @property
    def cancelled(self) -> bool:
        return self._cancelled


class Clock:
    """Interface: now() and schedule(delay, fn)."""

    def now(self) -> float:
        raise NotImplementedError

    def schedule(self, delay: float, fn: Callable[[], None]) -> TimerHandle:
        raise NotImplementedError

    def sleep(self, duration: float) -> None:
        raise NotImplementedError


class MockClock(Clock):
    """Manually advanced clock. Timers fire inside advance(), in order."""

    def __init__(self, start: float = 0.0):
        self._now = start
        self._heap: list = []
        self._tick = itertools.count()
        self._lock = threading.RLock()

    def now(self) -> float:
        return self._now

    def schedule(self, delay: float, fn: Callable[[], None]) -> TimerHandle:
        handle = TimerHandle()
        with self._lock:
            heapq.heappush(self._heap, (self._now + max(delay, 0.0), next(self._tick), fn, handle))
        return handle

    def advance(self, duration: float) -> None:
        """Move time forward, firing every timer due on the way."""
        target = self._now + duration
        while True:
            with self._lock:
                if not self._heap or self._heap[0][0] > target:
                    break
                deadline, _, fn, handle = heapq.heappop(self._heap)
                self._now = max(self._now, deadline)
            if not handle.cancelled:
                fn()
        self._now = target

    def sleep(self, duration: float) -> None:
        self.advance(duration)

    @property
    def pending_timers(self) -> int:
        with self._lock:
            return sum(1 for _, _, _, h in self._heap if not h.cancelled)


class RealClock(Clock):
    """Wall clock backed by a single scheduler thread."""

    def __init__(self):
        self._heap: list = []
        self._tick = itertools.count()
        self._cond = threading.Condition()
        self._thread: Optional[threading.Thread] = None
        self._closed = False

    def now(self) -> float:
        return time.monotonic()

    def schedule(self, delay: float, fn: Callable[[], None]) -> TimerHandle:
        handle = TimerHandle()
        with self._cond:
            if self._closed:
                raise RuntimeError("clock closed")
            heapq.heappush(self._heap, (self.now() + max(delay, 0.0), next(self._tick), fn, handle))
            if self._thread is None:
                self._thread = threading.Thread(target=self._run, name="slcalite-clock", daemon=True)
                self._thread.start()
            self._cond.notify()
        return handle

    def sleep(self, duration: float) -> None:
        time.sleep(duration)

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._heap.clear()
            self._cond.notify()

    def _run(self) -> None:
        while True:
            with self._cond:
                if self._closed:
                    return
                if not self._heap:
                    self._cond.wait(timeout=1.0)
                    continue
                deadline, _, fn, handle = self._heap[0]
                wait = deadline - self.now()
                if wait > 0:
                    self._cond.wait(timeout=wait)
                    continue
                heapq.heappop(self._heap)
            if not handle.cancelled:
                try:
                    fn()
                except Exception:  # timer callbacks must not kill the scheduler
                    pass
