"""Deterministic discrete-event core.

Virtual clock in integer nanoseconds, a totally ordered event queue with
FIFO tiebreak at equal timestamps, and named reproducible RNG streams
derived from a single global seed.
"""
from __future__ import annotations

import hashlib
import heapq
import random
from typing import Callable, Optional


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current virtual time."""


class Engine:
    """Single-threaded event dispatcher.

    All protocol and physical-layer callbacks execute sequentially inside
    the dispatch loop. Two runs with the same seed and the same schedule
    calls produce identical dispatch order and identical RNG draws.
    """

    def __init__(self, seed: int = 0, trace_hook: Optional[Callable[[str], None]] = None):
        self.seed = seed
        self._now = 0
        self._seq = 0
        self._heap: list[tuple[int, int, str, str, Callable[[], None]]] = []
        self._streams: dict[str, random.Random] = {}
        self.trace_hook = trace_hook

    def now(self) -> int:
        return self._now

    def schedule(self, at: int, callback: Callable[[], None],
                 kind: str = "custom", detail: str = "") -> int:
        """Schedule `callback` at virtual time `at` (ns). Returns the sequence id.

        Events with equal `at` are dispatched in insertion order.
        """
        if at < self._now:
            raise SchedulingError(
                f"scheduled event at t={at} ns in the past (now={self._now} ns, kind={kind})")
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, (at, seq, kind, detail, callback))
        return seq

    def schedule_after(self, delay: int, callback: Callable[[], None],
                       kind: str = "custom", detail: str = "") -> int:
        return self.schedule(self._now + delay, callback, kind, detail)

    def run_until(self, t_end: int) -> int:
        """Dispatch every event with fire_at <= t_end in (time, sequence) order.

        Returns the final clock value: t_end, or the current time if the
        queue outlived t_end (never happens by construction), and t_end
        when the queue drains early. Calling again with the same t_end is
        a no-op.
        """
        while self._heap and self._heap[0][0] <= t_end:
            at, seq, kind, detail, callback = heapq.heappop(self._heap)
            self._now = at
            if self.trace_hook is not None:
                self.trace_hook(f"{at},{seq},{kind},{detail}")
            callback()
        if t_end > self._now:
            self._now = t_end
        return self._now

    def pending(self) -> int:
        return len(self._heap)

    def rng_stream(self, label: str) -> random.Random:
        """Named RNG stream: same (seed, label) always yields the same draws."""
        stream = self._streams.get(label)
        if stream is None:
            digest = hashlib.sha256(f"{self.seed}:{label}".encode()).digest()
            stream = random.Random(int.from_bytes(digest[:8], "big"))
            self._streams[label] = stream
        return stream
