"""Closed-loop stochastic request generators, one per quantum link.

Each generator keeps exactly one request in flight: the first request is
submitted at t=0, and every completion schedules the next submission after
an exponential backoff, so per-edge arrivals form a Poisson process.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

from .network import LinkRuntime, Request

DEFAULT_MEAN_BACKOFF_NS = 50_000_000  # 50 ms
DEFAULT_SIZE_RANGE = (1, 6)


@dataclass
class EdgeGenerator:
    edge: tuple[str, str]
    rng: Random
    mean_backoff_ns: float = DEFAULT_MEAN_BACKOFF_NS
    size_range: tuple[int, int] = DEFAULT_SIZE_RANGE
    outstanding: int | None = field(default=None, init=False)  # in-flight request id

    def sample_backoff(self) -> int:
        """Exponential backoff, whole nanoseconds, never zero."""
        return max(1, round(self.rng.expovariate(1.0 / self.mean_backoff_ns)))

    def sample_request(self) -> tuple[str, str, int]:
        """Fair coin flip for the initiating endpoint; uniform pair count."""
        a, b = self.edge
        initiator, remote = (a, b) if self.rng.random() < 0.5 else (b, a)
        pairs = self.rng.randint(*self.size_range)
        return initiator, remote, pairs


class Workload:
    """Drives one protocol network with per-edge closed-loop generators."""

    def __init__(self, runtime: LinkRuntime,
                 mean_backoff_ns: float = DEFAULT_MEAN_BACKOFF_NS,
                 size_range: tuple[int, int] = DEFAULT_SIZE_RANGE):
        self.runtime = runtime
        self.generators = {
            edge: EdgeGenerator(edge,
                                runtime.engine.rng_stream(f"workload:{edge[0]}-{edge[1]}"),
                                mean_backoff_ns, size_range)
            for edge in runtime.topo.edges
        }
        self._by_request: dict[int, EdgeGenerator] = {}
        runtime.on_complete = self._completed

    def start(self) -> None:
        """Submit the first request on every edge at t=0."""
        for gen in self.generators.values():
            self.runtime.engine.schedule(
                0, lambda g=gen: self._submit(g),
                kind="workload", detail=f"first {g_label(gen)}")

    def _submit(self, gen: EdgeGenerator) -> None:
        assert gen.outstanding is None, f"edge {gen.edge} already has a request in flight"
        initiator, remote, pairs = gen.sample_request()
        req_id = self.runtime.submit(initiator, remote, pairs)
        gen.outstanding = req_id
        self._by_request[req_id] = gen

    def _completed(self, req: Request) -> None:
        gen = self._by_request.pop(req.request_id, None)
        if gen is None:
            return  # request submitted outside the workload
        gen.outstanding = None
        delay = gen.sample_backoff()
        self.runtime.engine.schedule_after(
            delay, lambda: self._submit(gen),
            kind="workload", detail=f"backoff {g_label(gen)}")


def g_label(gen: EdgeGenerator) -> str:
    return f"{gen.edge[0]}-{gen.edge[1]}"
