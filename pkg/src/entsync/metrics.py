"""Evaluation metrics over request timelines, plus the scaling regression."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000


@dataclass
class RequestTimeline:
    """The four timestamps (ns) from which every metric derives."""
    request_id: int
    topology: str
    protocol: str
    fidelity: float
    edge: tuple[str, str]
    pairs: int
    nl_start: int
    pl_start: Optional[int] = None
    pl_finish: Optional[int] = None
    nl_finish: Optional[int] = None

    @property
    def complete(self) -> bool:
        return self.nl_finish is not None

    def validate(self) -> None:
        if self.complete:
            assert self.nl_start <= self.pl_start <= self.pl_finish <= self.nl_finish, \
                f"request {self.request_id}: timeline out of order"


def latency_ns(tl: RequestTimeline) -> int:
    """Network-layer request latency: finish minus submission."""
    if not tl.complete:
        raise ValueError(f"request {tl.request_id} is incomplete")
    return tl.nl_finish - tl.nl_start


def busy_time_ns(tl: RequestTimeline) -> int:
    """Time spent generating at the physical layer."""
    if not tl.complete:
        raise ValueError(f"request {tl.request_id} is incomplete")
    return tl.pl_finish - tl.pl_start


def queueing_time_ns(tl: RequestTimeline) -> int:
    """Time spent waiting between submission and physical-layer handoff."""
    if not tl.complete:
        raise ValueError(f"request {tl.request_id} is incomplete")
    return tl.pl_start - tl.nl_start


def scaled_latency_ns(tl: RequestTimeline) -> float:
    """Latency normalized by the number of pairs requested."""
    return latency_ns(tl) / tl.pairs


def jitter_ns(latencies: Sequence[float]) -> float:
    """Population standard deviation (divisor n) of request latencies."""
    if not latencies:
        raise ValueError("jitter of an empty latency list")
    n = len(latencies)
    mean = sum(latencies) / n
    return math.sqrt(sum((x - mean) ** 2 for x in latencies) / n)


def throughput_per_edge(timelines: Sequence[RequestTimeline], n_edges: int,
                        duration_ns: int) -> float:
    """Completed pairs per second per edge within [0, duration]."""
    if duration_ns <= 0:
        raise ValueError("duration must be positive")
    pairs = sum(tl.pairs for tl in timelines
                if tl.complete and tl.nl_finish <= duration_ns)
    return pairs / (n_edges * (duration_ns / NS_PER_S))


def linear_fit(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Ordinary least squares y = m*x + c with the Pearson R^2.

    Requires at least two distinct x values. R^2 is defined as 1 when the
    residuals vanish (including the degenerate constant-y case).
    """
    if len(points) < 2:
        raise ValueError("need at least two points")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    n = len(points)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("degenerate fit: all x values equal")
    sxy = sum((x - mx) * (y - my) for x, y in points)
    m = sxy / sxx
    c = my - m * mx
    syy = sum((y - my) ** 2 for y in ys)
    ss_res = sum((y - (m * x + c)) ** 2 for x, y in points)
    r2 = 1.0 if syy == 0 else 1.0 - ss_res / syy
    return m, c, r2


@dataclass
class RunSummary:
    topology: str
    protocol: str
    fidelity: float
    seed: int
    sim_time_s: float
    n_edges: int
    matching_number: int
    n_requests: int
    n_incomplete: int
    mean_latency_ms: float
    jitter_ms: float
    mean_scaled_latency_ms: float
    throughput_per_edge: float
    mean_busy_ms: float
    mean_queueing_ms: float


def summarize(timelines: Sequence[RequestTimeline], *, topology: str, protocol: str,
              fidelity: float, seed: int, sim_time_s: float, n_edges: int,
              matching: int) -> RunSummary:
    """Aggregate one run. Incomplete requests are excluded from means and counted."""
    done = [tl for tl in timelines if tl.complete]
    if not done:
        raise ValueError("run produced no completed requests")
    for tl in done:
        tl.validate()
    lats = [latency_ns(tl) for tl in done]
    duration_ns = round(sim_time_s * NS_PER_S)
    return RunSummary(
        topology=topology,
        protocol=protocol,
        fidelity=fidelity,
        seed=seed,
        sim_time_s=sim_time_s,
        n_edges=n_edges,
        matching_number=matching,
        n_requests=len(done),
        n_incomplete=len(timelines) - len(done),
        mean_latency_ms=sum(lats) / len(lats) / NS_PER_MS,
        jitter_ms=jitter_ns(lats) / NS_PER_MS,
        mean_scaled_latency_ms=sum(scaled_latency_ns(tl) for tl in done) / len(done) / NS_PER_MS,
        throughput_per_edge=throughput_per_edge(done, n_edges, duration_ns),
        mean_busy_ms=sum(busy_time_ns(tl) for tl in done) / len(done) / NS_PER_MS,
        mean_queueing_ms=sum(queueing_time_ns(tl) for tl in done) / len(done) / NS_PER_MS,
    )
