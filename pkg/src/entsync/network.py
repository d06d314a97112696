"""Shared protocol runtime: requests, the exclusivity monitor, and the
physical-layer span machinery both control-plane protocols drive."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .engine import Engine
from .metrics import RequestTimeline
from .physics import (
    LinkPhysics,
    alpha_for_fidelity,
    generation_span,
    herald_round_trip_ns,
    link_propagation_ns,
    sample_clock_period,
    success_probability,
)
from .topology import Topology, _edge


class InvariantViolation(RuntimeError):
    """A protocol correctness invariant was broken; the run must abort."""


#: Minimum-start-time safety margin added on top of one control-link
#: propagation delay when a remote node reserves itself.
T_MIN_GUARD_NS = 1_000


@dataclass
class Request:
    """One entanglement request: initiator, remote, fidelity, pair count,
    submission time, plus the per-node bookkeeping the protocols attach."""
    request_id: int
    initiator: str
    remote: str
    fidelity: float
    pairs: int
    created_at: int
    arrival_number: Optional[int] = None  # assigned by the initiator under esp
    t_min: Optional[int] = None

    @property
    def edge(self) -> tuple[str, str]:
        return _edge(self.initiator, self.remote)


@dataclass
class ProtocolEvent:
    """One line of the protocol trace."""
    time_ns: int
    node: str
    fsm_before: str
    event: str
    fsm_after: str
    detail: str

    def line(self) -> str:
        return (f"{self.time_ns},{self.node},{self.fsm_before},"
                f"{self.event},{self.fsm_after},{self.detail}")


class ExclusivityMonitor:
    """Watches that no node takes part in two overlapping generation spans."""

    def __init__(self):
        self._active: dict[str, int] = {}

    def begin(self, req: Request, now: int) -> None:
        for node in (req.initiator, req.remote):
            if self._active.get(node):
                raise InvariantViolation(
                    f"t={now}: node {node} already generating when request "
                    f"{req.request_id} on edge {req.edge} started")
            self._active[node] = req.request_id
        self.intervals_open = True

    def end(self, req: Request) -> None:
        for node in (req.initiator, req.remote):
            if self._active.get(node) != req.request_id:
                raise InvariantViolation(
                    f"span end for request {req.request_id} but node {node} "
                    f"is not generating it")
            self._active[node] = 0


class LinkRuntime:
    """Base for both protocol networks.

    Owns the engine, topology, physics, per-node clocks, timelines, the
    exclusivity monitor, and runs generation spans on behalf of whichever
    protocol synchronized the endpoints.
    """

    protocol = "?"

    def __init__(self, engine: Engine, topo: Topology, physics: LinkPhysics,
                 fidelity: float,
                 on_complete: Optional[Callable[[Request], None]] = None,
                 collect_protocol_trace: bool = True):
        self.engine = engine
        self.topo = topo
        self.physics = physics
        self.fidelity = fidelity
        self.alpha = alpha_for_fidelity(fidelity)
        self.p_success = success_probability(self.alpha, physics)
        self.prop_ns = link_propagation_ns(physics)
        self.herald_rtt_ns = herald_round_trip_ns(physics)
        self.on_complete = on_complete
        self.monitor = ExclusivityMonitor()
        self.timelines: dict[int, RequestTimeline] = {}
        self.protocol_events: Optional[list[ProtocolEvent]] = (
            [] if collect_protocol_trace else None)
        self._next_request_id = 0
        self.clock_period_ns = {
            node: sample_clock_period(engine.rng_stream(f"clock:{node}"))
            for node in topo.nodes
        }
        self._edge_rng = {e: engine.rng_stream(f"attempts:{e[0]}-{e[1]}")
                          for e in topo.edges}

    # -- request lifecycle -------------------------------------------------

    def new_request(self, initiator: str, remote: str, pairs: int) -> Request:
        if not self.topo.has_edge(initiator, remote):
            raise ValueError(f"({initiator}, {remote}) is not a quantum link")
        if not 1 <= pairs:
            raise ValueError("pairs must be >= 1")
        req = Request(self._next_request_id, initiator, remote,
                      self.fidelity, pairs, self.engine.now())
        self._next_request_id += 1
        self.timelines[req.request_id] = RequestTimeline(
            request_id=req.request_id, topology=self.topo.label,
            protocol=self.protocol, fidelity=self.fidelity,
            edge=req.edge, pairs=pairs, nl_start=req.created_at)
        return req

    def submit(self, initiator: str, remote: str, pairs: int) -> int:
        raise NotImplementedError

    # -- generation spans --------------------------------------------------

    def start_generation(self, req: Request, t_min: int) -> None:
        """Kick off the physical layer once both endpoints are reserved."""
        start = max(self.engine.now(), t_min)
        self.engine.schedule(start, lambda: self._begin_span(req),
                             kind="span", detail=f"begin req{req.request_id}")

    def _begin_span(self, req: Request) -> None:
        now = self.engine.now()
        self.monitor.begin(req, now)
        period = max(self.clock_period_ns[req.initiator],
                     self.clock_period_ns[req.remote])
        attempts, duration = generation_span(
            req.pairs, self.p_success, period, self.herald_rtt_ns,
            self._edge_rng[req.edge])
        tl = self.timelines[req.request_id]
        tl.pl_start = now
        self.engine.schedule(now + duration, lambda: self._finish_span(req),
                             kind="span",
                             detail=f"finish req{req.request_id} attempts={attempts}")

    def _finish_span(self, req: Request) -> None:
        now = self.engine.now()
        self.monitor.end(req)
        tl = self.timelines[req.request_id]
        tl.pl_finish = now
        tl.nl_finish = now
        self._generation_done(req)
        if self.on_complete is not None:
            self.on_complete(req)

    def _generation_done(self, req: Request) -> None:
        """Protocol hook: release locks / notify the scheduler."""
        raise NotImplementedError

    # -- tracing -----------------------------------------------------------

    def trace(self, node: str, before: str, event: str, after: str,
              detail: str = "") -> None:
        if self.protocol_events is not None:
            self.protocol_events.append(ProtocolEvent(
                self.engine.now(), node, before, event, after, detail))
