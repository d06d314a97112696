"""Decentralized eventual-synchronization control plane.

Every node is a lockable resource. An initiator synchronizes with its
remote through a SYN / SYNACK / ACK handshake; a busy remote rejects with
SYNREJ, the initiator parks the request in a sleep set, and the rejector
queues a wake ticket that it services once free. Arrival numbers give the
per-node main queue a strict priority order that survives sleep, which is
what prevents starvation.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

from .network import (
    InvariantViolation,
    LinkRuntime,
    Request,
    T_MIN_GUARD_NS,
)

IDLE = "IDLE"
SYN_SENT = "SYN_SENT"
SYN_RECEIVED = "SYN_RECEIVED"
WAKE_SENT = "WAKE_SENT"
READY = "READY"
BUSY = "BUSY"

#: States in which the node's lock is held.
LOCKED_STATES = frozenset({SYN_RECEIVED, WAKE_SENT, READY, BUSY})

#: How long a waker stays reserved for the node it woke before giving up:
#: one control round trip plus a guard. The one timer the protocol needs
#: so a silent sleeper cannot wedge its waker.
WAKE_RESERVATION_GUARD_NS = 1_000

#: Retry window (in units of the link propagation delay) for a request that
#: was NACKed. Symmetric SYN crossings around a cycle of nodes repeat
#: forever under deterministic timing; a randomized backoff longer than the
#: message flight time breaks the symmetry within a round or two.
NACK_RETRY_WINDOW_PROPS = 4


@dataclass
class EspMessage:
    kind: str  # SYN | SYNACK | SYNREJ | ACK | NACK | WAKE
    sender: str
    receiver: str
    request: Request
    t_min: Optional[int] = None


class EspNode:
    """One node's FSM, queues and sets."""

    def __init__(self, node_id: str, net: "EspNetwork"):
        self.id = node_id
        self.net = net
        self.fsm = IDLE
        self.lock: Optional[object] = None  # request id or ("wake", target)
        self.q_main: list[tuple[int, int, str, object]] = []  # (A, tiebreak, kind, item)
        self.q_ready: list[tuple[str, Request]] = []  # (role, request)
        self.s_sent: dict[int, Request] = {}
        self.s_sleep: dict[int, Request] = {}
        self.s_wake: dict[str, int] = {}  # wake target -> arrival number
        self.next_arrival = 0
        self._q_tiebreak = 0
        self._wake_reserved_for: Optional[str] = None
        self._wake_token = 0
        self._retry_rng = net.engine.rng_stream(f"retry:{node_id}")

    # -- queue helpers -----------------------------------------------------

    def _push_main(self, arrival: int, kind: str, item) -> None:
        heapq.heappush(self.q_main, (arrival, self._q_tiebreak, kind, item))
        self._q_tiebreak += 1

    def _assign_arrival(self) -> int:
        a = self.next_arrival
        self.next_arrival += 1
        return a

    def _check(self) -> None:
        held = self.lock is not None
        if held != (self.fsm in LOCKED_STATES):
            raise InvariantViolation(
                f"node {self.id}: lock/state decoupled (fsm={self.fsm}, lock={self.lock})")

    # -- submission --------------------------------------------------------

    def submit(self, req: Request) -> None:
        req.arrival_number = self._assign_arrival()
        self._push_main(req.arrival_number, "active", req)
        self.net.trace(self.id, self.fsm, "submit", self.fsm,
                       f"req{req.request_id}->{req.remote} A={req.arrival_number}")
        self.process()

    # -- request processor -------------------------------------------------

    def process(self) -> None:
        """Algorithm loop: ready queue first, then the main priority queue."""
        if self.fsm == READY and self.q_ready:
            role, req = self.q_ready.pop(0)
            before = self.fsm
            self.fsm = BUSY
            self.net.trace(self.id, before, "execute", self.fsm,
                           f"req{req.request_id} role={role}")
            if role == "initiator":
                self.net.start_generation(req, req.t_min)
            self._check()
            return
        if self.fsm != IDLE or not self.q_main:
            return
        arrival, _, kind, item = heapq.heappop(self.q_main)
        if kind == "active":
            req: Request = item
            self.s_sent[req.request_id] = req
            self.fsm = SYN_SENT
            self.net.trace(self.id, IDLE, "send:SYN", self.fsm,
                           f"to={req.remote} req{req.request_id}")
            self.net.send(EspMessage("SYN", self.id, req.remote, req))
        else:  # wake ticket
            target: str = item
            self.lock = ("wake", target)
            self.fsm = WAKE_SENT
            self._wake_reserved_for = target
            self._wake_token += 1
            token = self._wake_token
            self.s_wake[target] = arrival
            self.net.trace(self.id, IDLE, "send:WAKE", self.fsm, f"to={target}")
            self.net.send(EspMessage("WAKE", self.id, target,
                                     Request(-1, self.id, target, self.net.fidelity,
                                             1, self.net.engine.now())))
            expiry = (self.net.engine.now() + 2 * self.net.prop_ns
                      + WAKE_RESERVATION_GUARD_NS
                      + round(self._retry_rng.uniform(0, 2 * self.net.prop_ns)))
            self.net.engine.schedule(
                expiry, lambda: self._wake_reservation_expired(target, token),
                kind="timer", detail=f"wake-expiry {self.id}->{target}")
        self._check()

    def _wake_reservation_expired(self, target: str, token: int) -> None:
        if (self.fsm == WAKE_SENT and self._wake_reserved_for == target
                and self._wake_token == token):
            self.s_wake.pop(target, None)
            self.lock = None
            self._wake_reserved_for = None
            self.fsm = IDLE
            self.net.trace(self.id, WAKE_SENT, "wake-expired", IDLE, f"target={target}")
            self._check()
            self.process()

    # -- message handlers --------------------------------------------------

    def handle(self, msg: EspMessage) -> None:
        handler = getattr(self, f"_on_{msg.kind.lower()}")
        handler(msg)
        self._check()

    def _accept_syn(self, msg: EspMessage) -> None:
        before = self.fsm
        req = msg.request
        self.lock = req.request_id
        self.fsm = SYN_RECEIVED
        t_min = self.net.engine.now() + self.net.prop_ns + T_MIN_GUARD_NS
        self.net.trace(self.id, before, "send:SYNACK", self.fsm,
                       f"to={msg.sender} req{req.request_id} t_min={t_min}")
        self.net.send(EspMessage("SYNACK", self.id, msg.sender, req, t_min=t_min))

    def _on_syn(self, msg: EspMessage) -> None:
        req = msg.request
        if self.fsm == WAKE_SENT and msg.sender == self._wake_reserved_for:
            # The node we woke came back for its resource: hand it over.
            self.s_wake.pop(msg.sender, None)
            self._wake_reserved_for = None
            self._wake_token += 1  # cancels the pending expiry timer
            self._accept_syn(msg)
        elif self.lock is None:  # IDLE, or SYN_SENT awaiting our own SYNACK
            self._accept_syn(msg)
        else:
            self.net.trace(self.id, self.fsm, "send:SYNREJ", self.fsm,
                           f"to={msg.sender} req{req.request_id}")
            self.net.send(EspMessage("SYNREJ", self.id, msg.sender, req))
            if msg.sender not in self.s_wake and not any(
                    kind == "wake" and item == msg.sender
                    for _, _, kind, item in self.q_main):
                self._push_main(self._assign_arrival(), "wake", msg.sender)

    def _on_synack(self, msg: EspMessage) -> None:
        req = self.s_sent.pop(msg.request.request_id, None)
        if req is None:
            self.net.trace(self.id, self.fsm, "drop:SYNACK", self.fsm,
                           f"req{msg.request.request_id}")
            return
        if self.lock is None:
            before = self.fsm
            self.lock = req.request_id
            req.t_min = msg.t_min
            self.q_ready.append(("initiator", req))
            self.fsm = READY
            self.net.trace(self.id, before, "send:ACK", self.fsm,
                           f"to={msg.sender} req{req.request_id}")
            self.net.send(EspMessage("ACK", self.id, msg.sender, req, t_min=msg.t_min))
            self.process()
        else:
            # Another handshake took our lock since we sent SYN; the request
            # is retried under its original arrival number, after a random
            # backoff so a cycle of crossing SYNs cannot re-synchronize.
            delay = round(self._retry_rng.uniform(
                0, NACK_RETRY_WINDOW_PROPS * self.net.prop_ns))
            self.net.engine.schedule_after(
                delay, lambda: self._retry(req),
                kind="timer", detail=f"nack-retry {self.id} req{req.request_id}")
            self.net.trace(self.id, self.fsm, "send:NACK", self.fsm,
                           f"to={msg.sender} req{req.request_id}")
            self.net.send(EspMessage("NACK", self.id, msg.sender, req))

    def _retry(self, req: Request) -> None:
        self._push_main(req.arrival_number, "active", req)
        self.process()

    def _on_synrej(self, msg: EspMessage) -> None:
        req = self.s_sent.pop(msg.request.request_id, None)
        if req is None:
            self.net.trace(self.id, self.fsm, "drop:SYNREJ", self.fsm,
                           f"req{msg.request.request_id}")
            return
        self.s_sleep[req.request_id] = req
        before = self.fsm
        if self.fsm == SYN_SENT:
            self.fsm = IDLE
        self.net.trace(self.id, before, "sleep", self.fsm,
                       f"req{req.request_id} A={req.arrival_number}")
        self.process()

    def _on_wake(self, msg: EspMessage) -> None:
        match = next((r for r in self.s_sleep.values() if r.remote == msg.sender), None)
        if match is None:
            self.net.trace(self.id, self.fsm, "drop:WAKE", self.fsm,
                           f"from={msg.sender}")
            return
        del self.s_sleep[match.request_id]
        self._push_main(match.arrival_number, "active", match)
        self.net.trace(self.id, self.fsm, "woken", self.fsm,
                       f"req{match.request_id} A={match.arrival_number}")
        self.process()

    def _on_ack(self, msg: EspMessage) -> None:
        if self.fsm != SYN_RECEIVED or self.lock != msg.request.request_id:
            self.net.trace(self.id, self.fsm, "drop:ACK", self.fsm,
                           f"req{msg.request.request_id}")
            return
        req = msg.request
        req.t_min = msg.t_min
        self.q_ready.append(("remote", req))
        self.fsm = READY
        self.net.trace(self.id, SYN_RECEIVED, "recv:ACK", self.fsm,
                       f"req{req.request_id}")
        self.process()

    def _on_nack(self, msg: EspMessage) -> None:
        if self.fsm != SYN_RECEIVED or self.lock != msg.request.request_id:
            self.net.trace(self.id, self.fsm, "drop:NACK", self.fsm,
                           f"req{msg.request.request_id}")
            return
        self.lock = None
        self.fsm = IDLE
        self.net.trace(self.id, SYN_RECEIVED, "recv:NACK", self.fsm,
                       f"req{msg.request.request_id}")
        self.process()

    # -- completion --------------------------------------------------------

    def release(self, req: Request) -> None:
        if self.fsm != BUSY or self.lock != req.request_id:
            raise InvariantViolation(
                f"node {self.id}: release of unheld lock for request "
                f"{req.request_id} (fsm={self.fsm}, lock={self.lock})")
        self.lock = None
        self.fsm = IDLE
        self.net.trace(self.id, BUSY, "release", IDLE, f"req{req.request_id}")
        self._check()
        self.process()


class EspNetwork(LinkRuntime):
    """Runs one EspNode per vertex; messages travel only on quantum-graph edges."""

    protocol = "esp"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.nodes = {n: EspNode(n, self) for n in self.topo.nodes}

    def submit(self, initiator: str, remote: str, pairs: int) -> int:
        req = self.new_request(initiator, remote, pairs)
        self.nodes[initiator].submit(req)
        return req.request_id

    def send(self, msg: EspMessage) -> None:
        if not self.topo.has_edge(msg.sender, msg.receiver):
            raise InvariantViolation(
                f"{msg.kind} from {msg.sender} to non-adjacent {msg.receiver}")
        self.engine.schedule_after(
            self.prop_ns, lambda: self.nodes[msg.receiver].handle(msg),
            kind="message", detail=f"{msg.kind} {msg.sender}->{msg.receiver}")

    def _generation_done(self, req: Request) -> None:
        self.nodes[req.initiator].release(req)
        self.nodes[req.remote].release(req)
