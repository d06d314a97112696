"""Centralized distributed-queue baseline.

A single scheduler node holds one global FIFO. Requests execute strictly
serially from the head of the queue, even when disjoint edges could have
proceeded concurrently; that head-of-line behavior is the baseline's
bottleneck.
"""
from __future__ import annotations

from collections import deque
from typing import Optional

from .network import InvariantViolation, LinkRuntime, Request, T_MIN_GUARD_NS
from .topology import SCHEDULER_NODE


class DqpNetwork(LinkRuntime):
    """Star control plane around a scheduler; quantum edges unchanged.

    Control messages (enqueue, grant, completion) each cost one link
    propagation delay; the scheduler's links have the same length as
    quantum links.
    """

    protocol = "dqp"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.queue: deque[Request] = deque()
        self.active: Optional[Request] = None

    def submit(self, initiator: str, remote: str, pairs: int) -> int:
        req = self.new_request(initiator, remote, pairs)
        self.trace(initiator, "-", "send:ENQUEUE", "-", f"req{req.request_id}")
        self.engine.schedule_after(self.prop_ns, lambda: self._on_enqueue(req),
                                   kind="message",
                                   detail=f"ENQUEUE {initiator}->{SCHEDULER_NODE}")
        return req.request_id

    def _on_enqueue(self, req: Request) -> None:
        self.queue.append(req)
        self.trace(SCHEDULER_NODE, "-", "recv:ENQUEUE", "-",
                   f"req{req.request_id} depth={len(self.queue)}")
        self._dispatch()

    def _dispatch(self) -> None:
        if self.active is not None or not self.queue:
            return
        req = self.queue.popleft()
        self.active = req
        req.t_min = self.engine.now() + self.prop_ns + T_MIN_GUARD_NS
        self.trace(SCHEDULER_NODE, "-", "send:GRANT", "-",
                   f"req{req.request_id} t_min={req.t_min}")
        # Grant travels to both endpoints; the initiator side starts the span.
        self.engine.schedule_after(self.prop_ns, lambda: self._on_grant(req),
                                   kind="message",
                                   detail=f"GRANT {SCHEDULER_NODE}->{req.initiator}")

    def _on_grant(self, req: Request) -> None:
        self.trace(req.initiator, "-", "recv:GRANT", "-", f"req{req.request_id}")
        self.start_generation(req, req.t_min)

    def _generation_done(self, req: Request) -> None:
        self.trace(req.initiator, "-", "send:COMPLETE", "-", f"req{req.request_id}")
        self.engine.schedule_after(self.prop_ns, lambda: self._on_complete(req),
                                   kind="message",
                                   detail=f"COMPLETE {req.initiator}->{SCHEDULER_NODE}")

    def _on_complete(self, req: Request) -> None:
        if self.active is not req:
            raise InvariantViolation(
                f"COMPLETE for request {req.request_id} but active is "
                f"{self.active.request_id if self.active else None}")
        self.active = None
        self.trace(SCHEDULER_NODE, "-", "recv:COMPLETE", "-", f"req{req.request_id}")
        self._dispatch()
