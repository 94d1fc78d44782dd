"""Per-flow FIFO fair queuing with tail drop."""
from __future__ import annotations

from ..link import Packet
from .base import (DEFAULT_FLOW_LIMIT, DEFAULT_QUANTUM, DROP_TAIL,
                   EnqueueOutcome, FlowScheduler, FqFlowQueue)


class FqScheduler(FlowScheduler):
    def __init__(self, flow_limit: int = DEFAULT_FLOW_LIMIT, quantum: int = DEFAULT_QUANTUM):
        super().__init__(quantum)
        self.flow_limit = flow_limit
        self.queues: dict[int, FqFlowQueue] = {}

    def _queue(self, flow_id: int) -> FqFlowQueue:
        q = self.queues.get(flow_id)
        if q is None:
            q = FqFlowQueue(self.flow_limit)
            self.queues[flow_id] = q
        return q

    def enqueue(self, pkt: Packet, now: int) -> EnqueueOutcome:
        q = self._queue(pkt.flow_id)
        was_empty = not q.q
        out = q.enqueue(pkt, now)
        if out.accepted:
            if was_empty:
                self.drr.on_backlog(pkt.flow_id)
        else:
            self._record_drop(DROP_TAIL)
        return out

    def occupancy(self, flow_id: int) -> int:
        q = self.queues.get(flow_id)
        return len(q) if q else 0

    def backlog(self) -> int:
        return sum(len(q) for q in self.queues.values())

    def _head_size(self, flow_id: int):
        q = self.queues[flow_id].q
        return q[0].size_bytes if q else None

    def _pop_flow(self, flow_id: int, now: int):
        q = self.queues[flow_id].q
        return q.popleft() if q else None
