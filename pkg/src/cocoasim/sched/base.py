"""Scheduler plumbing shared by the queuing disciplines.

All disciplines keep one queue per flow and serve flows with deficit
round robin.  A flow sits in the active ring exactly while it has
backlog; a flow's deficit is reset when it leaves the ring.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..link import MTU_BYTES, Packet

DEFAULT_QUANTUM = MTU_BYTES
DEFAULT_FLOW_LIMIT = 100

DROP_TAIL = "tail"
DROP_CODEL = "codel"
DROP_SHRINK = "cocoa-shrink"


@dataclass(slots=True)
class EnqueueOutcome:
    """Result of offering one packet.  When not accepted, dropped[0] is the
    offered packet and any further entries are queued packets evicted to
    honor a reduced buffer."""

    accepted: bool
    dropped: list[Packet] = field(default_factory=list)


class FqFlowQueue:
    """Tail-drop FIFO with a fixed packet limit."""

    __slots__ = ("q", "limit")

    def __init__(self, limit: int = DEFAULT_FLOW_LIMIT):
        self.q: deque[Packet] = deque()
        self.limit = limit

    def __len__(self) -> int:
        return len(self.q)

    def enqueue(self, pkt: Packet, now: int) -> EnqueueOutcome:
        if len(self.q) >= self.limit:
            return EnqueueOutcome(False, [pkt])
        pkt.enqueue_time = now
        self.q.append(pkt)
        return EnqueueOutcome(True)


class DrrState:
    """Deficit round robin over the flows that currently have backlog."""

    def __init__(self, quantum: int = DEFAULT_QUANTUM):
        self.quantum = quantum
        self.ring: deque[int] = deque()
        self.deficit: dict[int, int] = {}
        self._turn_open = False

    def on_backlog(self, flow_id: int) -> None:
        """Register a flow whose queue just became non-empty."""
        self.ring.append(flow_id)
        self.deficit.setdefault(flow_id, 0)

    def dequeue(self, sched, now: int) -> tuple[int, Packet] | None:
        """Pick the next (flow, packet) to serve, or None when all queues
        are empty.  sched supplies per-discipline head inspection and pop."""
        ring = self.ring
        deficit = self.deficit
        while ring:
            fid = ring[0]
            head = sched._head_size(fid)
            if head is None:
                ring.popleft()
                deficit[fid] = 0
                self._turn_open = False
                continue
            if not self._turn_open:
                deficit[fid] += self.quantum
                self._turn_open = True
            if deficit[fid] < head:
                ring.rotate(-1)
                self._turn_open = False
                continue
            pkt = sched._pop_flow(fid, now)
            if pkt is None:
                ring.popleft()
                deficit[fid] = 0
                self._turn_open = False
                continue
            deficit[fid] -= pkt.size_bytes
            if sched._head_size(fid) is None:
                ring.popleft()
                deficit[fid] = 0
                self._turn_open = False
            return fid, pkt
        return None


class FlowScheduler:
    """Base for the concrete disciplines: DRR service plus drop accounting."""

    def __init__(self, quantum: int = DEFAULT_QUANTUM):
        self.drr = DrrState(quantum)
        self.drop_counts: dict[str, int] = {DROP_TAIL: 0, DROP_CODEL: 0, DROP_SHRINK: 0}
        self.dropped_total = 0

    def _record_drop(self, cause: str, n: int = 1) -> None:
        self.drop_counts[cause] += n
        self.dropped_total += n

    def enqueue(self, pkt: Packet, now: int) -> EnqueueOutcome:
        raise NotImplementedError

    def dequeue(self, now: int):
        got = self.drr.dequeue(self, now)
        return got[1] if got else None

    def occupancy(self, flow_id: int) -> int:
        raise NotImplementedError

    def backlog(self) -> int:
        raise NotImplementedError

    def _head_size(self, flow_id: int):
        raise NotImplementedError

    def _pop_flow(self, flow_id: int, now: int):
        raise NotImplementedError
