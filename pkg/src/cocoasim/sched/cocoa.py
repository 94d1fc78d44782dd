"""cocoa: fair queuing with a per-flow buffer that adapts to the flow.

Each flow gets a FIFO whose packet limit moves instead of staying fixed.
The discipline watches loss-free intervals, the spans between its own
drop decisions:

* If the buffer overflows even though the flow left the queue empty for
  part of the current interval, the buffer was too small for the flow's
  burst pattern.  It grows by the traffic the idle time could have
  carried, at most doubling per step, and the packet is accepted.
* After a drop decision a guard interval opens.  A guard interval is a
  hold-off sized by the longest interval observed so far times a safety
  multiplier (capped at one second): within it, overflow only closes
  intervals and drops.  This keeps one congestion-control backoff cycle
  from being misread as a standing queue.
* At the first overflow past the guard hold-off the buffer shrinks by
  the standing queue, the minimum occupancy seen during the longest
  interval of that guard window, and newest packets are evicted to fit.

Occupancy never exceeds the buffer size, and the buffer never goes
below the floor.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..core import NS_PER_MS, NS_PER_S
from ..link import Packet
from .base import (DEFAULT_QUANTUM, DROP_SHRINK, DROP_TAIL, EnqueueOutcome,
                   FlowScheduler)


@dataclass(slots=True)
class CocoaParams:
    multiplier: float = 1.25
    max_increase_factor: float = 2.0
    max_guard_interval_ns: int = NS_PER_S
    initial_buffer_pkts: int = 100
    buffer_floor_pkts: int = 1


@dataclass(slots=True)
class IntervalStats:
    """Bookkeeping for the currently open loss-free interval."""

    start: int
    packets_transmitted: int = 0
    min_occupancy: int = 0
    idle_time: int = 0
    empty_since: int | None = None
    enlarged: bool = False


class CocoaFlowState:
    """One flow's queue, buffer size, and interval history."""

    __slots__ = ("buffer_size", "queue", "cur", "is_first_interval",
                 "guard_start", "guard_min_end", "longest_ns",
                 "longest_min_occupancy", "buffer_log", "enlarge_log",
                 "shrink_log", "guard_log", "closes", "drop_decisions")

    def __init__(self, now: int, params: CocoaParams):
        self.buffer_size = params.initial_buffer_pkts
        self.queue: deque[Packet] = deque()
        self.cur = IntervalStats(start=now, empty_since=now)
        self.is_first_interval = True
        self.guard_start = now
        self.guard_min_end = now
        self.longest_ns = 0
        self.longest_min_occupancy = 0
        # (time, buffer_size, occupancy) on creation and every resize
        self.buffer_log: list[tuple[int, int, int]] = [(now, self.buffer_size, 0)]
        # (time, old, new, interval_start) per enlargement
        self.enlarge_log: list[tuple[int, int, int, int]] = []
        # (time, old, new, guard_min_end) per shrink
        self.shrink_log: list[tuple[int, int, int, int]] = []
        # (guard_start, guard_min_end) per guard interval
        self.guard_log: list[tuple[int, int]] = []
        self.closes = 0
        self.drop_decisions = 0

    def occupancy(self) -> int:
        return len(self.queue)

    def compute_increase(self, now: int) -> int:
        """Packets the flow could have sent during this interval's idle
        time at its active-time rate.  Zero when the interval is too young
        to give a meaningful rate."""
        cur = self.cur
        idle = cur.idle_time
        active = (now - cur.start) - idle
        if active < NS_PER_MS:
            return 0
        return int(round(cur.packets_transmitted * idle / active))

    def close_interval(self, now: int) -> None:
        """End the open interval, letting it compete for longest interval,
        and start a fresh one."""
        cur = self.cur
        duration = now - cur.start
        if duration > self.longest_ns:
            self.longest_ns = duration
            self.longest_min_occupancy = cur.min_occupancy
        occ = len(self.queue)
        self.cur = IntervalStats(start=now, min_occupancy=occ,
                                 empty_since=now if occ == 0 else None)
        self.is_first_interval = False
        self.closes += 1

    def start_guard(self, params: CocoaParams, now: int) -> None:
        """Open a guard interval sized from the longest interval of the
        one that just ended, then reset the longest-interval trackers."""
        hold = min(int(params.multiplier * self.longest_ns),
                   params.max_guard_interval_ns)
        self.guard_start = now
        self.guard_min_end = now + hold
        self.guard_log.append((now, self.guard_min_end))
        self.longest_ns = 0
        self.longest_min_occupancy = 0

    def _accept(self, pkt: Packet, now: int) -> EnqueueOutcome:
        cur = self.cur
        if cur.empty_since is not None:
            cur.idle_time += now - cur.empty_since
            cur.empty_since = None
        pkt.enqueue_time = now
        self.queue.append(pkt)
        occ = len(self.queue)
        if occ < cur.min_occupancy:
            cur.min_occupancy = occ
        return EnqueueOutcome(True)

    def enqueue(self, pkt: Packet, params: CocoaParams, now: int) -> EnqueueOutcome:
        if len(self.queue) < self.buffer_size:
            return self._accept(pkt, now)

        cur = self.cur
        if cur.idle_time > 0 and not cur.enlarged and not self.is_first_interval:
            increase = self.compute_increase(now)
            cap = int(self.buffer_size * params.max_increase_factor)
            new_size = min(self.buffer_size + increase, cap)
            if new_size > self.buffer_size:
                old = self.buffer_size
                self.buffer_size = new_size
                cur.enlarged = True
                out = self._accept(pkt, now)
                self.enlarge_log.append((now, old, new_size, cur.start))
                self.buffer_log.append((now, new_size, len(self.queue)))
                return out
            # growth rounded away to nothing: fall through to the drop
            # branches so occupancy can never exceed the buffer

        if cur.enlarged or self.is_first_interval:
            self.close_interval(now)
            self.start_guard(params, now)
            self.drop_decisions += 1
            return EnqueueOutcome(False, [pkt])

        if now >= self.guard_min_end:
            # the still-open interval competes for longest before we read it
            self.close_interval(now)
            dropped = [pkt]
            shrink = min(self.longest_min_occupancy,
                         self.buffer_size - params.buffer_floor_pkts)
            if shrink > 0:
                old = self.buffer_size
                self.buffer_size = old - shrink
                while len(self.queue) > self.buffer_size:
                    dropped.append(self.queue.pop())
                occ = len(self.queue)
                if occ < self.cur.min_occupancy:
                    self.cur.min_occupancy = occ
                self.shrink_log.append((now, old, self.buffer_size, self.guard_min_end))
                self.buffer_log.append((now, self.buffer_size, occ))
            self.start_guard(params, now)
            self.drop_decisions += 1
            return EnqueueOutcome(False, dropped)

        self.close_interval(now)
        self.drop_decisions += 1
        return EnqueueOutcome(False, [pkt])

    def dequeue(self, now: int) -> Packet | None:
        q = self.queue
        if not q:
            return None
        pkt = q.popleft()
        cur = self.cur
        cur.packets_transmitted += 1
        occ = len(q)
        if occ < cur.min_occupancy:
            cur.min_occupancy = occ
        if occ == 0:
            cur.empty_since = now
        return pkt


class CocoaScheduler(FlowScheduler):
    def __init__(self, params: CocoaParams | None = None, quantum: int = DEFAULT_QUANTUM):
        super().__init__(quantum)
        self.params = params or CocoaParams()
        self.flows: dict[int, CocoaFlowState] = {}

    def flow(self, flow_id: int, now: int = 0) -> CocoaFlowState:
        st = self.flows.get(flow_id)
        if st is None:
            st = CocoaFlowState(now, self.params)
            self.flows[flow_id] = st
        return st

    def enqueue(self, pkt: Packet, now: int) -> EnqueueOutcome:
        st = self.flow(pkt.flow_id, now)
        was_empty = not st.queue
        out = st.enqueue(pkt, self.params, now)
        if out.accepted:
            if was_empty:
                self.drr.on_backlog(pkt.flow_id)
        else:
            self._record_drop(DROP_TAIL)
            if len(out.dropped) > 1:
                self._record_drop(DROP_SHRINK, len(out.dropped) - 1)
        return out

    def occupancy(self, flow_id: int) -> int:
        st = self.flows.get(flow_id)
        return len(st.queue) if st else 0

    def backlog(self) -> int:
        return sum(len(st.queue) for st in self.flows.values())

    def _head_size(self, flow_id: int):
        q = self.flows[flow_id].queue
        return q[0].size_bytes if q else None

    def _pop_flow(self, flow_id: int, now: int):
        return self.flows[flow_id].dequeue(now)
