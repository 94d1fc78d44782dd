"""fq_codel: per-flow FIFOs managed by the CoDel dequeue-time AQM.

CoDel watches packet sojourn time at dequeue.  Once sojourn has stayed
at or above target for one interval, it head-drops and then keeps
dropping with spacing interval/sqrt(count) until sojourn falls back
below target.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

from ..core import NS_PER_MS
from ..link import Packet
from .base import DEFAULT_FLOW_LIMIT, DEFAULT_QUANTUM, DROP_CODEL
from .fq import FqScheduler

CODEL_TARGET_NS = 5 * NS_PER_MS
CODEL_INTERVAL_NS = 100 * NS_PER_MS


@dataclass(slots=True)
class CodelState:
    first_above_time: int = 0
    drop_next: int = 0
    count: int = 0
    dropping: bool = False


def control_law(state: CodelState, interval_ns: int) -> int:
    return state.drop_next + int(interval_ns / sqrt(state.count))


class FqCodelScheduler(FqScheduler):
    def __init__(self, flow_limit: int = DEFAULT_FLOW_LIMIT, quantum: int = DEFAULT_QUANTUM,
                 target_ns: int = CODEL_TARGET_NS, interval_ns: int = CODEL_INTERVAL_NS):
        super().__init__(flow_limit, quantum)
        self.target_ns = target_ns
        self.interval_ns = interval_ns
        self.codel: dict[int, CodelState] = {}

    def _codel_state(self, flow_id: int) -> CodelState:
        st = self.codel.get(flow_id)
        if st is None:
            st = CodelState()
            self.codel[flow_id] = st
        return st

    def _do_dequeue(self, q, st: CodelState, now: int):
        """Pop the head and judge it: (packet, ok_to_drop)."""
        if not q:
            st.first_above_time = 0
            return None, False
        pkt = q.popleft()
        sojourn = now - pkt.enqueue_time
        if sojourn < self.target_ns or len(q) == 0:
            st.first_above_time = 0
            return pkt, False
        if st.first_above_time == 0:
            st.first_above_time = now + self.interval_ns
            return pkt, False
        return pkt, now >= st.first_above_time

    def _pop_flow(self, flow_id: int, now: int):
        q = self.queues[flow_id].q
        st = self._codel_state(flow_id)
        pkt, ok = self._do_dequeue(q, st, now)
        if st.dropping:
            if not ok:
                st.dropping = False
            else:
                while st.dropping and now >= st.drop_next:
                    self._record_drop(DROP_CODEL)
                    st.count += 1
                    pkt, ok = self._do_dequeue(q, st, now)
                    if not ok:
                        st.dropping = False
                    else:
                        st.drop_next = control_law(st, self.interval_ns)
        elif ok:
            self._record_drop(DROP_CODEL)
            pkt, ok = self._do_dequeue(q, st, now)
            st.dropping = True
            if st.count > 2 and now - st.drop_next < 8 * self.interval_ns:
                st.count -= 2
            else:
                st.count = 1
            st.drop_next = now + int(self.interval_ns / sqrt(st.count))
        return pkt
