"""Network model: packets, link rate schedule, and the bottleneck.

The forward path is scheduler -> serializer -> fixed propagation delay.
The return path carries acks with the same propagation delay and no
queuing.  A rate step takes effect for serializations that start at or
after its start time; a packet already on the wire keeps the completion
time computed when its serialization began.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import NS_PER_S, Engine, SimulationError

MTU_BYTES = 1500
HEADER_BYTES = 40
MSS_BYTES = MTU_BYTES - HEADER_BYTES
ACK_BYTES = HEADER_BYTES


@dataclass(slots=True)
class Packet:
    id: int
    flow_id: int
    size_bytes: int
    seq_start: int = 0
    seq_end: int = 0
    is_ack: bool = False
    ack_seq: int = 0
    # on acks: end of the first missing run, == ack_seq when the
    # receiver holds nothing beyond the cumulative ack
    gap_end: int = 0
    ts_echo: int = 0
    enqueue_time: int = 0


class RateSchedule:
    """Piecewise-constant link rate: a sorted list of (start_ns, rate_bps)."""

    def __init__(self, steps: list[tuple[int, int]]):
        if not steps:
            raise ValueError("rate schedule needs at least one step")
        if steps[0][0] != 0:
            raise ValueError("first rate step must start at t=0")
        last = -1
        for start, rate in steps:
            if start <= last:
                raise ValueError("rate steps must be strictly increasing in time")
            if rate <= 0:
                raise ValueError(f"rate must be positive, got {rate}")
            last = start
        self.steps = list(steps)

    def rate_at(self, t: int) -> int:
        """Rate in bits/s at time t; a step applies from its start onward."""
        rate = self.steps[0][1]
        for start, r in self.steps:
            if start <= t:
                rate = r
            else:
                break
        return rate

    def integral_bits(self, t0: int, t1: int) -> float:
        """Capacity in bits offered over [t0, t1)."""
        if t1 <= t0:
            return 0.0
        total = 0.0
        steps = self.steps
        for i, (start, rate) in enumerate(steps):
            seg_end = steps[i + 1][0] if i + 1 < len(steps) else t1
            lo = max(start, t0)
            hi = min(seg_end, t1)
            if hi > lo:
                total += rate * (hi - lo) / NS_PER_S
        return total


class BottleneckLink:
    """Rate-limited serializer fed by a scheduler, then a propagation leg.

    Every data packet offered to the link is either delivered to the
    receive callback or dropped by the scheduler; the link itself never
    loses packets.
    """

    def __init__(self, engine: Engine, scheduler, schedule: RateSchedule,
                 one_way_delay_ns: int, deliver_fn):
        self.engine = engine
        self.scheduler = scheduler
        self.schedule = schedule
        self.one_way_delay_ns = one_way_delay_ns
        self.deliver_fn = deliver_fn
        self.busy = False
        self.offered = 0
        self.delivered = 0
        self.in_propagation = 0

    def on_packet(self, pkt: Packet, now: int) -> None:
        self.offered += 1
        self.scheduler.enqueue(pkt, now)
        if not self.busy:
            self._start_next(now)

    def _start_next(self, now: int) -> None:
        pkt = self.scheduler.dequeue(now)
        if pkt is None:
            self.busy = False
            return
        self.busy = True
        rate = self.schedule.rate_at(now)
        tx_ns = (pkt.size_bytes * 8 * NS_PER_S) // rate
        self.engine.call_at(now + tx_ns, self._transmit_complete, pkt,
                            "transmit-complete", pkt.flow_id)

    def _transmit_complete(self, pkt: Packet, now: int) -> None:
        self.in_propagation += 1
        self.engine.call_at(now + self.one_way_delay_ns, self._deliver, pkt,
                            "delivery", pkt.flow_id)
        self._start_next(now)

    def _deliver(self, pkt: Packet, now: int) -> None:
        self.in_propagation -= 1
        self.delivered += 1
        self.deliver_fn(pkt, now)


class AckPath:
    """Lossless delay-only return path from receiver to sender."""

    def __init__(self, engine: Engine, one_way_delay_ns: int):
        self.engine = engine
        self.one_way_delay_ns = one_way_delay_ns
        self._sinks: dict[int, object] = {}

    def register(self, flow_id: int, sender) -> None:
        self._sinks[flow_id] = sender

    def send(self, ack: Packet, now: int) -> None:
        sender = self._sinks.get(ack.flow_id)
        if sender is None:
            raise SimulationError(f"ack for unknown flow {ack.flow_id}")
        self.engine.call_at(now + self.one_way_delay_ns, sender.on_ack, ack,
                            "delivery", ack.flow_id)
