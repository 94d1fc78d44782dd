"""Discrete-event simulation core.

Simulated time is an integer nanosecond count.  Events fire in
(fire_time, seq) order, where seq is a monotone insertion counter, so
runs are fully reproducible: two engines fed the same inputs dispatch
the same events in the same order.
"""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Any, Callable

NS_PER_S = 1_000_000_000
NS_PER_MS = 1_000_000
NS_PER_US = 1_000

EVENT_KINDS = (
    "packet-arrival",
    "transmit-complete",
    "delivery",
    "timer",
    "rate-change",
    "flow-start",
)


class SimulationError(Exception):
    """Fatal logic error inside a run (for example scheduling into the past)."""


def ns_from_s(seconds: float) -> int:
    return int(round(seconds * NS_PER_S))


def s_from_ns(t: int) -> float:
    return t / NS_PER_S


@dataclass(slots=True)
class Event:
    """A scheduled callback.  seq is assigned by the engine at insertion."""

    fire_time: int
    kind: str
    fn: Callable[..., None]
    flow_id: int = -1
    arg: Any = None
    seq: int = field(default=-1)


class Engine:
    """Event queue, clock, and the per-run random source.

    The RNG is the only source of randomness in a run; everything else
    is a pure function of the scenario, so one seed pins one trajectory.
    """

    def __init__(self, seed: int = 1, log_events: bool = False):
        self.seed = seed
        self.rng = random.Random(seed)
        self.now = 0
        self._heap: list[tuple] = []
        self._seq = 0
        self._pkt_id = 0
        self.event_log: list[tuple[int, str, int]] | None = [] if log_events else None

    def next_packet_id(self) -> int:
        self._pkt_id += 1
        return self._pkt_id

    def schedule(self, event: Event) -> Event:
        """Queue an event.  Scheduling into the past aborts the run."""
        self.call_at(event.fire_time, event.fn, event.arg, event.kind, event.flow_id)
        event.seq = self._seq
        return event

    def call_at(self, fire_time: int, fn, arg=None, kind: str = "timer", flow_id: int = -1) -> None:
        """Fast-path schedule used by the hot loop; fn(arg, now) at fire_time."""
        if fire_time < self.now:
            raise SimulationError(
                f"event scheduled in the past: {fire_time} < now {self.now}"
            )
        self._seq += 1
        heapq.heappush(self._heap, (fire_time, self._seq, kind, flow_id, fn, arg))

    def run_until(self, end: int) -> None:
        """Dispatch every event with fire_time <= end, then set the clock to end."""
        heap = self._heap
        pop = heapq.heappop
        log = self.event_log
        while heap and heap[0][0] <= end:
            t, _seq, kind, flow_id, fn, arg = pop(heap)
            self.now = t
            if log is not None:
                log.append((t, kind, flow_id))
            fn(arg, t)
        self.now = end

    def pending(self) -> int:
        return len(self._heap)
