"""Measurement: throughput bins, RTT series, drops, and CSV export.

Throughput is payload bytes counted at the receiver into fixed 100 ms
bins, so the bins always sum to the total delivered payload.  RTT is
sampled once per new-data ack at the sender.  Utilization compares the
delivered payload against the capacity the rate schedule offered, and a
megabyte is 10^6 bytes throughout.
"""
from __future__ import annotations

import os
from array import array
from dataclasses import dataclass, field
from math import ceil

from .core import NS_PER_MS, NS_PER_S
from .link import RateSchedule

BIN_NS = 100 * NS_PER_MS


@dataclass
class RunSummary:
    utilization_pct: float
    mean_rtt_ms: float
    total_bytes: int
    drops: dict[str, int]
    packets_sent: int
    packets_delivered: int
    per_flow_bytes: dict[int, int] = field(default_factory=dict)
    per_flow_mean_rtt_ms: dict[int, float] = field(default_factory=dict)

    @property
    def total_mb(self) -> float:
        return self.total_bytes / 1e6


class MetricsCollector:
    def __init__(self, duration_ns: int, schedule: RateSchedule):
        self.duration_ns = duration_ns
        self.schedule = schedule
        self.n_bins = max(1, ceil(duration_ns / BIN_NS))
        self.bins: dict[int, array] = {}
        self.rtt_t: dict[int, array] = {}
        self.rtt_v: dict[int, array] = {}
        self.sent: dict[int, int] = {}
        self.delivered_bytes: dict[int, int] = {}
        self.delivered_pkts = 0

    def add_flow(self, flow_id: int) -> None:
        self.bins[flow_id] = array("q", bytes(8 * self.n_bins))
        self.rtt_t[flow_id] = array("q")
        self.rtt_v[flow_id] = array("q")
        self.sent[flow_id] = 0
        self.delivered_bytes[flow_id] = 0

    def on_send(self, flow_id: int) -> None:
        self.sent[flow_id] += 1

    def on_delivered(self, flow_id: int, payload_bytes: int, now: int) -> None:
        idx = now // BIN_NS
        if idx >= self.n_bins:
            idx = self.n_bins - 1
        self.bins[flow_id][idx] += payload_bytes
        self.delivered_bytes[flow_id] += payload_bytes
        self.delivered_pkts += 1

    def on_rtt_sample(self, flow_id: int, now: int, rtt_ns: int) -> None:
        self.rtt_t[flow_id].append(now)
        self.rtt_v[flow_id].append(rtt_ns)

    # ---- derived figures -------------------------------------------------

    def total_delivered(self) -> int:
        return sum(self.delivered_bytes.values())

    def utilization_pct(self) -> float:
        offered = self.schedule.integral_bits(0, self.duration_ns)
        return self.total_delivered() * 8 / offered * 100.0

    def delivered_between(self, t0_ns: int, t1_ns: int) -> int:
        """Payload delivered into bins starting within [t0, t1)."""
        lo = t0_ns // BIN_NS
        hi = min(ceil(t1_ns / BIN_NS), self.n_bins)
        return sum(sum(b[lo:hi]) for b in self.bins.values())

    def utilization_between_pct(self, t0_ns: int, t1_ns: int) -> float:
        offered = self.schedule.integral_bits(t0_ns, t1_ns)
        return self.delivered_between(t0_ns, t1_ns) * 8 / offered * 100.0

    def mean_rtt_ms(self, flow_id: int | None = None) -> float:
        if flow_id is None:
            total = sum(sum(v) for v in self.rtt_v.values())
            n = sum(len(v) for v in self.rtt_v.values())
        else:
            total = sum(self.rtt_v[flow_id])
            n = len(self.rtt_v[flow_id])
        if n == 0:
            raise ValueError("no rtt samples to average")
        return total / n / NS_PER_MS

    def rtt_percentile_ms(self, pct: float, t0_ns: int = 0,
                          t1_ns: int | None = None) -> float:
        """Nearest-rank percentile over all samples taken in [t0, t1)."""
        if t1_ns is None:
            t1_ns = self.duration_ns
        vals: list[int] = []
        for fid, times in self.rtt_t.items():
            v = self.rtt_v[fid]
            vals.extend(v[i] for i, t in enumerate(times) if t0_ns <= t < t1_ns)
        if not vals:
            raise ValueError("no rtt samples in window")
        vals.sort()
        rank = max(1, ceil(pct / 100.0 * len(vals)))
        return vals[rank - 1] / NS_PER_MS

    def summary(self, drop_counts: dict[str, int]) -> RunSummary:
        per_flow_rtt = {}
        for fid, v in self.rtt_v.items():
            if len(v):
                per_flow_rtt[fid] = sum(v) / len(v) / NS_PER_MS
        return RunSummary(
            utilization_pct=self.utilization_pct(),
            mean_rtt_ms=self.mean_rtt_ms(),
            total_bytes=self.total_delivered(),
            drops=dict(drop_counts),
            packets_sent=sum(self.sent.values()),
            packets_delivered=self.delivered_pkts,
            per_flow_bytes=dict(self.delivered_bytes),
            per_flow_mean_rtt_ms=per_flow_rtt,
        )


def export_csvs(out_dir: str, collector: MetricsCollector, summary: RunSummary,
                scheduler=None) -> None:
    """Write throughput.csv, rtt.csv, buffer.csv, and summary.txt."""
    os.makedirs(out_dir, exist_ok=True)

    rows = ["t_s,flow,bytes\n"]
    for fid in sorted(collector.bins):
        b = collector.bins[fid]
        rows.extend(f"{i * 0.1:.1f},{fid},{b[i]}\n" for i in range(collector.n_bins))
    with open(os.path.join(out_dir, "throughput.csv"), "w") as f:
        f.write("".join(rows))

    rows = ["t_s,flow,rtt_ms\n"]
    for fid in sorted(collector.rtt_t):
        times = collector.rtt_t[fid]
        vals = collector.rtt_v[fid]
        rows.extend(
            f"{times[i] / NS_PER_S:.6f},{fid},{vals[i] / NS_PER_MS:.3f}\n"
            for i in range(len(times)))
    with open(os.path.join(out_dir, "rtt.csv"), "w") as f:
        f.write("".join(rows))

    rows = ["t_s,flow,buffer_pkts,occupancy\n"]
    flows = getattr(scheduler, "flows", None)
    if flows:
        for fid in sorted(flows):
            rows.extend(
                f"{t / NS_PER_S:.6f},{fid},{buf},{occ}\n"
                for t, buf, occ in flows[fid].buffer_log)
    with open(os.path.join(out_dir, "buffer.csv"), "w") as f:
        f.write("".join(rows))

    drops = summary.drops
    lines = [
        f"utilization_pct = {summary.utilization_pct:.3f}\n",
        f"mean_rtt_ms = {summary.mean_rtt_ms:.3f}\n",
        f"total_mb = {summary.total_mb:.3f}\n",
        f"drops_tail = {drops.get('tail', 0)}\n",
        f"drops_codel = {drops.get('codel', 0)}\n",
        f"drops_cocoa = {drops.get('cocoa-shrink', 0)}\n",
    ]
    with open(os.path.join(out_dir, "summary.txt"), "w") as f:
        f.write("".join(lines))
