"""Scenario descriptions, canned presets, and run orchestration.

A scenario file is flat ``key = value`` text.  ``rate_step`` and
``flow`` may repeat; everything else appears at most once:

    qdisc = cocoa
    rate_step = 0 20e6
    rate_step = 30 10e6
    flow = cubic
    flow = reno 2.5
    duration_s = 60
    one_way_delay_ms = 5
    seed = 1

Optional keys: seed, flow_limit, quantum, cocoa_multiplier,
cocoa_max_increase_factor, cocoa_max_guard_s, cocoa_initial_buffer_pkts,
cocoa_buffer_floor_pkts.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from .core import NS_PER_MS, Engine, ns_from_s
from .endpoints import Receiver, Sender
from .link import AckPath, BottleneckLink, RateSchedule
from .metrics import MetricsCollector, RunSummary, export_csvs
from .sched import CocoaParams, CocoaScheduler, FqCodelScheduler, FqScheduler

QDISCS = ("fq", "fq_codel", "cocoa")
CCAS = ("reno", "cubic", "bbr")


@dataclass
class FlowSpec:
    cca: str
    start_s: float = 0.0


@dataclass
class Scenario:
    qdisc: str
    rate_steps: list[tuple[float, float]]
    flows: list[FlowSpec]
    duration_s: float
    one_way_delay_ms: float
    seed: int = 1
    flow_limit: int = 100
    quantum: int = 1500
    cocoa: CocoaParams = field(default_factory=CocoaParams)
    name: str = "scenario"


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    qdisc = None
    steps: list[tuple[float, float]] = []
    flows: list[FlowSpec] = []
    scalars: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        try:
            if key == "qdisc":
                if val not in QDISCS:
                    raise ValueError(f"unknown qdisc {val!r} (expected one of {QDISCS})")
                qdisc = val
            elif key == "rate_step":
                t_s, rate = val.split()
                steps.append((float(t_s), float(rate)))
            elif key == "flow":
                parts = val.split()
                cca = parts[0]
                if cca not in CCAS:
                    raise ValueError(f"unknown flow type {cca!r} (expected one of {CCAS})")
                start = float(parts[1]) if len(parts) > 1 else 0.0
                flows.append(FlowSpec(cca, start))
            elif key in ("duration_s", "one_way_delay_ms", "seed", "flow_limit",
                         "quantum", "cocoa_multiplier", "cocoa_max_increase_factor",
                         "cocoa_max_guard_s", "cocoa_initial_buffer_pkts",
                         "cocoa_buffer_floor_pkts"):
                scalars[key] = float(val)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
    missing = []
    if qdisc is None:
        missing.append("qdisc")
    if not steps:
        missing.append("rate_step")
    if not flows:
        missing.append("flow")
    for req in ("duration_s", "one_way_delay_ms"):
        if req not in scalars:
            missing.append(req)
    if missing:
        raise ValueError(f"scenario missing required keys: {', '.join(missing)}")
    cocoa = CocoaParams(
        multiplier=scalars.get("cocoa_multiplier", 1.25),
        max_increase_factor=scalars.get("cocoa_max_increase_factor", 2.0),
        max_guard_interval_ns=ns_from_s(scalars.get("cocoa_max_guard_s", 1.0)),
        initial_buffer_pkts=int(scalars.get("cocoa_initial_buffer_pkts", 100)),
        buffer_floor_pkts=int(scalars.get("cocoa_buffer_floor_pkts", 1)),
    )
    return Scenario(
        qdisc=qdisc,
        rate_steps=steps,
        flows=flows,
        duration_s=scalars["duration_s"],
        one_way_delay_ms=scalars["one_way_delay_ms"],
        seed=int(scalars.get("seed", 1)),
        flow_limit=int(scalars.get("flow_limit", 100)),
        quantum=int(scalars.get("quantum", 1500)),
        cocoa=cocoa,
        name=name,
    )


def load_scenario(path: str) -> Scenario:
    with open(path) as f:
        text = f.read()
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_scenario(text, name=name)


# ---- presets ---------------------------------------------------------------

def _preset_text(qdisc: str, steps: str, cca: str, duration_s: int,
                 owd_ms: float) -> str:
    lines = [f"qdisc = {qdisc}"]
    lines += [f"rate_step = {s}" for s in steps.split(";")]
    lines += [f"flow = {cca}", f"duration_s = {duration_s}",
              f"one_way_delay_ms = {owd_ms}"]
    return "\n".join(lines)


PRESETS: dict[str, str] = {
    "fig4_fq": _preset_text("fq", "0 20e6;30 10e6", "cubic", 60, 5),
    "fig4_cocoa": _preset_text("cocoa", "0 20e6;30 10e6", "cubic", 60, 5),
    "fig6_double": _preset_text("cocoa", "0 20e6;30 40e6", "cubic", 60, 5),
    "fig5_fqcodel": _preset_text("fq_codel", "0 100e6", "cubic", 240, 50),
    "fig5_cocoa": _preset_text("cocoa", "0 100e6", "cubic", 240, 50),
    "bbr": _preset_text("cocoa", "0 50e6;30 25e6", "bbr", 60, 5),
}
for _cca in ("cubic", "reno"):
    for _q in ("fq", "fq_codel", "cocoa"):
        PRESETS[f"table1_{_cca}_{_q}"] = _preset_text(_q, "0 100e6", _cca, 240, 25)

PRESET_GROUPS = {
    "table1": [n for n in PRESETS if n.startswith("table1_")],
}


def preset_scenario(name: str) -> Scenario:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}")
    return parse_scenario(PRESETS[name], name=name)


def resolve_preset_names(name: str) -> list[str]:
    if name in PRESET_GROUPS:
        return list(PRESET_GROUPS[name])
    if name in PRESETS:
        return [name]
    raise ValueError(f"unknown preset {name!r}")


# ---- simulation ------------------------------------------------------------

@dataclass
class SimResult:
    scenario: Scenario
    summary: RunSummary
    collector: MetricsCollector
    scheduler: object
    senders: list[Sender]
    receivers: list[Receiver]
    engine: Engine


def make_scheduler(scn: Scenario):
    if scn.qdisc == "fq":
        return FqScheduler(flow_limit=scn.flow_limit, quantum=scn.quantum)
    if scn.qdisc == "fq_codel":
        return FqCodelScheduler(flow_limit=scn.flow_limit, quantum=scn.quantum)
    if scn.qdisc == "cocoa":
        return CocoaScheduler(params=scn.cocoa, quantum=scn.quantum)
    raise ValueError(f"unknown qdisc {scn.qdisc!r}")


def simulate(scn: Scenario, seed: int | None = None) -> SimResult:
    if seed is not None and seed != scn.seed:
        scn = replace(scn, seed=seed)
    engine = Engine(seed=scn.seed)
    schedule = RateSchedule([(ns_from_s(t), int(r)) for t, r in scn.rate_steps])
    scheduler = make_scheduler(scn)
    duration_ns = ns_from_s(scn.duration_s)
    collector = MetricsCollector(duration_ns, schedule)
    owd_ns = int(scn.one_way_delay_ms * NS_PER_MS)
    ack_path = AckPath(engine, owd_ns)
    receivers: dict[int, Receiver] = {}

    def deliver(pkt, now):
        receivers[pkt.flow_id].on_data(pkt, now)

    link = BottleneckLink(engine, scheduler, schedule, owd_ns, deliver)
    senders: list[Sender] = []
    for fid, fs in enumerate(scn.flows):
        collector.add_flow(fid)
        receivers[fid] = Receiver(engine, fid, ack_path, collector)
        snd = Sender(engine, fid, fs.cca, link, collector)
        ack_path.register(fid, snd)
        senders.append(snd)
        engine.call_at(ns_from_s(fs.start_s), snd.start, None, "flow-start", fid)
    engine.run_until(duration_ns)
    summary = collector.summary(scheduler.drop_counts)
    return SimResult(scenario=scn, summary=summary, collector=collector,
                     scheduler=scheduler, senders=senders,
                     receivers=list(receivers.values()), engine=engine)


def run_scenario(scn: Scenario, out_dir: str | None = None,
                 seed: int | None = None) -> SimResult:
    res = simulate(scn, seed=seed)
    if out_dir is not None:
        export_csvs(out_dir, res.collector, res.summary, res.scheduler)
    return res


def run_suite(names: list[str], seeds: list[int],
              out_dir: str | None = None) -> list[dict]:
    """Run every (preset, seed) pair sequentially and aggregate summaries."""
    rows = []
    for name in names:
        scn = preset_scenario(name)
        for seed in seeds:
            run_dir = os.path.join(out_dir, f"{name}-seed{seed}") if out_dir else None
            res = run_scenario(scn, out_dir=run_dir, seed=seed)
            s = res.summary
            rows.append({
                "preset": name,
                "seed": seed,
                "utilization_pct": s.utilization_pct,
                "mean_rtt_ms": s.mean_rtt_ms,
                "total_mb": s.total_mb,
                "drops_tail": s.drops.get("tail", 0),
                "drops_codel": s.drops.get("codel", 0),
                "drops_cocoa": s.drops.get("cocoa-shrink", 0),
            })
    if out_dir is not None:
        _write_aggregate(out_dir, rows)
    return rows


def _write_aggregate(out_dir: str, rows: list[dict]) -> None:
    os.makedirs(out_dir, exist_ok=True)
    cols = ["preset", "seed", "utilization_pct", "mean_rtt_ms", "total_mb",
            "drops_tail", "drops_codel", "drops_cocoa"]
    out = [",".join(cols) + "\n"]
    for r in rows:
        out.append(",".join(
            f"{r[c]:.3f}" if isinstance(r[c], float) else str(r[c])
            for c in cols) + "\n")
    with open(os.path.join(out_dir, "aggregate.csv"), "w") as f:
        f.write("".join(out))

    by_preset: dict[str, list[dict]] = {}
    for r in rows:
        by_preset.setdefault(r["preset"], []).append(r)
    lines = []
    for name, rs in by_preset.items():
        util = sum(r["utilization_pct"] for r in rs) / len(rs)
        rtt = sum(r["mean_rtt_ms"] for r in rs) / len(rs)
        lines.append(f"{name}: runs={len(rs)} mean_utilization_pct={util:.3f} "
                     f"mean_rtt_ms={rtt:.3f}\n")
    with open(os.path.join(out_dir, "aggregate.txt"), "w") as f:
        f.write("".join(lines))
