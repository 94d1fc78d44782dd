"""Command-line entry point."""
from __future__ import annotations

import argparse
import sys

from . import harness


def _cmd_run(args) -> int:
    if args.scenario:
        scn = harness.load_scenario(args.scenario)
    else:
        scn = harness.preset_scenario(args.preset)
    res = harness.run_scenario(scn, out_dir=args.out, seed=args.seed)
    s = res.summary
    print(f"{scn.name}: utilization={s.utilization_pct:.2f}% "
          f"mean_rtt={s.mean_rtt_ms:.2f}ms total={s.total_mb:.2f}MB "
          f"drops={s.drops}")
    if args.out:
        print(f"wrote {args.out}/throughput.csv rtt.csv buffer.csv summary.txt")
    return 0


def _cmd_suite(args) -> int:
    names = []
    for part in args.preset.split(","):
        names.extend(harness.resolve_preset_names(part.strip()))
    seeds = list(range(1, args.seeds + 1))
    rows = harness.run_suite(names, seeds, out_dir=args.out)
    for r in rows:
        print(f"{r['preset']} seed={r['seed']}: "
              f"utilization={r['utilization_pct']:.2f}% "
              f"mean_rtt={r['mean_rtt_ms']:.2f}ms total={r['total_mb']:.2f}MB")
    if args.out:
        print(f"wrote {args.out}/aggregate.csv aggregate.txt")
    return 0


def _cmd_list_presets(_args) -> int:
    for name in harness.PRESETS:
        print(name)
    for group, members in harness.PRESET_GROUPS.items():
        print(f"{group} (group): {', '.join(members)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cocoasim",
        description="Deterministic fair-queuing simulator with adaptive "
                    "per-flow buffers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="path to a scenario file")
    src.add_argument("--preset", help="name of a built-in preset")
    p_run.add_argument("--out", help="directory for CSV output")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    p_run.set_defaults(fn=_cmd_run)

    p_suite = sub.add_parser("suite", help="run presets across seeds")
    p_suite.add_argument("--preset", required=True,
                         help="preset or group name; comma-separated")
    p_suite.add_argument("--seeds", type=int, default=1,
                         help="run seeds 1..N (default 1)")
    p_suite.add_argument("--out", help="directory for per-run and aggregate output")
    p_suite.set_defaults(fn=_cmd_suite)

    p_list = sub.add_parser("list-presets", help="list built-in presets")
    p_list.set_defaults(fn=_cmd_list_presets)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
