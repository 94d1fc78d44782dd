"""Scenario parsing, presets, orchestration, and the CLI."""
import os

import pytest

from cocoasim import cli
from cocoasim.core import NS_PER_S, ns_from_s
from cocoasim.harness import (PRESET_GROUPS, PRESETS, Scenario, load_scenario,
                              parse_scenario, preset_scenario,
                              resolve_preset_names, run_scenario, run_suite,
                              simulate)

MINIMAL = """
qdisc = fq
rate_step = 0 10e6
flow = cubic
duration_s = 4
one_way_delay_ms = 5
"""


def test_parse_minimal_fills_defaults():
    scn = parse_scenario(MINIMAL)
    assert scn.qdisc == "fq"
    assert scn.rate_steps == [(0.0, 10e6)]
    assert scn.flows[0].cca == "cubic"
    assert scn.flows[0].start_s == 0.0
    assert scn.seed == 1
    assert scn.flow_limit == 100
    assert scn.quantum == 1500
    assert scn.cocoa.multiplier == 1.25
    assert scn.cocoa.max_increase_factor == 2.0
    assert scn.cocoa.max_guard_interval_ns == NS_PER_S
    assert scn.cocoa.initial_buffer_pkts == 100
    assert scn.cocoa.buffer_floor_pkts == 1


def test_parse_comments_and_blank_lines():
    scn = parse_scenario(MINIMAL + "\n# comment\nseed = 9  # trailing\n")
    assert scn.seed == 9


def test_parse_flow_start_offset():
    scn = parse_scenario(MINIMAL + "flow = reno 2.5\n")
    assert scn.flows[1].cca == "reno"
    assert scn.flows[1].start_s == 2.5


def test_parse_unknown_qdisc_lists_supported():
    with pytest.raises(ValueError, match="fq_codel"):
        parse_scenario(MINIMAL.replace("qdisc = fq", "qdisc = cake"))


def test_parse_unknown_flow_type():
    with pytest.raises(ValueError, match="vegas"):
        parse_scenario(MINIMAL + "flow = vegas\n")


def test_parse_unknown_key_names_line():
    with pytest.raises(ValueError, match="line 7"):
        parse_scenario(MINIMAL + "bogus = 1\n")


def test_parse_missing_required_keys():
    with pytest.raises(ValueError, match="duration_s"):
        parse_scenario("qdisc = fq\nrate_step = 0 1e6\nflow = reno\n"
                       "one_way_delay_ms = 5\n".replace(
                           "one_way_delay_ms = 5\n", ""))


def test_out_of_order_rate_steps_rejected_at_build():
    scn = parse_scenario(MINIMAL + "rate_step = 2 5e6\nrate_step = 1 2e6\n")
    with pytest.raises(ValueError, match="increasing"):
        simulate(scn)


def test_load_scenario_names_after_file(tmp_path):
    p = tmp_path / "myrun.scn"
    p.write_text(MINIMAL)
    scn = load_scenario(str(p))
    assert scn.name == "myrun"


class TestPresets:
    def test_catalog(self):
        expect = {"fig4_fq", "fig4_cocoa", "fig6_double", "fig5_fqcodel",
                  "fig5_cocoa", "bbr"}
        expect |= {f"table1_{c}_{q}" for c in ("cubic", "reno")
                   for q in ("fq", "fq_codel", "cocoa")}
        assert set(PRESETS) == expect
        assert set(PRESET_GROUPS["table1"]) == {
            n for n in expect if n.startswith("table1_")}

    def test_halving_preset_shape(self):
        scn = preset_scenario("fig4_cocoa")
        assert scn.qdisc == "cocoa"
        assert scn.rate_steps == [(0.0, 20e6), (30.0, 10e6)]
        assert scn.duration_s == 60
        assert scn.one_way_delay_ms == 5
        assert [f.cca for f in scn.flows] == ["cubic"]

    def test_long_path_preset_shape(self):
        scn = preset_scenario("fig5_fqcodel")
        assert scn.qdisc == "fq_codel"
        assert scn.rate_steps == [(0.0, 100e6)]
        assert scn.duration_s == 240
        assert scn.one_way_delay_ms == 50

    def test_table_preset_shape(self):
        scn = preset_scenario("table1_reno_cocoa")
        assert scn.qdisc == "cocoa"
        assert scn.rate_steps == [(0.0, 100e6)]
        assert scn.duration_s == 240
        assert scn.one_way_delay_ms == 25
        assert scn.flows[0].cca == "reno"

    def test_paced_preset_shape(self):
        scn = preset_scenario("bbr")
        assert scn.qdisc == "cocoa"
        assert scn.rate_steps == [(0.0, 50e6), (30.0, 25e6)]
        assert scn.flows[0].cca == "bbr"

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            preset_scenario("nope")
        with pytest.raises(ValueError):
            resolve_preset_names("nope")
        assert resolve_preset_names("bbr") == ["bbr"]
        assert len(resolve_preset_names("table1")) == 6


def short_scn(qdisc="fq", seed=1):
    return parse_scenario(
        f"qdisc = {qdisc}\nrate_step = 0 10e6\nflow = cubic\n"
        f"duration_s = 4\none_way_delay_ms = 5\nseed = {seed}\n")


def test_simulate_same_seed_identical_summaries():
    a = simulate(short_scn())
    b = simulate(short_scn())
    assert a.summary == b.summary


def test_simulate_seed_override():
    res = simulate(short_scn(), seed=5)
    assert res.scenario.seed == 5
    assert res.engine.seed == 5


def test_packet_conservation_after_drain():
    res = simulate(short_scn(qdisc="cocoa"))
    for snd in res.senders:
        snd.stop()
    res.engine.run_until(ns_from_s(20))
    link, sched = None, res.scheduler
    # every offered packet was either delivered or dropped by the qdisc
    offered = sum(col for col in res.collector.sent.values())
    delivered = res.collector.delivered_pkts
    retained = sched.backlog()
    assert retained == 0
    assert offered == delivered + sched.dropped_total
    # and payload conservation end to end
    assert res.receivers[0].cum == res.senders[0].next_seq


def test_delayed_flow_start():
    scn = parse_scenario(
        "qdisc = fq\nrate_step = 0 10e6\nflow = cubic\nflow = reno 2\n"
        "duration_s = 4\none_way_delay_ms = 5\n")
    res = simulate(scn)
    assert res.collector.rtt_t[1][0] >= ns_from_s(2)
    assert res.collector.rtt_t[0][0] < ns_from_s(1)


def test_two_flows_share_fairly():
    scn = parse_scenario(
        "qdisc = cocoa\nrate_step = 0 10e6\nflow = cubic\nflow = cubic\n"
        "duration_s = 8\none_way_delay_ms = 5\n")
    res = simulate(scn)
    per = res.summary.per_flow_bytes
    assert per[0] > 0 and per[1] > 0
    assert abs(per[0] - per[1]) / max(per.values()) < 0.10


def test_run_scenario_writes_outputs(tmp_path):
    out = tmp_path / "run"
    res = run_scenario(short_scn(), out_dir=str(out))
    for f in ("throughput.csv", "rtt.csv", "buffer.csv", "summary.txt"):
        assert (out / f).exists()
    assert res.summary.utilization_pct > 50


def test_run_suite_aggregates(tmp_path):
    rows = run_suite(["fig4_fq"], [1], out_dir=str(tmp_path))
    assert len(rows) == 1
    assert rows[0]["preset"] == "fig4_fq"
    assert (tmp_path / "aggregate.csv").exists()
    agg = (tmp_path / "aggregate.txt").read_text()
    assert "fig4_fq" in agg
    assert (tmp_path / "fig4_fq-seed1" / "throughput.csv").exists()


class TestCli:
    def test_list_presets(self, capsys):
        assert cli.main(["list-presets"]) == 0
        out = capsys.readouterr().out
        assert "fig4_cocoa" in out
        assert "table1 (group)" in out

    def test_run_preset_with_output(self, tmp_path, capsys):
        rc = cli.main(["run", "--preset", "fig4_fq", "--out",
                       str(tmp_path / "o"), "--seed", "2"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "utilization=" in out
        assert (tmp_path / "o" / "summary.txt").exists()

    def test_run_scenario_file(self, tmp_path, capsys):
        p = tmp_path / "mini.scn"
        p.write_text(MINIMAL)
        assert cli.main(["run", "--scenario", str(p)]) == 0
        assert "mini:" in capsys.readouterr().out

    def test_unknown_preset_fails_cleanly(self, capsys):
        assert cli.main(["run", "--preset", "nope"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_scenario_file_fails_cleanly(self, tmp_path, capsys):
        p = tmp_path / "bad.scn"
        p.write_text("qdisc = cake\n")
        assert cli.main(["run", "--scenario", str(p)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_suite_command(self, tmp_path, capsys):
        rc = cli.main(["suite", "--preset", "fig4_fq", "--seeds", "1",
                       "--out", str(tmp_path / "s")])
        assert rc == 0
        assert (tmp_path / "s" / "aggregate.csv").exists()
