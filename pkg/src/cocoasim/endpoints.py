"""Endpoint models: bulk-data senders and an acking receiver.

Senders are ack-clocked with an unbounded supply of data.  Loss
recovery is cumulative-ack based with one window reduction per
episode.  During an episode every arriving ack funds at most one
transmission: a repair first, otherwise one new segment, except that
the first few acks of the episode fund nothing.  That unfunded toll
equals the flight's overhang above the reduced window, so paying it
drains the in-network population down to the new window and the 1:1
clock afterwards holds it there for however long the episode runs.
Each ack carries the receiver's hint of where its first missing run
ends, and repairs cover exactly the span from the cumulative ack to
that hint: a contiguous block of losses repairs at the ack rate
without selective acknowledgments and without resending anything that
already arrived.  When a single-segment advance arrives a full round
trip after the last one, the pipe has collapsed to one segment in
flight, so such acks fund two transmissions and the repair chain
regrows geometrically instead of limping one segment per round trip.
A repair that is itself lost is resent after 1.25 smoothed round
trips without a cumulative-ack advance.  Duplicate-ack counting is
gated off between a recovery exit (or a timeout) and the next
new-data ack; the network preserves ordering, so that window is
exactly where the acks of wasted duplicates and stale pre-timeout
deliveries land.

A retransmission timeout rewinds to the cumulative ack and relies on
the receiver's reorder buffer to collapse whatever already arrived.
The congestion state is snapshotted at the timeout: if the first ack
afterwards covers more than the single rewound segment, the timeout
was a false alarm (the data was delivered, only its acks were late)
and the snapshot is restored.

Reno and Cubic release at most two new segments per ack as the window
opens.  BBR paces its emissions at a gain times its
bottleneck-bandwidth estimate and does not reduce its model on loss.
"""
from __future__ import annotations

from collections import deque
from math import inf

from .core import NS_PER_MS, NS_PER_S, Engine, SimulationError
from .link import ACK_BYTES, HEADER_BYTES, MSS_BYTES, Packet

INIT_CWND_PKTS = 10
RTO_FLOOR_NS = 200 * NS_PER_MS
RTO_INITIAL_NS = NS_PER_S
MIN_RTT_WINDOW_NS = 10 * NS_PER_S
PROBE_RTT_DURATION_NS = 200 * NS_PER_MS
BBR_STARTUP_GAIN = 2.885
BBR_CWND_GAIN = 2.0
BBR_GAIN_CYCLE = (1.25, 0.75, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
BBR_BW_WINDOW_ROUNDS = 10
BBR_MIN_CWND_PKTS = 4


class RenoController:
    """Slow start, additive increase, multiplicative decrease on loss."""

    paced = False

    def __init__(self, mss: int):
        self.mss = mss
        self.cwnd = float(INIT_CWND_PKTS * mss)
        self.ssthresh = inf

    def on_new_ack(self, acked_bytes: int, now: int) -> None:
        mss = self.mss
        if self.cwnd < self.ssthresh:
            self.cwnd += min(acked_bytes, mss)
        else:
            self.cwnd += mss * mss / self.cwnd

    def on_loss_event(self, now: int) -> None:
        self.ssthresh = max(self.cwnd / 2, 2.0 * self.mss)
        self.cwnd = self.ssthresh

    def on_rto(self, now: int) -> None:
        self.ssthresh = max(self.cwnd / 2, 2.0 * self.mss)
        self.cwnd = float(self.mss)

    def export_state(self):
        return (self.cwnd, self.ssthresh)

    def restore_state(self, state) -> None:
        self.cwnd, self.ssthresh = state


class CubicController:
    """Cubic window growth; the TCP-friendly region is not modeled."""

    paced = False
    BETA = 0.7
    C = 0.4

    def __init__(self, mss: int):
        self.mss = mss
        self.cwnd = float(INIT_CWND_PKTS * mss)
        self.ssthresh = inf
        self.w_max = 0.0
        self.k_s = 0.0
        self.epoch_start: int | None = None

    def window_bytes(self, now: int) -> float:
        t = (now - self.epoch_start) / NS_PER_S
        w_mss = self.w_max / self.mss + self.C * (t - self.k_s) ** 3
        return w_mss * self.mss

    def _set_w_max(self, w_bytes: float) -> None:
        self.w_max = w_bytes
        self.k_s = (w_bytes / self.mss * (1 - self.BETA) / self.C) ** (1 / 3)

    def on_new_ack(self, acked_bytes: int, now: int) -> None:
        if self.cwnd < self.ssthresh:
            self.cwnd += min(acked_bytes, self.mss)
            return
        if self.epoch_start is None:
            # resuming growth after a timeout keeps the recorded peak;
            # a fresh flow with no loss history rises from where it is
            if self.w_max < self.cwnd:
                self._set_w_max(self.cwnd)
            self.epoch_start = now
        target = self.window_bytes(now)
        if target > self.cwnd:
            self.cwnd = target

    def on_loss_event(self, now: int) -> None:
        if self.cwnd < self.w_max:
            # losing below the previous peak means capacity fell;
            # release the extra room instead of probing back to it
            self._set_w_max(self.cwnd * (2.0 - self.BETA) / 2.0)
        else:
            self._set_w_max(self.cwnd)
        self.epoch_start = now
        self.ssthresh = max(self.BETA * self.cwnd, 2.0 * self.mss)
        self.cwnd = self.ssthresh

    def on_rto(self, now: int) -> None:
        if self.cwnd < self.w_max:
            self._set_w_max(self.cwnd * (2.0 - self.BETA) / 2.0)
        else:
            self._set_w_max(self.cwnd)
        self.epoch_start = None
        self.ssthresh = max(self.BETA * self.cwnd, 2.0 * self.mss)
        self.cwnd = float(self.mss)

    def export_state(self):
        return (self.cwnd, self.ssthresh, self.w_max, self.k_s, self.epoch_start)

    def restore_state(self, state) -> None:
        self.cwnd, self.ssthresh, self.w_max, self.k_s, self.epoch_start = state


class BbrController:
    """Model-based control: windowed-max bandwidth and windowed-min RTT.

    Startup doubles the pacing rate until the bandwidth estimate stops
    growing for three rounds, drain bleeds the startup queue, then the
    probe_bw gain cycle runs.  Every time the cycle wraps, a fresh
    cyclic rotation of the gain pattern is drawn, uniformly among the
    rotations that do not begin with the 3/4 drain gain.
    """

    paced = True

    def __init__(self, mss: int, rng):
        self.mss = mss
        self.rng = rng
        self.mode = "startup"
        self.pacing_gain = BBR_STARTUP_GAIN
        self.cwnd_gain = BBR_STARTUP_GAIN
        self.btl_bw = 0.0
        self._bw_window: deque[tuple[int, float]] = deque()
        self.min_rtt_ns = inf
        self.min_rtt_stamp = 0
        self.round_count = 0
        self.round_start_delivered = 0
        self.full_bw = 0.0
        self.full_bw_count = 0
        self.filled_pipe = False
        self.cycle: tuple[float, ...] = BBR_GAIN_CYCLE
        self.cycle_index = 0
        self.phase_start = 0
        self.probe_rtt_done = 0

    @property
    def cwnd(self) -> float:
        if self.mode == "probe_rtt":
            return float(BBR_MIN_CWND_PKTS * self.mss)
        if self.btl_bw <= 0 or self.min_rtt_ns == inf:
            return float(INIT_CWND_PKTS * self.mss)
        target = self.cwnd_gain * self.btl_bw / 8 * self.min_rtt_ns / NS_PER_S
        return max(target, float(BBR_MIN_CWND_PKTS * self.mss))

    @property
    def pacing_rate_bps(self) -> float:
        return self.pacing_gain * self.btl_bw

    def draw_rotation(self) -> tuple[float, ...]:
        """A cyclic rotation of the gain pattern that does not start with 3/4."""
        starts = [i for i in range(len(BBR_GAIN_CYCLE)) if BBR_GAIN_CYCLE[i] != 0.75]
        r = self.rng.choice(starts)
        return BBR_GAIN_CYCLE[r:] + BBR_GAIN_CYCLE[:r]

    def _enter_probe_bw(self, now: int) -> None:
        self.mode = "probe_bw"
        self.cwnd_gain = BBR_CWND_GAIN
        self.cycle = self.draw_rotation()
        self.cycle_index = 0
        self.pacing_gain = self.cycle[0]
        self.phase_start = now

    def advance_phase(self, now: int) -> None:
        self.cycle_index += 1
        if self.cycle_index >= len(self.cycle):
            self.cycle = self.draw_rotation()
            self.cycle_index = 0
        self.pacing_gain = self.cycle[self.cycle_index]
        self.phase_start = now

    def _update_bw_filter(self, bw_bps: float) -> None:
        win = self._bw_window
        rnd = self.round_count
        if win and win[-1][0] == rnd:
            if bw_bps > win[-1][1]:
                win[-1] = (rnd, bw_bps)
        else:
            win.append((rnd, bw_bps))
        floor = rnd - BBR_BW_WINDOW_ROUNDS
        while win and win[0][0] <= floor:
            win.popleft()
        self.btl_bw = max(v for _, v in win)

    def on_ack_sample(self, bw_bps: float, rtt_ns: int, delivered_at_send: int,
                      delivered_now: int, inflight_bytes: int, now: int) -> None:
        round_end = False
        if delivered_at_send >= self.round_start_delivered:
            self.round_count += 1
            self.round_start_delivered = delivered_now
            round_end = True
        if bw_bps > 0:
            self._update_bw_filter(bw_bps)
        min_rtt_expired = now - self.min_rtt_stamp > MIN_RTT_WINDOW_NS
        if rtt_ns <= self.min_rtt_ns or min_rtt_expired:
            self.min_rtt_ns = rtt_ns
            self.min_rtt_stamp = now

        if self.mode == "startup" and round_end and not self.filled_pipe:
            if self.btl_bw >= self.full_bw * 1.25:
                self.full_bw = self.btl_bw
                self.full_bw_count = 0
            else:
                self.full_bw_count += 1
                if self.full_bw_count >= 3:
                    self.filled_pipe = True
                    self.mode = "drain"
                    self.pacing_gain = 1 / BBR_STARTUP_GAIN
        if self.mode == "drain":
            bdp = self.btl_bw / 8 * self.min_rtt_ns / NS_PER_S
            if inflight_bytes <= bdp:
                self._enter_probe_bw(now)
        elif self.mode == "probe_bw":
            if now - self.phase_start >= self.min_rtt_ns:
                self.advance_phase(now)

        if self.mode == "probe_rtt":
            if now >= self.probe_rtt_done:
                self.min_rtt_stamp = now
                if self.filled_pipe:
                    self._enter_probe_bw(now)
                else:
                    self.mode = "startup"
                    self.pacing_gain = BBR_STARTUP_GAIN
                    self.cwnd_gain = BBR_STARTUP_GAIN
        elif min_rtt_expired:
            self.mode = "probe_rtt"
            self.pacing_gain = 1.0
            self.probe_rtt_done = now + PROBE_RTT_DURATION_NS

    def on_new_ack(self, acked_bytes: int, now: int) -> None:
        pass

    def on_loss_event(self, now: int) -> None:
        pass

    def on_rto(self, now: int) -> None:
        pass

    def export_state(self):
        return None

    def restore_state(self, state) -> None:
        pass


def make_controller(cca: str, mss: int, rng):
    if cca == "reno":
        return RenoController(mss)
    if cca == "cubic":
        return CubicController(mss)
    if cca == "bbr":
        return BbrController(mss, rng)
    raise ValueError(f"unknown congestion control {cca!r}")


class Sender:
    """Bulk sender: sequencing, RTT estimation, recovery, and emission."""

    __slots__ = ("engine", "flow_id", "mss", "controller", "link", "metrics",
                 "next_seq", "max_sent", "highest_acked", "dupacks", "in_recovery",
                 "recover_until", "_retx_ptr", "_retx_lim",
                 "_rec_sent", "_rec_acked", "_rec_toll", "_advance_mark",
                 "_dupack_gate",
                 "srtt", "rttvar",
                 "rto", "min_rtt", "rto_deadline", "_rto_scale", "_rto_armed",
                 "_rto_snapshot", "_rto_probe",
                 "pace_next", "_pace_armed", "_send_records", "new_data_acks",
                 "packets_sent", "retransmits", "rto_events", "spurious_rtos",
                 "loss_events", "stopped", "cwnd_at_loss")

    def __init__(self, engine: Engine, flow_id: int, cca: str, link, metrics,
                 mss: int = MSS_BYTES):
        self.engine = engine
        self.flow_id = flow_id
        self.mss = mss
        self.controller = make_controller(cca, mss, engine.rng)
        self.link = link
        self.metrics = metrics
        self.next_seq = 0
        self.max_sent = 0
        self.highest_acked = 0
        self.dupacks = 0
        self.in_recovery = False
        self.recover_until = 0
        self._retx_ptr = 0
        self._retx_lim = 0
        self._rec_sent = 0
        self._rec_acked = 0
        self._rec_toll = 0
        self._advance_mark = 0
        self._dupack_gate = True
        self.srtt: float | None = None
        self.rttvar = 0.0
        self.rto = RTO_INITIAL_NS
        self.min_rtt = inf
        self.rto_deadline = 0
        self._rto_scale = 1
        self._rto_armed = False
        self._rto_snapshot = None
        self._rto_probe = 0
        self.pace_next = 0
        self._pace_armed = False
        self._send_records: deque | None = deque() if self.controller.paced else None
        self.new_data_acks = 0
        self.packets_sent = 0
        self.retransmits = 0
        self.rto_events = 0
        self.spurious_rtos = 0
        self.loss_events = 0
        self.stopped = False
        self.cwnd_at_loss: list[float] = []

    def flight_bytes(self) -> int:
        return self.next_seq - self.highest_acked

    def start(self, _arg, now: int) -> None:
        self._try_send(now)

    def stop(self) -> None:
        self.stopped = True

    # emission ---------------------------------------------------------

    def _emit(self, seq_start: int, now: int) -> None:
        pkt = Packet(id=self.engine.next_packet_id(), flow_id=self.flow_id,
                     size_bytes=self.mss + HEADER_BYTES, seq_start=seq_start,
                     seq_end=seq_start + self.mss, ts_echo=now)
        if self._send_records is not None:
            self._send_records.append((pkt.seq_end, now, self.highest_acked))
        self.packets_sent += 1
        self.metrics.on_send(self.flow_id)
        if not self._rto_armed:
            self.rto_deadline = now + self.rto * self._rto_scale
            self._arm_rto_timer()
        self.link.on_packet(pkt, now)

    def _send_new(self, now: int) -> None:
        seq = self.next_seq
        self.next_seq = seq + self.mss
        if self.next_seq > self.max_sent:
            self.max_sent = self.next_seq
        self._emit(seq, now)

    def _retransmit_head(self, now: int) -> None:
        self.retransmits += 1
        self._emit(self.highest_acked, now)

    def _update_retx_window(self, ack: Packet) -> None:
        """Reposition the repair window on an ack during recovery.

        The receiver's next missing segment is always exactly the
        cumulative ack, so repairs start there, and the ack's gap_end
        names the known extent of the first hole.  Holes further out
        are revealed one at a time as the cumulative ack crosses each
        repaired one; repairing speculatively past the known hole
        would burn the ack clock on segments that were never lost."""
        seq = self.highest_acked
        if seq > self._retx_ptr:
            self._retx_ptr = seq
        lim = ack.gap_end
        if lim < seq + self.mss:
            lim = seq + self.mss
        if lim > self.recover_until:
            lim = self.recover_until
        if lim < self._retx_ptr:
            lim = self._retx_ptr
        self._retx_lim = lim

    def _recovery_op(self, delivered: int, now: int, ops: int = 1) -> None:
        """Ack-funded transmissions while recovering, repairs first.

        Every arriving ack normally funds one transmission: a pending
        repair if there is one, otherwise one new segment, except that
        the first few acks of the episode fund nothing beyond repairs.
        That unfunded toll equals the flight overhang above the
        reduced window, so the network drains by exactly the window
        reduction and then holds level however long the episode runs;
        a proportional send rate was tried here twice (at half and at
        seven-tenths per delivery) and both decay the flight without
        bound on long episodes, starving the ack clock.  The other
        exception is an ack that proves the pipe has collapsed to a
        single segment (see on_ack); those fund two transmissions, so
        a repair chain crossing a wide hole regrows geometrically
        instead of limping at one segment per round trip."""
        if self.controller.paced:
            self._try_send(now)
            return
        self._rec_acked += delivered
        for _ in range(ops):
            if self._retx_ptr < self._retx_lim:
                seq = self._retx_ptr
                self._retx_ptr = seq + self.mss
                self.retransmits += 1
                self._emit(seq, now)
            elif ((not self.stopped or self.next_seq < self.max_sent)
                    and self._rec_sent < self._rec_acked - self._rec_toll):
                self._rec_sent += 1
                self._send_new(now)
            else:
                break

    def _try_send(self, now: int, budget: int | None = None) -> None:
        # a stopped sender produces nothing new, but keeps re-emitting
        # already-produced data below max_sent (the timeout rewind) so
        # its tail can still drain
        ctrl = self.controller
        if not ctrl.paced:
            if self.in_recovery:
                return
            cwnd = ctrl.cwnd
            sent = 0
            while self.next_seq - self.highest_acked < cwnd:
                if budget is not None and sent >= budget:
                    break
                if self.stopped and self.next_seq >= self.max_sent:
                    break
                self._send_new(now)
                sent += 1
            return
        while True:
            repair = self.in_recovery and self._retx_ptr < self._retx_lim
            if not repair:
                if self.stopped and self.next_seq >= self.max_sent:
                    return
                if not (self.next_seq - self.highest_acked < ctrl.cwnd):
                    return
            rate = ctrl.pacing_rate_bps
            if rate > 0:
                if now < self.pace_next:
                    if not self._pace_armed:
                        self._pace_armed = True
                        self.engine.call_at(self.pace_next, self._pace_fire, None,
                                            "timer", self.flow_id)
                    return
                gap = int((self.mss + HEADER_BYTES) * 8 * NS_PER_S / rate)
                base = self.pace_next if self.pace_next > now - gap else now
                self.pace_next = base + gap
            if repair:
                seq = self._retx_ptr
                self._retx_ptr = seq + self.mss
                self.retransmits += 1
                self._emit(seq, now)
            else:
                self._send_new(now)

    def _pace_fire(self, _arg, now: int) -> None:
        self._pace_armed = False
        self._try_send(now)

    # retransmission timer ----------------------------------------------

    def _arm_rto_timer(self) -> None:
        self._rto_armed = True
        self.engine.call_at(self.rto_deadline, self._rto_fire, None,
                            "timer", self.flow_id)

    def _restart_rto(self, now: int) -> None:
        self._rto_scale = 1
        self.rto_deadline = now + self.rto
        if not self._rto_armed:
            self._arm_rto_timer()

    def _rto_fire(self, _arg, now: int) -> None:
        self._rto_armed = False
        if self.flight_bytes() <= 0:
            return
        if now < self.rto_deadline:
            self.rto_deadline = max(self.rto_deadline, now)
            self._arm_rto_timer()
            return
        self.rto_events += 1
        if self._rto_snapshot is None:
            self._rto_snapshot = self.controller.export_state()
        self._rto_probe = self.highest_acked + self.mss
        self.controller.on_rto(now)
        self.in_recovery = False
        self.dupacks = 0
        # acks of data delivered before the timeout trickle in next;
        # they must not be counted as duplicates at the rewound window
        self._dupack_gate = False
        self._rto_scale = min(self._rto_scale * 2, 8)
        # go back to the cumulative ack; the receiver's reorder buffer
        # collapses anything it already holds into one jump
        self.next_seq = self.highest_acked
        self.rto_deadline = now + self.rto * self._rto_scale
        self._arm_rto_timer()
        self._try_send(now, 2)

    # ack processing -----------------------------------------------------

    def _update_rtt(self, sample: int) -> None:
        if self.srtt is None:
            self.srtt = float(sample)
            self.rttvar = sample / 2
        else:
            self.rttvar = 0.75 * self.rttvar + 0.25 * abs(self.srtt - sample)
            self.srtt = 0.875 * self.srtt + 0.125 * sample
        self.rto = max(int(self.srtt + 4 * self.rttvar), RTO_FLOOR_NS)
        if sample < self.min_rtt:
            self.min_rtt = sample

    def _bbr_sample(self, ack_seq: int, rtt: int, now: int) -> None:
        records = self._send_records
        rec = None
        while records and records[0][0] <= ack_seq:
            rec = records.popleft()
        ctrl = self.controller
        if rec is not None and now > rec[1]:
            bw = (ack_seq - rec[2]) * 8 * NS_PER_S / (now - rec[1])
            ctrl.on_ack_sample(bw, rtt, rec[2], ack_seq, self.flight_bytes(), now)

    def on_ack(self, ack: Packet, now: int) -> None:
        seq = ack.ack_seq
        if seq > self.max_sent:
            raise SimulationError(
                f"flow {self.flow_id}: ack for unsent data {seq} > {self.max_sent}")
        if seq > self.next_seq:
            # ack from data in flight before a timeout rewind; skip ahead
            self.next_seq = seq
        if seq > self.highest_acked:
            acked = seq - self.highest_acked
            # an advance of exactly one segment with no duplicate acks
            # since the last advance, arriving a full round trip after
            # it, means the only thing delivered this round trip was
            # our own repair: the pipe is down to one segment.  (A
            # draining queue of in-order survivors also acks single
            # segments without duplicates, but at back-to-back pace.)
            pipe_collapsed = (acked == self.mss and self.dupacks == 0
                              and now - self._advance_mark >= self.min_rtt * 0.75)
            self.highest_acked = seq
            self.new_data_acks += 1
            self.dupacks = 0
            self._dupack_gate = True
            rtt = now - ack.ts_echo
            self._update_rtt(rtt)
            self.metrics.on_rtt_sample(self.flow_id, now, rtt)
            if self._send_records is not None:
                self._bbr_sample(seq, rtt, now)
            if not self.in_recovery:
                # window growth pauses while repairing; it resumes from
                # the reduced level at exit
                self.controller.on_new_ack(acked, now)
            self._restart_rto(now)
            if self._rto_snapshot is not None:
                if seq > self._rto_probe:
                    # delivery beyond the rewound segment: the timeout
                    # was a false alarm, undo the collapse
                    self.controller.restore_state(self._rto_snapshot)
                    self._rto_scale = 1
                    self.spurious_rtos += 1
                self._rto_snapshot = None
            if self.in_recovery:
                if seq >= self.recover_until:
                    self.in_recovery = False
                    # acks of wasted duplicate resends arrive next; keep
                    # them out of the duplicate count
                    self._dupack_gate = False
                    self._try_send(now, 2)
                else:
                    self._advance_mark = now
                    self._update_retx_window(ack)
                    self._recovery_op(acked // self.mss, now,
                                      2 if pipe_collapsed else 1)
            else:
                self._try_send(now, 2)
        elif self.flight_bytes() > 0 and self._dupack_gate:
            self.dupacks += 1
            if self.in_recovery:
                self._update_retx_window(ack)
                self._recovery_op(1, now)
                if (self.srtt is not None
                        and now - self._advance_mark > self.srtt * 1.25):
                    # the repair covering the cumulative ack has had a
                    # full round trip to land; assume it was lost too
                    self._retransmit_head(now)
                    self._advance_mark = now
            elif self.dupacks == 3:
                self.loss_events += 1
                self.cwnd_at_loss.append(self.controller.cwnd)
                self.controller.on_loss_event(now)
                self.in_recovery = True
                self.recover_until = self.next_seq
                self._rec_sent = 0
                self._rec_acked = 0
                # the toll drains the real in-network population down
                # to the reduced window: flight overstates it by the
                # known hole, and the head retransmit below adds one
                # segment back, hence the +1
                hole = ack.gap_end - self.highest_acked
                if hole < self.mss:
                    hole = self.mss
                flight = self.flight_bytes()
                if hole > flight:
                    hole = flight
                overhang = flight - hole - int(self.controller.cwnd)
                self._rec_toll = max(-(-overhang // self.mss) + 1, 1)
                self._advance_mark = now
                self._retransmit_head(now)
                self._retx_ptr = self.highest_acked + self.mss
                self._retx_lim = self._retx_ptr
                self._update_retx_window(ack)
                self._restart_rto(now)


class Receiver:
    """Cumulative-ack receiver with a reorder buffer; one ack per packet.

    Acks also carry the end of the first missing run (the start of the
    first buffered block beyond the cumulative ack), so the sender can
    repair a contiguous loss without rediscovering its extent one
    round trip at a time."""

    __slots__ = ("engine", "flow_id", "ack_path", "metrics", "cum", "ooo",
                 "_first_block", "packets_received")

    def __init__(self, engine: Engine, flow_id: int, ack_path, metrics):
        self.engine = engine
        self.flow_id = flow_id
        self.ack_path = ack_path
        self.metrics = metrics
        self.cum = 0
        self.ooo: dict[int, int] = {}
        self._first_block = 0
        self.packets_received = 0

    def on_data(self, pkt: Packet, now: int) -> None:
        self.packets_received += 1
        self.metrics.on_delivered(pkt.flow_id, pkt.seq_end - pkt.seq_start, now)
        if pkt.seq_start == self.cum:
            cum = pkt.seq_end
            ooo = self.ooo
            while cum in ooo:
                cum = ooo.pop(cum)
            self.cum = cum
            if ooo:
                if self._first_block <= cum:
                    self._first_block = min(ooo)
            else:
                self._first_block = 0
        elif pkt.seq_start > self.cum:
            known = self.ooo.get(pkt.seq_start, 0)
            if pkt.seq_end > known:
                self.ooo[pkt.seq_start] = pkt.seq_end
            if self._first_block == 0 or pkt.seq_start < self._first_block:
                self._first_block = pkt.seq_start
        gap_end = self._first_block if self._first_block > self.cum else self.cum
        ack = Packet(id=self.engine.next_packet_id(), flow_id=self.flow_id,
                     size_bytes=ACK_BYTES, is_ack=True, ack_seq=self.cum,
                     gap_end=gap_end, ts_echo=pkt.ts_echo)
        self.ack_path.send(ack, now)
