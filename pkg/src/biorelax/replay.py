"""Replay publisher: paces RMS samples onto the wire and logs its stamps.

Pacing uses absolute deadlines (``session_start + k / rate``), never
accumulated sleeps, so a 5-minute run does not drift. Sensor timestamps are
rebased onto the session clock at those same deadlines: stage differencing
then measures pipeline delay, not the age of the recording.

Three sources:

* precomputed  — envelope computed up front; stamping cost only (default).
* streaming    — incremental windowed RMS updated at publish time, so the
                 stamp truthfully includes the per-packet update cost.
* packets      — replay of a captured packet stream (JSONL of wire packets),
                 preserving each packet's original processing offset
                 (t_rms - t_sensor) and spacing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .logs import PUBLISH_COLUMNS, StageLogWriter
from .signal import decimate_indices, load_emg_csv, rms_envelope, rms_window_samples
from .transport import TransportError
from .wire import RmsPacket, TopicMap, decode_packet, encode_packet


@dataclass
class ReplayConfig:
    input_path: str
    channel: int = 0
    window_ms: float = 64.0
    target_rate_hz: float = 75.0
    decimate: bool = True
    rms_mode: str = "precomputed"  # "precomputed" | "streaming"
    duration_s: Optional[float] = None
    log_path: str = "publish_log.csv"
    topics: TopicMap = field(default_factory=TopicMap)
    from_packets: bool = False


@dataclass
class ReplaySummary:
    packets_sent: int
    target_rate_hz: float
    achieved_rate_hz: float
    duration_ms: float
    partial: bool = False
    partial_reason: str = ""


class ReplayStream:
    """Packet source prepared from a replay config.

    ``deadline_offset_ms(k)`` is the k-th packet's publish deadline relative
    to session start; ``compute_and_stamp(k, clock)`` produces the wire packet
    with a truthful t_rms (captured right after the RMS value for the packet
    is available; nothing synthetic is injected).
    """

    def __init__(self, cfg: ReplayConfig):
        self.cfg = cfg
        self.session_start_ms = 0.0
        if cfg.from_packets:
            self._captured = _load_packet_capture(cfg.input_path)
            self._n = len(self._captured)
            return
        series = load_emg_csv(cfg.input_path, cfg.channel)
        if cfg.decimate:
            self._kept = decimate_indices(len(series), series.rate_hz, cfg.target_rate_hz)
            self.rate_hz = cfg.target_rate_hz
        else:
            self._kept = np.arange(len(series))
            self.rate_hz = series.rate_hz
        self._n = len(self._kept)
        if cfg.rms_mode == "precomputed":
            envelope = rms_envelope(series, cfg.window_ms)
            self._values = envelope.values[self._kept]
        elif cfg.rms_mode == "streaming":
            self._sq = series.values.astype(float) ** 2
            self._n_win = rms_window_samples(cfg.window_ms, series.rate_hz)
            self._sum_sq = 0.0
            self._ptr = 0
        else:
            raise ValueError(f"unknown rms_mode {cfg.rms_mode!r}")

    def __len__(self) -> int:
        return self._n

    def begin(self, session_start_ms: float) -> None:
        self.session_start_ms = session_start_ms

    def deadline_offset_ms(self, k: int) -> float:
        if self.cfg.from_packets:
            # pace on the capture's RMS instants so t_publish >= t_rms holds
            return self._captured[k][1]
        return k * (1000.0 / self.rate_hz)

    def compute_and_stamp(self, k: int, clock) -> RmsPacket:
        if self.cfg.from_packets:
            rel_sensor, rel_rms, rms_mv = self._captured[k]
            return RmsPacket(
                seq=k,
                t_sensor_ms=self.session_start_ms + rel_sensor,
                t_rms_ms=self.session_start_ms + rel_rms,
                rms_mv=rms_mv,
            )
        t_sensor = self.session_start_ms + self.deadline_offset_ms(k)
        if self.cfg.rms_mode == "precomputed":
            rms_mv = float(self._values[k])
        else:
            rms_mv = self._streaming_rms(int(self._kept[k]))
        t_rms = clock.now_ms()
        return RmsPacket(seq=k, t_sensor_ms=t_sensor, t_rms_ms=max(t_rms, t_sensor), rms_mv=rms_mv)

    def _streaming_rms(self, target_idx: int) -> float:
        while self._ptr <= target_idx:
            self._sum_sq += self._sq[self._ptr]
            if self._ptr >= self._n_win:
                self._sum_sq -= self._sq[self._ptr - self._n_win]
            self._ptr += 1
        count = min(target_idx + 1, self._n_win)
        return math.sqrt(max(self._sum_sq, 0.0) / count)


def _load_packet_capture(path) -> list[tuple[float, float, float]]:
    """JSONL of wire packets -> (rel_t_sensor, rel_t_rms, rms_mv) per packet."""
    packets = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            packets.append(decode_packet(line))
    if not packets:
        raise ValueError(f"{path}: no packets in capture")
    base = packets[0].t_sensor_ms
    return [(p.t_sensor_ms - base, p.t_rms_ms - base, p.rms_mv) for p in packets]


def run_replay(cfg: ReplayConfig, transport, clock) -> ReplaySummary:
    """Publish the prepared stream at its deadlines and write the stage log."""
    stream = ReplayStream(cfg)
    session_start = clock.now_ms()
    stream.begin(session_start)
    duration_cap_ms = None if cfg.duration_s is None else cfg.duration_s * 1000.0
    sent = 0
    first_pub = last_pub = None
    partial = False
    reason = ""
    with StageLogWriter(cfg.log_path, PUBLISH_COLUMNS, clock.name, session_start) as writer:
        try:
            for k in range(len(stream)):
                offset = stream.deadline_offset_ms(k)
                if duration_cap_ms is not None and offset >= duration_cap_ms:
                    break
                clock.sleep_until_ms(session_start + offset)
                packet = stream.compute_and_stamp(k, clock)
                t_pub = transport.publish(cfg.topics.data_topic, encode_packet(packet))
                writer.write(packet.seq, packet.t_sensor_ms, packet.t_rms_ms, t_pub)
                sent += 1
                last_pub = t_pub
                if first_pub is None:
                    first_pub = t_pub
        except TransportError as exc:
            partial = True
            reason = str(exc)
            writer.mark_partial(reason)
    if sent >= 2 and last_pub > first_pub:
        achieved = (sent - 1) * 1000.0 / (last_pub - first_pub)
        duration_ms = last_pub - first_pub
    else:
        achieved = 0.0
        duration_ms = 0.0
    return ReplaySummary(
        packets_sent=sent,
        target_rate_hz=getattr(stream, "rate_hz", 0.0),
        achieved_rate_hz=achieved,
        duration_ms=duration_ms,
        partial=partial,
        partial_reason=reason,
    )
