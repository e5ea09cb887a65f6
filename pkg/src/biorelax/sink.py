"""Render sink: subscribes to the data topic, ticks a fixed-timestep frame
loop standing in for the visual update, and logs three receiver-side stamps
per packet (arrival, frame start, frame completion).

Visual state is conflated (a frame applies only the newest pending packet),
but latency accounting is not: every packet that arrived before a frame
started is logged against that frame, so no packet ever drops out of the
analysis.

A packet arriving exactly on a tick boundary belongs to the next frame:
consumption requires arrival strictly before the frame's start stamp.
"""
from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .logs import SINK_COLUMNS, StageLogWriter
from .scene import DEFAULT_PHASE_RATE_PER_S, SceneState, advance_scene
from .signal import ActivationCalibration
from .wire import ProtocolError, RmsPacket, decode_packet


@dataclass(frozen=True)
class JitterSpec:
    """Heavy-tail render stalls: `fraction` of frames gain uniform extra work.

    Stand-in for OS preemption and GC pauses; lets the analyzer be exercised
    against an outlier-laden distribution.
    """

    fraction: float
    lo_ms: float
    hi_ms: float
    seed: int = 0

    @classmethod
    def parse(cls, spec: str, seed: int = 0) -> "JitterSpec":
        parts = spec.replace("-", ":").split(":")
        if len(parts) != 3:
            raise ValueError(f"jitter spec must be fraction:lo:hi, got {spec!r}")
        return cls(float(parts[0]), float(parts[1]), float(parts[2]), seed)


@dataclass
class FrameLoopConfig:
    frame_rate_hz: float = 60.0
    render_work_ms: float = 0.0
    jitter: Optional[JitterSpec] = None
    queue_cap: int = 1024

    def __post_init__(self):
        if self.frame_rate_hz <= 0:
            raise ValueError("frame_rate_hz must be positive")
        period = 1000.0 / self.frame_rate_hz
        if self.render_work_ms < 0 or self.render_work_ms >= period:
            raise ValueError(
                f"render work must fit in the {period:.2f} ms frame period"
            )

    @property
    def period_ms(self) -> float:
        return 1000.0 / self.frame_rate_hz


@dataclass
class SinkSummary:
    frames: int = 0
    packets_logged: int = 0
    malformed: int = 0
    queue_overflow: int = 0
    skipped_frames: int = 0


def apply_packet(scene: SceneState, packet: RmsPacket, cal: ActivationCalibration,
                 base_rate_per_s: float = DEFAULT_PHASE_RATE_PER_S) -> SceneState:
    """Fold a packet into the scene; identical rule to the browser client."""
    return advance_scene(scene, packet, cal, base_rate_per_s)


class FrameLoop:
    """Fixed-timestep consumer with a latest-packet mailbox and a bounded
    arrival queue for logging.

    Drive it either blocking on a wall clock (``run``) or as scheduled events
    on a virtual clock (``start_events`` / ``resume_events``). Frame deadlines
    are absolute grid points; after a stall the loop skips missed grid slots
    like a vsync-locked renderer.
    """

    def __init__(self, cfg: FrameLoopConfig, log_path, clock,
                 cal: ActivationCalibration = ActivationCalibration(),
                 base_rate_per_s: float = DEFAULT_PHASE_RATE_PER_S):
        self.cfg = cfg
        self.clock = clock
        self.cal = cal
        self.base_rate_per_s = base_rate_per_s
        self.scene = SceneState()
        self.summary = SinkSummary()
        self.publisher_done = False
        self._arrivals: deque[tuple[float, RmsPacket]] = deque()
        self._mailbox: Optional[RmsPacket] = None
        self._lock = threading.Lock()
        self._rng = np.random.default_rng(cfg.jitter.seed) if cfg.jitter else None
        self._session_start = clock.now_ms()
        self._frame_index = 0
        self._idle_ticks = 0
        self._stopped = False
        self._writer = StageLogWriter(log_path, SINK_COLUMNS, clock.name, self._session_start)

    # -- receive side (transport context) -----------------------------------

    def on_payload(self, payload: bytes) -> None:
        t_recv = self.clock.now_ms()
        try:
            packet = decode_packet(payload)
        except ProtocolError:
            self.summary.malformed += 1
            return
        with self._lock:
            self._mailbox = packet
            if len(self._arrivals) >= self.cfg.queue_cap:
                self.summary.queue_overflow += 1
            else:
                self._arrivals.append((t_recv, packet))

    # -- frame side ----------------------------------------------------------

    def next_deadline_ms(self) -> float:
        return self._session_start + self._frame_index * self.cfg.period_ms

    def tick(self) -> int:
        """Run one frame; returns the number of packets consumed."""
        t_pre = self.clock.now_ms()
        drained: list[tuple[float, RmsPacket]] = []
        with self._lock:
            while self._arrivals and self._arrivals[0][0] < t_pre:
                drained.append(self._arrivals.popleft())
        if drained:
            self.scene = apply_packet(self.scene, drained[-1][1], self.cal,
                                      self.base_rate_per_s)
        work_ms = self.cfg.render_work_ms
        if self._rng is not None and self._rng.random() < self.cfg.jitter.fraction:
            work_ms += float(self._rng.uniform(self.cfg.jitter.lo_ms, self.cfg.jitter.hi_ms))
        if work_ms > 0:
            if self.clock.virtual:
                self.clock.sleep_until_ms(t_pre + work_ms)
            else:
                time.sleep(work_ms / 1000.0)
        t_render = self.clock.now_ms()
        for t_recv, packet in drained:
            self._writer.write(packet.seq, t_recv, t_pre, t_render)
        self.summary.frames += 1
        self.summary.packets_logged += len(drained)
        self._idle_ticks = 0 if drained else self._idle_ticks + 1
        return len(drained)

    def _advance_frame_index(self) -> None:
        self._frame_index += 1
        now = self.clock.now_ms()
        if now > self.next_deadline_ms():
            # stall overran one or more frame slots; snap to the next grid point
            missed = int((now - self._session_start) // self.cfg.period_ms) + 1
            self.summary.skipped_frames += missed - self._frame_index
            self._frame_index = missed

    def pending(self) -> int:
        with self._lock:
            return len(self._arrivals)

    def close(self) -> None:
        self._writer.close()

    # -- wall-clock driving --------------------------------------------------

    def run(self, duration_s: Optional[float] = None,
            idle_timeout_s: Optional[float] = 10.0) -> SinkSummary:
        """Blocking loop; stops after `duration_s`, or once packets have been
        seen and none arrive for `idle_timeout_s` (and the publisher, if one
        signalled, is done)."""
        start = self.clock.now_ms()
        last_activity = start
        try:
            while True:
                self.clock.sleep_until_ms(self.next_deadline_ms())
                consumed = self.tick()
                self._advance_frame_index()
                now = self.clock.now_ms()
                if consumed:
                    last_activity = now
                if duration_s is not None and now - start >= duration_s * 1000.0:
                    break
                if (idle_timeout_s is not None
                        and self.summary.packets_logged > 0
                        and now - last_activity >= idle_timeout_s * 1000.0):
                    break
                if self.publisher_done and self.pending() == 0 and self._idle_ticks >= 3:
                    break
        finally:
            self.close()
        return self.summary

    # -- virtual-clock driving -----------------------------------------------

    def start_events(self, idle_stop_frames: int = 3) -> None:
        self._idle_stop_frames = idle_stop_frames
        self._stopped = False
        self.clock.schedule(self.next_deadline_ms(), self._tick_event)

    def resume_events(self) -> None:
        if self._stopped:
            self._frame_index = int(
                (self.clock.now_ms() - self._session_start) // self.cfg.period_ms) + 1
            self._stopped = False
            self.clock.schedule(self.next_deadline_ms(), self._tick_event)

    def _tick_event(self) -> None:
        self.tick()
        self._advance_frame_index()
        if (self.publisher_done and self.pending() == 0
                and self._idle_ticks >= self._idle_stop_frames):
            self._stopped = True
            return
        self.clock.schedule(self.next_deadline_ms(), self._tick_event)


def run_sink(transport, frame_cfg: FrameLoopConfig, log_path, clock,
             data_topic: str = "vrx/emg/rms",
             cal: ActivationCalibration = ActivationCalibration(),
             duration_s: Optional[float] = None,
             idle_timeout_s: Optional[float] = 10.0) -> SinkSummary:
    """Subscribe, run the frame loop on the current thread, return summary."""
    loop = FrameLoop(frame_cfg, log_path, clock, cal)
    transport.subscribe(data_topic, loop.on_payload)
    return loop.run(duration_s=duration_s, idle_timeout_s=idle_timeout_s)
