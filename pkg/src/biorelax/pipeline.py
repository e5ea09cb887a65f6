"""In-process composition of replay publisher, loopback transport, and render
sink, sharing one clock.

Under the virtual clock the whole run is a deterministic discrete-event
simulation and finishes instantly; under the wall clock the sink runs on its
own thread and the run takes real time. Either way the same code paths
produce the two stage logs the analyzer merges.

Also houses the pinned "golden" run: 5,000 packets at 75 Hz through a
delay distribution whose quartiles sit at 2.98 and 8.00 ms, into a 60 Hz
sink with zero render work. Fully seeded, so the analyzer report it feeds is
byte-stable.
"""
from __future__ import annotations

import os
import threading
from dataclasses import dataclass

import numpy as np

from .clock import VirtualClock, WallClock
from .replay import ReplayConfig, ReplaySummary, run_replay
from .signal import ActivationCalibration
from .sink import FrameLoop, FrameLoopConfig, SinkSummary
from .transport import EmpiricalDelay, LoopbackTransport, TransportStats

GOLDEN_DELAY_SAMPLES_MS = (2.98, 2.98, 5.40, 8.00, 8.00)
GOLDEN_DELAY_SEED = 20
GOLDEN_PACKETS = 5000
GOLDEN_RATE_HZ = 75.0
GOLDEN_FPS = 60.0
GOLDEN_EMG_SEED = 7
GOLDEN_ANALYZER_SEED = 42


@dataclass
class PipelineResult:
    pub_log_path: str
    sink_log_path: str
    replay: ReplaySummary
    sink: SinkSummary
    transport: TransportStats


def run_loopback_pipeline(
    replay_cfg: ReplayConfig,
    frame_cfg: FrameLoopConfig,
    delay_model,
    sink_log_path,
    cal: ActivationCalibration = ActivationCalibration(),
    virtual: bool = True,
) -> PipelineResult:
    clock = VirtualClock() if virtual else WallClock()
    transport = LoopbackTransport(clock, delay_model)
    loop = FrameLoop(frame_cfg, sink_log_path, clock, cal)
    transport.subscribe(replay_cfg.topics.data_topic, loop.on_payload)
    if virtual:
        try:
            loop.start_events()
            replay_summary = run_replay(replay_cfg, transport, clock)
            loop.publisher_done = True
            clock.run_until_idle()
            while loop.pending() > 0:
                loop.resume_events()
                clock.run_until_idle()
        finally:
            loop.close()
    else:
        sink_thread = threading.Thread(
            target=loop.run, kwargs={"idle_timeout_s": 5.0}, daemon=True
        )
        sink_thread.start()
        replay_summary = run_replay(replay_cfg, transport, clock)
        loop.publisher_done = True
        sink_thread.join(timeout=60.0)
    transport.close()
    return PipelineResult(
        pub_log_path=replay_cfg.log_path,
        sink_log_path=str(sink_log_path),
        replay=replay_summary,
        sink=loop.summary,
        transport=transport.stats,
    )


def synthesize_emg_csv(path, rate_hz: float = 300.0, n_samples: int = 20000,
                       seed: int = GOLDEN_EMG_SEED, start_time_ms: int = 0) -> None:
    """Write a deterministic EMG-like CSV: noise under a slow tension cycle."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / rate_hz
    envelope_mv = 0.05 + 0.45 * np.abs(np.sin(2 * np.pi * t / 30.0))
    samples = rng.normal(0.0, 1.0, n_samples) * envelope_mv
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# rate_hz={rate_hz:g} start_time_ms={start_time_ms}\n")
        fh.write("ch0\n")
        for v in samples:
            fh.write(f"{v:.6f}\n")


def golden_delay_model() -> EmpiricalDelay:
    return EmpiricalDelay(GOLDEN_DELAY_SAMPLES_MS, seed=GOLDEN_DELAY_SEED)


def run_golden_pipeline(work_dir, virtual: bool = True) -> PipelineResult:
    """The pinned loopback run; all inputs synthesized and seeded."""
    work_dir = str(work_dir)
    os.makedirs(work_dir, exist_ok=True)
    input_csv = os.path.join(work_dir, "golden_emg.csv")
    # 20,000 samples at 300 Hz decimate to exactly GOLDEN_PACKETS at 75 Hz
    synthesize_emg_csv(input_csv, rate_hz=300.0, n_samples=4 * GOLDEN_PACKETS)
    replay_cfg = ReplayConfig(
        input_path=input_csv,
        target_rate_hz=GOLDEN_RATE_HZ,
        log_path=os.path.join(work_dir, "publish_log.csv"),
    )
    frame_cfg = FrameLoopConfig(frame_rate_hz=GOLDEN_FPS, render_work_ms=0.0)
    return run_loopback_pipeline(
        replay_cfg,
        frame_cfg,
        golden_delay_model(),
        sink_log_path=os.path.join(work_dir, "sink_log.csv"),
        virtual=virtual,
    )
