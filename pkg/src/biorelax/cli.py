"""Command-line entry points: replay, sink, analyze, pipeline.

``replay`` and ``sink`` are the two halves of a broker-mode run on separate
processes (or machines); ``pipeline`` wires both through the in-process
loopback, optionally on the virtual clock for an instant deterministic run;
``analyze`` merges the two logs and renders the report.
"""
from __future__ import annotations

import argparse
import os
import sys

from .clock import WallClock
from .analysis import build_report, merge_logs, render_report
from .pipeline import (
    golden_delay_model,
    run_golden_pipeline,
    run_loopback_pipeline,
    synthesize_emg_csv,
)
from .replay import ReplayConfig, run_replay
from .signal import ActivationCalibration
from .sink import FrameLoopConfig, JitterSpec, run_sink
from .transport import (
    ConstantDelay,
    EmpiricalDelay,
    TransportConfig,
    UniformDelay,
)
from .wire import TopicMap


def _add_transport_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--broker", metavar="HOST:PORT",
                       help="MQTT 3.1.1 broker (BIORELAX_BROKER overrides)")
    group.add_argument("--loopback", action="store_true",
                       help="in-process loopback transport")
    p.add_argument("--topic", default=TopicMap().data_topic, help="data topic")


def _make_transport(args, clock):
    if args.broker:
        cfg = TransportConfig(mode="broker", broker_uri=args.broker)
    else:
        cfg = TransportConfig(mode="loopback", delay_model=_parse_delay(getattr(args, "delay", "constant:0")))
    return cfg.create(clock)


def _parse_delay(spec: str):
    kind, _, rest = spec.partition(":")
    if kind == "constant":
        return ConstantDelay(float(rest or 0))
    if kind == "uniform":
        lo, hi = rest.split(":")
        return UniformDelay(float(lo), float(hi))
    if kind == "empirical":
        return EmpiricalDelay([float(v) for v in rest.split(",")])
    if kind == "golden":
        return golden_delay_model()
    raise ValueError(f"unknown delay model {spec!r}")


def _cmd_replay(args) -> int:
    clock = WallClock()
    transport = _make_transport(args, clock)
    cfg = ReplayConfig(
        input_path=args.input,
        channel=args.channel,
        window_ms=args.window_ms,
        target_rate_hz=args.rate,
        decimate=not args.no_decimate,
        rms_mode=args.rms_mode,
        duration_s=args.duration_s,
        log_path=args.log,
        topics=TopicMap(data_topic=args.topic),
        from_packets=args.from_packets,
    )
    summary = run_replay(cfg, transport, clock)
    transport.close()
    status = "PARTIAL" if summary.partial else "ok"
    print(f"replay {status}: {summary.packets_sent} packets, "
          f"achieved {summary.achieved_rate_hz:.2f} Hz "
          f"(target {summary.target_rate_hz:g} Hz), log: {cfg.log_path}")
    if summary.partial:
        print(f"  aborted: {summary.partial_reason}", file=sys.stderr)
        return 1
    return 0


def _cmd_sink(args) -> int:
    clock = WallClock()
    transport = _make_transport(args, clock)
    jitter = JitterSpec.parse(args.jitter, seed=args.seed) if args.jitter else None
    frame_cfg = FrameLoopConfig(
        frame_rate_hz=args.fps,
        render_work_ms=args.work_ms,
        jitter=jitter,
    )
    cal = ActivationCalibration(args.cal_rest, args.cal_max)
    summary = run_sink(
        transport, frame_cfg, args.log, clock,
        data_topic=args.topic, cal=cal,
        duration_s=args.duration_s, idle_timeout_s=args.idle_timeout_s,
    )
    transport.close()
    print(f"sink: {summary.packets_logged} packets over {summary.frames} frames "
          f"(malformed {summary.malformed}, overflow {summary.queue_overflow}, "
          f"skipped frames {summary.skipped_frames}), log: {args.log}")
    return 0


def _cmd_analyze(args) -> int:
    records, diagnostics = merge_logs(args.pub_log, args.sink_log,
                                      network_from=args.network_from)
    targets = tuple(float(v) for v in args.targets.split(","))
    report = build_report(
        records,
        diagnostics,
        targets_ms=targets,
        n_boot=args.n_boot,
        seed=args.seed,
        network_from=args.network_from,
    )
    formats = tuple(args.formats.split(","))
    written = render_report(report, args.out, formats=formats)
    for kind, path in written.items():
        print(f"wrote {kind}: {path}")
    if diagnostics.drop_count:
        print(f"note: {diagnostics.drop_count} packet(s) published but never rendered")
    if diagnostics.clock_mismatch:
        print("warning: publish and sink logs use different clock sources; "
              "cross-log differences may be offset", file=sys.stderr)
    return 0


def _cmd_pipeline(args) -> int:
    if args.golden:
        result = run_golden_pipeline(args.out, virtual=not args.real_clock)
    else:
        input_csv = args.input
        if input_csv is None:
            input_csv = os.path.join(args.out, "synth_emg.csv")
            os.makedirs(args.out, exist_ok=True)
            synthesize_emg_csv(input_csv, rate_hz=300.0,
                               n_samples=int(args.packets * 300.0 / args.rate))
        replay_cfg = ReplayConfig(
            input_path=input_csv,
            target_rate_hz=args.rate,
            log_path=f"{args.out}/publish_log.csv",
            duration_s=args.duration_s,
        )
        jitter = JitterSpec.parse(args.jitter, seed=args.seed) if args.jitter else None
        frame_cfg = FrameLoopConfig(frame_rate_hz=args.fps, render_work_ms=args.work_ms,
                                    jitter=jitter)
        result = run_loopback_pipeline(
            replay_cfg, frame_cfg, _parse_delay(args.delay),
            sink_log_path=f"{args.out}/sink_log.csv",
            virtual=not args.real_clock,
        )
    print(f"pipeline: {result.replay.packets_sent} published at "
          f"{result.replay.achieved_rate_hz:.2f} Hz, "
          f"{result.sink.packets_logged} rendered over {result.sink.frames} frames")
    print(f"  logs: {result.pub_log_path} | {result.sink_log_path}")
    if args.analyze:
        records, diagnostics = merge_logs(result.pub_log_path, result.sink_log_path)
        report = build_report(records, diagnostics, seed=args.seed)
        written = render_report(report, args.out)
        for kind, path in written.items():
            print(f"  wrote {kind}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biorelax")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="pace RMS samples onto the wire")
    p.add_argument("--input", required=True, help="EMG CSV (or packet JSONL with --from-packets)")
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--rate", type=float, default=75.0, help="target publish rate (Hz)")
    p.add_argument("--window-ms", type=float, default=64.0)
    p.add_argument("--no-decimate", action="store_true",
                   help="publish every input sample at the input rate")
    p.add_argument("--rms-mode", choices=("precomputed", "streaming"), default="precomputed")
    p.add_argument("--from-packets", action="store_true",
                   help="input is a packet-capture JSONL; preserves per-packet RMS offsets")
    p.add_argument("--log", required=True, help="publish log output path")
    p.add_argument("--duration-s", type=float, default=None)
    _add_transport_args(p)
    p.set_defaults(fn=_cmd_replay)

    p = sub.add_parser("sink", help="frame-loop subscriber writing the sink log")
    p.add_argument("--fps", type=float, default=60.0)
    p.add_argument("--work-ms", type=float, default=0.0, help="simulated render work per frame")
    p.add_argument("--jitter", default=None, metavar="FRAC:LO:HI",
                   help="heavy-tail stalls, e.g. 0.01:50:120")
    p.add_argument("--log", required=True, help="sink log output path")
    p.add_argument("--duration-s", type=float, default=None)
    p.add_argument("--idle-timeout-s", type=float, default=10.0)
    p.add_argument("--cal-rest", type=float, default=0.0)
    p.add_argument("--cal-max", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    _add_transport_args(p)
    p.set_defaults(fn=_cmd_sink)

    p = sub.add_parser("analyze", help="merge logs and render the latency report")
    p.add_argument("--pub-log", required=True)
    p.add_argument("--sink-log", required=True)
    p.add_argument("--targets", default="30,50", help="t-test targets in ms")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--formats", default="text,json,svg")
    p.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    p.add_argument("--n-boot", type=int, default=10000)
    p.add_argument("--network-from", choices=("rms", "publish"), default="rms")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("pipeline", help="replay + sink over in-process loopback")
    p.add_argument("--out", required=True, help="directory for logs and reports")
    p.add_argument("--input", default=None, help="EMG CSV (synthesized when omitted)")
    p.add_argument("--packets", type=int, default=5000)
    p.add_argument("--rate", type=float, default=75.0)
    p.add_argument("--fps", type=float, default=60.0)
    p.add_argument("--work-ms", type=float, default=0.0)
    p.add_argument("--jitter", default=None, metavar="FRAC:LO:HI")
    p.add_argument("--delay", default="golden",
                   help="loopback delay model: constant:MS | uniform:LO:HI | "
                        "empirical:A,B,... | golden")
    p.add_argument("--duration-s", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--golden", action="store_true", help="run the pinned golden configuration")
    p.add_argument("--real-clock", action="store_true",
                   help="run in real time instead of the virtual clock")
    p.add_argument("--analyze", action="store_true", help="also run the analyzer")
    p.set_defaults(fn=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
