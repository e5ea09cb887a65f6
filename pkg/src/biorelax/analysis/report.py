"""Latency report: per-stage descriptors, tests, ECDF/histogram data, and the
text/JSON renderers.

The text table is deterministic (ASCII, fixed decimals) and golden-tested;
the JSON form carries the full report and round-trips losslessly through
``report_from_json``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .merge import LatencyRecord, MergeDiagnostics
from .stats import (
    Histogram,
    StageStats,
    TestResult,
    bootstrap_median_ci,
    descriptive_stats,
    ecdf,
    histogram,
    one_sided_t_test,
    threshold_fraction,
    wilcoxon_signed_rank,
)

SCHEMA_VERSION = 1

STAGE_NAMES = ("processing", "network", "rendering", "end_to_end")

DEFAULT_TARGETS_MS = (30.0, 50.0)
DEFAULT_THRESHOLDS_MS = (30.0, 45.0, 50.0)


@dataclass
class LatencyReport:
    schema_version: int
    n: int
    stages: dict  # stage name -> StageStats
    t_tests: list  # TestResult per target, end-to-end
    wilcoxon: TestResult
    bootstrap_ci: tuple
    bootstrap_n_boot: int
    bootstrap_confidence: float
    bootstrap_seed: int
    ecdf_points: list  # (value, cumulative fraction)
    histogram: Histogram
    threshold_fractions: dict  # threshold ms -> fraction <= threshold
    drop_count: int
    duplicate_count: int
    dropped_seqs: list
    publish_clock: str = ""
    sink_clock: str = ""
    clock_mismatch: bool = False
    network_from: str = "rms"


def build_report(
    records: Sequence[LatencyRecord],
    diagnostics: Optional[MergeDiagnostics] = None,
    targets_ms: Sequence[float] = DEFAULT_TARGETS_MS,
    thresholds_ms: Sequence[float] = DEFAULT_THRESHOLDS_MS,
    n_boot: int = 10_000,
    confidence: float = 0.95,
    seed: int = 0,
    histogram_bin_ms: float = 1.0,
    histogram_truncate_ms: float = 45.0,
    network_from: str = "rms",
) -> LatencyReport:
    if not records:
        raise ValueError("cannot build a report from zero records")
    diagnostics = diagnostics or MergeDiagnostics()
    by_stage = {
        "processing": [r.processing_ms for r in records],
        "network": [r.network_ms for r in records],
        "rendering": [r.rendering_ms for r in records],
        "end_to_end": [r.end_to_end_ms for r in records],
    }
    e2e = by_stage["end_to_end"]
    stages = {name: descriptive_stats(values) for name, values in by_stage.items()}
    e2e_stats = stages["end_to_end"]
    t_tests = [
        one_sided_t_test(e2e_stats.mean, e2e_stats.sd, e2e_stats.n, target)
        for target in targets_ms
    ]
    return LatencyReport(
        schema_version=SCHEMA_VERSION,
        n=len(records),
        stages=stages,
        t_tests=t_tests,
        wilcoxon=wilcoxon_signed_rank(e2e, targets_ms[0]),
        bootstrap_ci=bootstrap_median_ci(e2e, n_boot=n_boot, confidence=confidence, seed=seed),
        bootstrap_n_boot=n_boot,
        bootstrap_confidence=confidence,
        bootstrap_seed=seed,
        ecdf_points=ecdf(e2e),
        histogram=histogram(e2e, histogram_bin_ms, histogram_truncate_ms),
        threshold_fractions={t: threshold_fraction(e2e, t) for t in thresholds_ms},
        drop_count=diagnostics.drop_count,
        duplicate_count=diagnostics.duplicate_count,
        dropped_seqs=list(diagnostics.dropped_seqs[:50]),
        publish_clock=diagnostics.publish_clock,
        sink_clock=diagnostics.sink_clock,
        clock_mismatch=diagnostics.clock_mismatch,
        network_from=network_from,
    )


# -- text ---------------------------------------------------------------------


def _p_phrase(t: TestResult) -> str:
    text = t.p_text
    return f"p {text}" if text.startswith("<") else f"p = {text}"


def render_text(report: LatencyReport) -> str:
    lines = []
    lines.append(f"Latency descriptors per pipeline stage (n = {report.n}; all times in ms)")
    lines.append("")
    lines.append(f"{'stage':<12}{'n':>7}  {'mean +/- sd':>18}  {'median [IQR]':>24}"
                 f"  {'p95':>8}  {'min':>8}  {'max':>8}")
    for name in STAGE_NAMES:
        s = report.stages[name]
        mean_sd = f"{s.mean:.2f} +/- {s.sd:.2f}"
        med_iqr = f"{s.median:.2f} [{s.q25:.2f}-{s.q75:.2f}]"
        lines.append(f"{name:<12}{s.n:>7}  {mean_sd:>18}  {med_iqr:>24}"
                     f"  {s.p95:>8.2f}  {s.min:>8.2f}  {s.max:>8.2f}")
    lines.append("")
    lines.append("end-to-end one-sided t-tests (mean < target):")
    for t in report.t_tests:
        lines.append(
            f"  target {t.target_ms:g} ms: delta = {t.delta_ms:+.2f}, "
            f"t({t.degrees_of_freedom}) = {t.statistic:.2f}, {_p_phrase(t)}"
        )
    w = report.wilcoxon
    lines.append(
        f"wilcoxon signed-rank vs {w.target_ms:g} ms ({w.method}): "
        f"W+ = {w.statistic:.1f}, {_p_phrase(w)}"
    )
    lo, hi = report.bootstrap_ci
    lines.append(
        f"bootstrap {report.bootstrap_confidence:.0%} CI of the median "
        f"({report.bootstrap_n_boot} resamples, seed {report.bootstrap_seed}): "
        f"[{lo:.3f}, {hi:.3f}]"
    )
    fractions = "  ".join(
        f"<= {t:g} ms: {f:.5f}" for t, f in sorted(report.threshold_fractions.items())
    )
    lines.append(f"threshold fractions: {fractions}")
    h = report.histogram
    lines.append(
        f"histogram: {len(h.counts)} bins of {h.bin_width_ms:g} ms from "
        f"{h.first_bin_start_ms:g} ms, truncated at {h.truncate_at_ms:g} ms, "
        f"overflow = {h.overflow} ({h.overflow / h.n:.4%} of {h.n})"
    )
    lines.append(
        f"merge: matched = {report.n}, drops = {report.drop_count}, "
        f"duplicates = {report.duplicate_count}, "
        f"clocks = {report.publish_clock or '?'}/{report.sink_clock or '?'}"
        + (" (MISMATCH)" if report.clock_mismatch else "")
        + f", network stage from t_{report.network_from}"
    )
    return "\n".join(lines) + "\n"


# -- JSON -----------------------------------------------------------------------


def report_to_json(report: LatencyReport) -> str:
    doc = {
        "schema_version": report.schema_version,
        "n": report.n,
        "stages": {
            name: vars(s).copy() for name, s in report.stages.items()
        },
        "t_tests": [_test_to_dict(t) for t in report.t_tests],
        "wilcoxon": _test_to_dict(report.wilcoxon),
        "bootstrap": {
            "ci": list(report.bootstrap_ci),
            "n_boot": report.bootstrap_n_boot,
            "confidence": report.bootstrap_confidence,
            "seed": report.bootstrap_seed,
        },
        "ecdf": [[v, f] for v, f in report.ecdf_points],
        "histogram": {
            "bin_width_ms": report.histogram.bin_width_ms,
            "truncate_at_ms": report.histogram.truncate_at_ms,
            "first_bin_start_ms": report.histogram.first_bin_start_ms,
            "counts": list(report.histogram.counts),
            "overflow": report.histogram.overflow,
            "n": report.histogram.n,
        },
        "threshold_fractions": {f"{t:g}": f for t, f in report.threshold_fractions.items()},
        "merge": {
            "drop_count": report.drop_count,
            "duplicate_count": report.duplicate_count,
            "dropped_seqs": report.dropped_seqs,
            "publish_clock": report.publish_clock,
            "sink_clock": report.sink_clock,
            "clock_mismatch": report.clock_mismatch,
        },
        "network_from": report.network_from,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _test_to_dict(t: TestResult) -> dict:
    return {
        "statistic": t.statistic,
        "degrees_of_freedom": t.degrees_of_freedom,
        "p_value": t.p_value,
        "p_text": t.p_text,
        "target_ms": t.target_ms,
        "delta_ms": t.delta_ms,
        "method": t.method,
    }


def _test_from_dict(d: dict) -> TestResult:
    return TestResult(
        statistic=d["statistic"],
        degrees_of_freedom=d["degrees_of_freedom"],
        p_value=d["p_value"],
        target_ms=d["target_ms"],
        delta_ms=d["delta_ms"],
        method=d["method"],
    )


def report_from_json(text: str) -> LatencyReport:
    doc = json.loads(text)
    h = doc["histogram"]
    return LatencyReport(
        schema_version=doc["schema_version"],
        n=doc["n"],
        stages={name: StageStats(**s) for name, s in doc["stages"].items()},
        t_tests=[_test_from_dict(t) for t in doc["t_tests"]],
        wilcoxon=_test_from_dict(doc["wilcoxon"]),
        bootstrap_ci=tuple(doc["bootstrap"]["ci"]),
        bootstrap_n_boot=doc["bootstrap"]["n_boot"],
        bootstrap_confidence=doc["bootstrap"]["confidence"],
        bootstrap_seed=doc["bootstrap"]["seed"],
        ecdf_points=[(v, f) for v, f in doc["ecdf"]],
        histogram=Histogram(
            bin_width_ms=h["bin_width_ms"],
            truncate_at_ms=h["truncate_at_ms"],
            first_bin_start_ms=h["first_bin_start_ms"],
            counts=tuple(h["counts"]),
            overflow=h["overflow"],
            n=h["n"],
        ),
        threshold_fractions={float(t): f for t, f in doc["threshold_fractions"].items()},
        drop_count=doc["merge"]["drop_count"],
        duplicate_count=doc["merge"]["duplicate_count"],
        dropped_seqs=doc["merge"]["dropped_seqs"],
        publish_clock=doc["merge"]["publish_clock"],
        sink_clock=doc["merge"]["sink_clock"],
        clock_mismatch=doc["merge"]["clock_mismatch"],
        network_from=doc["network_from"],
    )
