"""Latency analysis: log merging, statistics, and report rendering."""
from __future__ import annotations

import os

from .merge import LatencyRecord, MergeDiagnostics, MergeError, merge_logs
from .report import (
    DEFAULT_TARGETS_MS,
    DEFAULT_THRESHOLDS_MS,
    LatencyReport,
    build_report,
    render_text,
    report_from_json,
    report_to_json,
)
from .stats import (
    Histogram,
    StageStats,
    TestResult,
    bootstrap_median_ci,
    descriptive_stats,
    ecdf,
    histogram,
    one_sided_t_test,
    one_sided_t_test_from_samples,
    quantile_type7,
    threshold_fraction,
    wilcoxon_signed_rank,
)
from .svgplots import render_svgs

__all__ = [
    "LatencyRecord", "MergeDiagnostics", "MergeError", "merge_logs",
    "LatencyReport", "build_report", "render_text", "render_report",
    "report_to_json", "report_from_json",
    "DEFAULT_TARGETS_MS", "DEFAULT_THRESHOLDS_MS",
    "Histogram", "StageStats", "TestResult",
    "descriptive_stats", "one_sided_t_test", "one_sided_t_test_from_samples",
    "wilcoxon_signed_rank", "bootstrap_median_ci", "ecdf", "threshold_fraction",
    "histogram", "quantile_type7", "render_svgs",
]


def render_report(report: LatencyReport, out_dir, formats=("text", "json", "svg")) -> dict:
    """Write the requested report formats into ``out_dir``; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = {}
    if "text" in formats:
        path = os.path.join(out_dir, "report.txt")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_text(report))
        written["text"] = path
    if "json" in formats:
        path = os.path.join(out_dir, "report.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report_to_json(report))
        written["json"] = path
    if "svg" in formats:
        for name, svg_text in render_svgs(report).items():
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(svg_text)
            written[name] = path
    return written
