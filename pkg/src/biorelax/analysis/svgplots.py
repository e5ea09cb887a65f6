"""Deterministic SVG plots for the latency report: end-to-end ECDF with
threshold bands, per-stage box plots, and the truncated histogram.

Everything is emitted as plain SVG text with fixed float formatting, so
output files diff cleanly and need no plotting dependency.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

from .report import LatencyReport

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 60, 20, 28, 46  # margins

_COMFORT_BAND_MS = 50.0
_ACCEPTABLE_BAND_MS = 100.0
_HISTOGRAM_MARKER_MS = 30.0


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Canvas:
    def __init__(self, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">',
            f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W / 2}" y="18" text-anchor="middle" font-family="sans-serif" '
            f'font-size="13" fill="#222">{escape(title)}</text>',
        ]

    def rect(self, x, y, w, h, fill, opacity=1.0):
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'fill="{fill}" fill-opacity="{opacity:g}"/>'
        )

    def line(self, x1, y1, x2, y2, stroke="#444", width=1.0, dash=None):
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{width:g}"{dash_attr}/>'
        )

    def polyline(self, points, stroke="#1f4e9c", width=1.5):
        path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        self.parts.append(
            f'<polyline points="{path}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width:g}"/>'
        )

    def text(self, x, y, s, size=10, anchor="middle", fill="#333"):
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="{size}" fill="{fill}">{escape(s)}</text>'
        )

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


class _Axes:
    """Linear data-to-pixel mapping inside the margins."""

    def __init__(self, x_min, x_max, y_min, y_max):
        self.x_min, self.x_max = x_min, x_max
        self.y_min, self.y_max = y_min, y_max

    def x(self, v) -> float:
        frac = (v - self.x_min) / (self.x_max - self.x_min)
        return _ML + frac * (_W - _ML - _MR)

    def y(self, v) -> float:
        frac = (v - self.y_min) / (self.y_max - self.y_min)
        return _H - _MB - frac * (_H - _MT - _MB)


def _draw_frame(c: _Canvas, ax: _Axes, x_label: str, y_label: str, x_ticks, y_ticks):
    c.line(ax.x(ax.x_min), ax.y(ax.y_min), ax.x(ax.x_max), ax.y(ax.y_min))
    c.line(ax.x(ax.x_min), ax.y(ax.y_min), ax.x(ax.x_min), ax.y(ax.y_max))
    for t in x_ticks:
        c.line(ax.x(t), ax.y(ax.y_min), ax.x(t), ax.y(ax.y_min) + 4)
        c.text(ax.x(t), ax.y(ax.y_min) + 16, f"{t:g}")
    for t in y_ticks:
        c.line(ax.x(ax.x_min) - 4, ax.y(t), ax.x(ax.x_min), ax.y(t))
        c.text(ax.x(ax.x_min) - 8, ax.y(t) + 3, f"{t:g}", anchor="end")
    c.text((_ML + _W - _MR) / 2, _H - 10, x_label, size=11)
    c.text(14, (_MT + _H - _MB) / 2, y_label, size=11, anchor="middle")


def render_ecdf_svg(report: LatencyReport) -> str:
    """Empirical CDF of end-to-end latency with comfort bands, the bootstrap
    median-CI band, and a dotted P95 marker."""
    points = report.ecdf_points
    x_max = max(_ACCEPTABLE_BAND_MS, points[-1][0] * 1.05)
    x_min = min(0.0, points[0][0])
    ax = _Axes(x_min, x_max, 0.0, 1.0)
    c = _Canvas(f"End-to-end latency ECDF (n = {report.n})")
    c.rect(ax.x(x_min), ax.y(1.0), ax.x(min(_COMFORT_BAND_MS, x_max)) - ax.x(x_min),
           ax.y(0.0) - ax.y(1.0), "#74c476", opacity=0.18)
    if x_max > _COMFORT_BAND_MS:
        c.rect(ax.x(_COMFORT_BAND_MS), ax.y(1.0),
               ax.x(min(_ACCEPTABLE_BAND_MS, x_max)) - ax.x(_COMFORT_BAND_MS),
               ax.y(0.0) - ax.y(1.0), "#fdae6b", opacity=0.18)
    lo, hi = report.bootstrap_ci
    c.rect(ax.x(lo), ax.y(1.0), max(ax.x(hi) - ax.x(lo), 1.0),
           ax.y(0.0) - ax.y(1.0), "#1f4e9c", opacity=0.25)
    p95 = report.stages["end_to_end"].p95
    c.line(ax.x(p95), ax.y(0.0), ax.x(p95), ax.y(1.0), stroke="#555", dash="3,3")
    c.text(ax.x(p95), ax.y(1.0) - 4, f"p95 = {p95:.1f} ms", size=9)
    steps = [(ax.x(x_min), ax.y(0.0))]
    prev_frac = 0.0
    for value, frac in points:
        steps.append((ax.x(value), ax.y(prev_frac)))
        steps.append((ax.x(value), ax.y(frac)))
        prev_frac = frac
    steps.append((ax.x(x_max), ax.y(1.0)))
    c.polyline(steps)
    _draw_frame(c, ax, "end-to-end latency (ms)", "fraction",
                x_ticks=[t for t in (0, 25, 50, 75, 100) if x_min <= t <= x_max],
                y_ticks=[0, 0.25, 0.5, 0.75, 1.0])
    return c.finish()


def render_box_svg(report: LatencyReport) -> str:
    """Box plots (median, IQR box, min/max whiskers) for the three stages."""
    stage_names = ("processing", "network", "rendering")
    stats = [report.stages[name] for name in stage_names]
    y_lo = min(0.0, min(s.min for s in stats))
    y_hi = max(s.max for s in stats) * 1.08 or 1.0
    ax = _Axes(0.0, 3.0, y_lo, y_hi)
    c = _Canvas("Per-stage latency distributions")
    for i, (name, s) in enumerate(zip(stage_names, stats)):
        cx = ax.x(i + 0.5)
        half = (ax.x(0.8) - ax.x(0.5))
        c.line(cx, ax.y(s.min), cx, ax.y(s.q25), stroke="#666")
        c.line(cx, ax.y(s.q75), cx, ax.y(s.max), stroke="#666")
        c.line(cx - half / 2, ax.y(s.min), cx + half / 2, ax.y(s.min), stroke="#666")
        c.line(cx - half / 2, ax.y(s.max), cx + half / 2, ax.y(s.max), stroke="#666")
        c.rect(cx - half, ax.y(s.q75), 2 * half, ax.y(s.q25) - ax.y(s.q75),
               "#9ecae1", opacity=0.8)
        c.line(cx - half, ax.y(s.median), cx + half, ax.y(s.median),
               stroke="#08306b", width=2.0)
        c.text(cx, _H - _MB + 16, name)
    if y_lo < 0:
        c.line(ax.x(0), ax.y(0), ax.x(3), ax.y(0), stroke="#bbb", dash="2,3")
    ticks = _nice_ticks(y_lo, y_hi)
    _draw_frame(c, ax, "", "latency (ms)", x_ticks=[], y_ticks=ticks)
    return c.finish()


def render_histogram_svg(report: LatencyReport) -> str:
    """End-to-end histogram, truncated axis, comfort marker, overflow note."""
    h = report.histogram
    x_min = min(0.0, h.first_bin_start_ms)
    x_max = h.truncate_at_ms
    peak = max(h.counts) if h.counts else 1
    ax = _Axes(x_min, x_max, 0.0, peak * 1.1 or 1.0)
    c = _Canvas(f"End-to-end latency histogram ({h.bin_width_ms:g} ms bins, "
                f"truncated at {h.truncate_at_ms:g} ms)")
    for k, count in enumerate(h.counts):
        if count == 0:
            continue
        x0 = h.first_bin_start_ms + k * h.bin_width_ms
        c.rect(ax.x(x0), ax.y(count), ax.x(x0 + h.bin_width_ms) - ax.x(x0) - 0.5,
               ax.y(0) - ax.y(count), "#4292c6", opacity=0.9)
    if x_min <= _HISTOGRAM_MARKER_MS <= x_max:
        c.line(ax.x(_HISTOGRAM_MARKER_MS), ax.y(0), ax.x(_HISTOGRAM_MARKER_MS),
               ax.y(peak * 1.1 or 1.0), stroke="#c00", dash="5,3", width=1.5)
        c.text(ax.x(_HISTOGRAM_MARKER_MS), _MT + 10, f"{_HISTOGRAM_MARKER_MS:g} ms", size=9,
               fill="#c00")
    covered = 1.0 - h.overflow / h.n if h.n else 1.0
    c.text(_W - _MR, _MT + 10, f"overflow beyond {h.truncate_at_ms:g} ms: "
           f"{h.overflow} ({covered:.1%} shown)", size=9, anchor="end")
    ticks = [t for t in range(0, int(x_max) + 1, max(5, int(x_max // 9) or 1))]
    _draw_frame(c, ax, "end-to-end latency (ms)", "packets",
                x_ticks=ticks, y_ticks=_nice_ticks(0, peak * 1.1 or 1.0))
    return c.finish()


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list:
    if hi <= lo:
        return [lo]
    raw_step = (hi - lo) / n
    magnitude = 10 ** int(f"{raw_step:e}".split("e")[1])
    for mult in (1, 2, 5, 10):
        if raw_step <= mult * magnitude:
            step = mult * magnitude
            break
    first = int(lo / step) * step
    ticks = []
    t = first
    while t <= hi:
        if t >= lo:
            ticks.append(round(t, 10))
        t += step
    return ticks


def render_svgs(report: LatencyReport) -> dict:
    return {
        "ecdf.svg": render_ecdf_svg(report),
        "stages_box.svg": render_box_svg(report),
        "histogram.svg": render_histogram_svg(report),
    }
