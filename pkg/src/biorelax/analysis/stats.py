"""Descriptive statistics, one-sample location tests, bootstrap CI, ECDF and
histogram machinery for latency samples.

Quantiles use linear interpolation between closest ranks (the common
"type 7" convention) everywhere, pinned by golden tests. Sums are computed
with exactly-rounded accumulation (math.fsum), so results do not depend on
reduction order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

P_VALUE_FLOOR = 1e-300


@dataclass(frozen=True)
class StageStats:
    n: int
    mean: float
    sd: float
    median: float
    q25: float
    q75: float
    p95: float
    min: float
    max: float


@dataclass(frozen=True)
class TestResult:
    statistic: float
    degrees_of_freedom: Optional[int]
    p_value: float
    target_ms: float
    delta_ms: float
    method: str

    @property
    def p_text(self) -> str:
        if self.p_value < P_VALUE_FLOOR:
            return "< 1e-300"
        return f"{self.p_value:.3g}"


def quantile_type7(sorted_values: np.ndarray, q: float) -> float:
    """Linear interpolation between closest order statistics."""
    n = sorted_values.size
    if n == 1:
        return float(sorted_values[0])
    h = (n - 1) * q
    lo = int(math.floor(h))
    g = h - lo
    if g == 0.0:
        return float(sorted_values[lo])
    return float(sorted_values[lo] + g * (sorted_values[lo + 1] - sorted_values[lo]))


def descriptive_stats(samples: Sequence[float]) -> StageStats:
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("descriptive_stats needs at least one sample")
    mean = math.fsum(xs) / n
    if n > 1:
        sd = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1))
    else:
        sd = 0.0
    return StageStats(
        n=int(n),
        mean=mean,
        sd=sd,
        median=quantile_type7(xs, 0.50),
        q25=quantile_type7(xs, 0.25),
        q75=quantile_type7(xs, 0.75),
        p95=quantile_type7(xs, 0.95),
        min=float(xs[0]),
        max=float(xs[-1]),
    )


def one_sided_t_test(mean: float, sd: float, n: int, target_ms: float) -> TestResult:
    """One-sample t against ``mean < target``, from summary statistics.

    The p-value comes from the Student-t lower tail (regularized incomplete
    beta via scipy); it stays accurate far beyond where a normal
    approximation would be needed, so none is used. Values below 1e-300
    render as "< 1e-300". sd == 0 degenerates to p = 0 or 1.
    """
    if n < 2:
        raise ValueError("t-test needs n >= 2")
    delta = mean - target_ms
    if sd == 0:
        statistic = math.inf if delta > 0 else (-math.inf if delta < 0 else 0.0)
        p = 0.0 if delta < 0 else 1.0
        return TestResult(statistic, n - 1, p, target_ms, delta, "t-degenerate")
    t = delta / (sd / math.sqrt(n))
    p = float(special.stdtr(n - 1, t))
    return TestResult(t, n - 1, p, target_ms, delta, "t")


def one_sided_t_test_from_samples(samples: Sequence[float], target_ms: float) -> TestResult:
    s = descriptive_stats(samples)
    return one_sided_t_test(s.mean, s.sd, s.n, target_ms)


def _average_ranks(abs_d: np.ndarray) -> np.ndarray:
    """Ranks 1..n of |d| with ties sharing the average of their rank range."""
    order = np.argsort(abs_d, kind="stable")
    ranks = np.empty(abs_d.size, dtype=float)
    i = 0
    while i < abs_d.size:
        j = i
        while j + 1 < abs_d.size and abs_d[order[j + 1]] == abs_d[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


EXACT_WILCOXON_MAX_N = 25


def wilcoxon_signed_rank(samples: Sequence[float], target_ms: float) -> TestResult:
    """One-sided (less) signed-rank test of location against ``target_ms``.

    Exact-zero differences are dropped (standard practice). For n <= 25 the
    p-value is exact, from the full sign-assignment distribution of the
    observed ranks (ties included, via dynamic programming over doubled
    ranks); beyond that, normal approximation with continuity and tie
    corrections.
    """
    xs = np.asarray(samples, dtype=float)
    d = xs - target_ms
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        raise ValueError("all differences are zero; signed-rank test undefined")
    abs_d = np.abs(d)
    ranks = _average_ranks(abs_d)
    w_plus = float(ranks[d > 0].sum())
    delta = float(np.mean(xs)) - target_ms
    if n <= EXACT_WILCOXON_MAX_N:
        p = _exact_signed_rank_p(ranks, w_plus)
        method = "wilcoxon-exact"
    else:
        mu = n * (n + 1) / 4.0
        _, counts = np.unique(abs_d, return_counts=True)
        tie_term = float(np.sum(counts**3 - counts))
        sigma2 = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
        z = (w_plus - mu + 0.5) / math.sqrt(sigma2)
        p = 0.5 * math.erfc(-z / math.sqrt(2.0))
        method = "wilcoxon-normal"
    return TestResult(w_plus, None, p, target_ms, delta, method)


def _exact_signed_rank_p(ranks: np.ndarray, w_plus: float) -> float:
    """P(W+ <= observed) over all 2^n equally likely sign assignments."""
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        counts[r:] += counts[:-r].copy()
    w2 = int(round(2.0 * w_plus))
    return float(counts[: w2 + 1].sum() / 2.0 ** len(ranks))


def bootstrap_median_ci(
    samples: Sequence[float],
    n_boot: int = 10_000,
    confidence: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile-method CI of the median over seeded resamples."""
    xs = np.asarray(samples, dtype=float)
    n = xs.size
    if n < 2:
        raise ValueError("bootstrap needs n >= 2")
    rng = np.random.default_rng(seed)
    medians = np.empty(n_boot, dtype=float)
    chunk = 64
    for start in range(0, n_boot, chunk):
        k = min(chunk, n_boot - start)
        idx = rng.integers(0, n, size=(k, n))
        medians[start:start + k] = np.median(xs[idx], axis=1)
    medians.sort()
    alpha = (1.0 - confidence) / 2.0
    return quantile_type7(medians, alpha), quantile_type7(medians, 1.0 - alpha)


def ecdf(samples: Sequence[float]) -> list[tuple[float, float]]:
    """Right-continuous step points: (value, fraction of samples <= value)."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("ecdf needs at least one sample")
    values, last_index = np.unique(xs, return_index=True)
    cum_counts = np.append(last_index[1:], n)
    return [(float(v), float(c) / n) for v, c in zip(values, cum_counts)]


def threshold_fraction(samples: Sequence[float], threshold_ms: float) -> float:
    xs = np.asarray(samples, dtype=float)
    if xs.size == 0:
        raise ValueError("threshold_fraction needs at least one sample")
    return float(np.count_nonzero(xs <= threshold_ms)) / xs.size


@dataclass(frozen=True)
class Histogram:
    bin_width_ms: float
    truncate_at_ms: float
    first_bin_start_ms: float
    counts: tuple  # per-bin counts, bin k covers [start + k*w, start + (k+1)*w)
    overflow: int  # samples at or beyond the truncation point
    n: int

    def bin_edges(self) -> list[float]:
        return [self.first_bin_start_ms + k * self.bin_width_ms
                for k in range(len(self.counts) + 1)]


def histogram(samples: Sequence[float], bin_width_ms: float = 1.0,
              truncate_at_ms: float = 45.0) -> Histogram:
    """Left-closed fixed-width bins with a separate overflow bucket.

    Bins cover whole multiples of the width from the smallest sample's bin up
    to the truncation point; samples >= the truncation point land in the
    overflow bucket, so bin counts plus overflow always equal n.
    """
    if bin_width_ms <= 0:
        raise ValueError("bin_width_ms must be positive")
    xs = np.asarray(samples, dtype=float)
    n = xs.size
    below = xs[xs < truncate_at_ms]
    overflow = int(n - below.size)
    if below.size == 0:
        return Histogram(bin_width_ms, truncate_at_ms, 0.0, (), overflow, int(n))
    ks = np.floor(below / bin_width_ms).astype(np.int64)
    k_min = int(min(ks.min(), 0))
    k_max = int(math.ceil(truncate_at_ms / bin_width_ms)) - 1
    counts = np.bincount(ks - k_min, minlength=k_max - k_min + 1)
    return Histogram(
        bin_width_ms=bin_width_ms,
        truncate_at_ms=truncate_at_ms,
        first_bin_start_ms=k_min * bin_width_ms,
        counts=tuple(int(c) for c in counts),
        overflow=overflow,
        n=int(n),
    )
