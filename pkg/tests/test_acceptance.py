"""Acceptance suite: every exit criterion at its stated tolerance, one
pass/fail line each (run with ``pytest tests/test_acceptance.py -v -s``).
"""
import pathlib
import timeit
import xml.etree.ElementTree as ET
from contextlib import contextmanager

import numpy as np
import pytest

from biorelax.analysis import (
    bootstrap_median_ci,
    build_report,
    descriptive_stats,
    ecdf,
    histogram,
    merge_logs,
    one_sided_t_test,
    render_text,
    report_from_json,
    report_to_json,
    render_svgs,
    threshold_fraction,
    wilcoxon_signed_rank,
)
from biorelax.pipeline import GOLDEN_ANALYZER_SEED, run_golden_pipeline
from biorelax.signal import SampleSeries, decimate, rms_envelope

from test_stats import enumerate_signed_rank_p, sort_based_stats

DATA_DIR = pathlib.Path(__file__).resolve().parent / "data"


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"\n[FAIL] {name}")
        raise
    print(f"\n[PASS] {name}")


@pytest.fixture(scope="session")
def golden(tmp_path_factory):
    """One golden loopback run shared by the criteria that consume it."""
    workdir = tmp_path_factory.mktemp("golden")
    result = run_golden_pipeline(workdir)
    records, diagnostics = merge_logs(result.pub_log_path, result.sink_log_path)
    report = build_report(records, diagnostics, seed=GOLDEN_ANALYZER_SEED)
    return result, records, diagnostics, report


def test_c1_t_statistic_reproduction_summary_path():
    with criterion("C1 t-statistic reproduction (summary path, < 1 ms)"):
        vs50 = one_sided_t_test(25.34, 54.8, 87716, 50.0)
        assert vs50.statistic == pytest.approx(-133.3, abs=0.3)
        assert vs50.p_text == "< 1e-300"
        vs30 = one_sided_t_test(25.34, 54.8, 87716, 30.0)
        assert vs30.statistic == pytest.approx(-25.2, abs=0.1)
        assert 5.9e-141 <= vs30.p_value <= 5.9e-139  # one order of magnitude
        per_call_s = timeit.timeit(
            lambda: one_sided_t_test(25.34, 54.8, 87716, 50.0), number=200) / 200
        assert per_call_s < 1e-3


def test_c2_stage_sum_identity(golden):
    _, records, _, _ = golden
    with criterion("C2 stage-sum identity exact on 100% of merged records"):
        assert len(records) == 5000
        exact = [r.end_to_end_ms == r.processing_ms + r.network_ms + r.rendering_ms
                 for r in records]
        assert all(exact)


def test_c3_loopback_golden_run(golden):
    result, _, diagnostics, report = golden
    with criterion("C3 loopback golden run (5,000 pkts, 75 Hz, 60 Hz sink)"):
        net = report.stages["network"]
        assert net.q25 == pytest.approx(2.98, abs=0.5)
        assert net.q75 == pytest.approx(8.00, abs=0.5)
        rendering_mean = report.stages["rendering"].mean
        assert rendering_mean == pytest.approx(1000.0 / 60.0 / 2.0, rel=0.15)
        assert diagnostics.drop_count == 0
        assert result.replay.achieved_rate_hz == pytest.approx(75.0, rel=0.05)


def test_c4_threshold_fraction_machinery():
    with criterion("C4 threshold fraction on constructed 0.7%-tail dataset"):
        rng = np.random.default_rng(8)
        n = 10_000
        n_above = 70  # exactly 0.7 % above 50 ms
        below = rng.uniform(5.0, 49.0, size=n - n_above)
        above = rng.uniform(51.0, 400.0, size=n_above)
        xs = np.concatenate([below, above])
        rng.shuffle(xs)
        assert threshold_fraction(xs, 50.0) == pytest.approx(0.993, abs=0.0005)


def test_c5_statistics_oracles():
    rng = np.random.default_rng(501)
    with criterion("C5 statistics oracles (descriptors, wilcoxon, bootstrap)"):
        for _ in range(1000):
            xs = rng.normal(rng.uniform(-40, 40), rng.uniform(0.1, 25),
                            size=int(rng.integers(1, 120)))
            got = descriptive_stats(xs)
            want = sort_based_stats(xs)
            for field, expected in want.items():
                assert getattr(got, field) == expected, field
        checked = 0
        while checked < 200:
            n = int(rng.integers(1, 11))
            xs = np.round(rng.normal(10, 4, size=n), 2)
            target = float(np.round(rng.uniform(5, 15), 2))
            if np.all(xs == target):
                continue
            got_p = wilcoxon_signed_rank(xs, target).p_value
            assert got_p == pytest.approx(enumerate_signed_rank_p(xs, target),
                                          rel=1e-12)
            checked += 1
        data = rng.normal(20, 4, size=400)
        assert bootstrap_median_ci(data, seed=9) == bootstrap_median_ci(data, seed=9)
        assert bootstrap_median_ci([3.25] * 64, seed=1) == (3.25, 3.25)


def test_c6_rms_and_decimation_properties():
    rng = np.random.default_rng(601)
    with criterion("C6 RMS envelope and decimation properties"):
        for c in (-2.5, 0.0, 0.125, 7.0):
            series = SampleSeries(0, 100, np.full(64, c))
            assert np.allclose(rms_envelope(series, 50).values, abs(c), rtol=1e-12)
        for _ in range(100):
            values = rng.normal(size=int(rng.integers(2, 300)))
            rate = float(rng.integers(50, 2000))
            window = float(rng.uniform(1000.0 / rate, 100.0))
            a = rms_envelope(SampleSeries(0, rate, values), window).values
            b = rms_envelope(SampleSeries(0, rate, -values), window).values
            assert np.array_equal(a, b)
        for k in (2, 3, 4, 7, 10):
            n = 40 * k + int(rng.integers(0, k))
            values = rng.normal(size=n)
            out = decimate(SampleSeries(0, 1000.0 * k, values), 1000.0)
            expected = values[k - 1::k]
            if n % k:
                expected = np.append(expected, values[-1])
            assert np.array_equal(out.values, expected)


def test_c7_histogram_and_ecdf_structure():
    rng = np.random.default_rng(701)
    with criterion("C7 histogram totals and ECDF structure on random inputs"):
        for _ in range(1000):
            xs = rng.normal(rng.uniform(-10, 60), rng.uniform(0.5, 40),
                            size=int(rng.integers(1, 200)))
            h = histogram(xs, bin_width_ms=float(rng.uniform(0.5, 5.0)),
                          truncate_at_ms=float(rng.uniform(1.0, 80.0)))
            assert sum(h.counts) + h.overflow == len(xs)
            points = ecdf(xs)
            fracs = [f for _, f in points]
            values = [v for v, _ in points]
            assert fracs == sorted(fracs)
            assert values == sorted(values)
            assert fracs[-1] == 1.0


def test_c8_report_rendering(golden):
    _, _, _, report = golden
    with criterion("C8 report rendering (golden bytes, JSON round trip, SVG)"):
        golden_text = (DATA_DIR / "golden_report.txt").read_text()
        assert render_text(report) == golden_text
        assert report_from_json(report_to_json(report)) == report
        for name, svg_text in render_svgs(report).items():
            root = ET.fromstring(svg_text)
            assert root.tag.endswith("svg"), name
