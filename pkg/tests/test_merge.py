import pytest

from biorelax.logs import (
    PUBLISH_COLUMNS,
    SINK_COLUMNS,
    LogFormatError,
    StageLogWriter,
    read_stage_log,
)
from biorelax.analysis import MergeError, merge_logs


def write_logs(tmp_path, pub_rows, sink_rows, pub_clock="wall", sink_clock="wall"):
    pub_path = tmp_path / "pub.csv"
    sink_path = tmp_path / "sink.csv"
    with StageLogWriter(pub_path, PUBLISH_COLUMNS, pub_clock, 0.0) as w:
        for row in pub_rows:
            w.write(*row)
    with StageLogWriter(sink_path, SINK_COLUMNS, sink_clock, 0.0) as w:
        for row in sink_rows:
            w.write(*row)
    return pub_path, sink_path


def pub_row(seq, base=1000.0):
    t = base + seq * 13.0
    return (seq, t, t + 0.5, t + 0.6)


def sink_row(seq, base=1000.0):
    t = base + seq * 13.0
    return (seq, t + 5.0, t + 12.0, t + 15.0)


def test_lossless_join_100(tmp_path):
    pub, sink = write_logs(tmp_path,
                           [pub_row(s) for s in range(100)],
                           [sink_row(s) for s in range(100)])
    records, diag = merge_logs(pub, sink)
    assert len(records) == 100
    assert diag.drop_count == 0
    assert diag.n_publish == diag.n_sink == 100


def test_two_drops_listed_by_seq(tmp_path):
    sink_rows = [sink_row(s) for s in range(100) if s not in (17, 55)]
    pub, sink = write_logs(tmp_path, [pub_row(s) for s in range(100)], sink_rows)
    records, diag = merge_logs(pub, sink)
    assert len(records) == 98
    assert diag.dropped_seqs == [17, 55]
    assert diag.drop_count == 2


def test_duplicate_seq_rejected(tmp_path):
    pub, sink = write_logs(tmp_path,
                           [pub_row(0), pub_row(1), pub_row(1)],
                           [sink_row(0), sink_row(1)])
    with pytest.raises(MergeError, match="duplicate seq 1"):
        merge_logs(pub, sink)


def test_phantom_sink_seq_rejected(tmp_path):
    pub, sink = write_logs(tmp_path,
                           [pub_row(0)],
                           [sink_row(0), sink_row(7)])
    with pytest.raises(MergeError, match="sink-only"):
        merge_logs(pub, sink)


def test_stage_differencing_values(tmp_path):
    pub, sink = write_logs(tmp_path, [pub_row(0)], [sink_row(0)])
    records, _ = merge_logs(pub, sink)
    r = records[0]
    assert r.processing_ms == pytest.approx(0.5, abs=1e-9)
    assert r.network_ms == pytest.approx(4.5, abs=1e-9)
    assert r.rendering_ms == pytest.approx(10.0, abs=1e-9)
    assert r.end_to_end_ms == pytest.approx(15.0, abs=1e-9)


def test_stage_sum_identity_exact(tmp_path, rng):
    # identity must hold bitwise, not approximately, for every record
    pub_rows, sink_rows = [], []
    for s in range(500):
        t = 1_700_000_000_000.0 + float(rng.uniform(0, 1e6))
        pub_rows.append((s, t, t + float(rng.uniform(0, 2)), t + float(rng.uniform(2, 3))))
        sink_rows.append((s, t + float(rng.uniform(3, 9)), t + float(rng.uniform(9, 12)),
                          t + float(rng.uniform(12, 30))))
    pub, sink = write_logs(tmp_path, pub_rows, sink_rows)
    for network_from in ("rms", "publish"):
        records, _ = merge_logs(pub, sink, network_from=network_from)
        for r in records:
            assert r.end_to_end_ms == r.processing_ms + r.network_ms + r.rendering_ms


def test_network_from_publish_moves_boundary(tmp_path):
    pub, sink = write_logs(tmp_path, [pub_row(0)], [sink_row(0)])
    records, _ = merge_logs(pub, sink, network_from="publish")
    r = records[0]
    assert r.processing_ms == pytest.approx(0.6, abs=1e-9)
    assert r.network_ms == pytest.approx(4.4, abs=1e-9)
    assert r.end_to_end_ms == pytest.approx(15.0, abs=1e-9)
    with pytest.raises(ValueError):
        merge_logs(pub, sink, network_from="psychic")


def test_clock_mismatch_flagged(tmp_path):
    pub, sink = write_logs(tmp_path, [pub_row(0)], [sink_row(0)],
                           pub_clock="wall", sink_clock="virtual")
    _, diag = merge_logs(pub, sink)
    assert diag.clock_mismatch


def test_negative_network_latency_retained(tmp_path):
    # clock drift can make receipt precede the RMS stamp; must not be clipped
    pub, sink = write_logs(tmp_path,
                           [(0, 1000.0, 1000.5, 1000.6)],
                           [(0, 998.82, 1012.0, 1015.0)])
    records, _ = merge_logs(pub, sink)
    assert records[0].network_ms == pytest.approx(-1.68, abs=1e-9)


def test_full_trial_scale_merge(tmp_path):
    # the full-trial record count: 87,716 packets in, 87,716 records out
    n = 87716
    pub = tmp_path / "pub.csv"
    sink = tmp_path / "sink.csv"
    with StageLogWriter(pub, PUBLISH_COLUMNS, "wall", 0.0) as w:
        for s in range(n):
            t = s * 3.42
            w.write(s, t, t + 0.5, t + 0.6)
    with StageLogWriter(sink, SINK_COLUMNS, "wall", 0.0) as w:
        for s in range(n):
            t = s * 3.42
            w.write(s, t + 5.0, t + 12.0, t + 15.0)
    records, diag = merge_logs(pub, sink)
    assert len(records) == 87716
    assert diag.drop_count == 0


def test_log_reader_rejects_wrong_columns(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("# clock=wall session_start_ms=0\nseq,a,b\n")
    with pytest.raises(LogFormatError):
        read_stage_log(path, PUBLISH_COLUMNS)


def test_log_reader_skips_comments_and_flags_partial(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text(
        "# clock=wall session_start_ms=5.000\n"
        "seq,t_sensor_ms,t_rms_ms,t_publish_ms\n"
        "0,1.000,2.000,3.000\n"
        "# partial=1 reason=broker_gone\n"
    )
    log = read_stage_log(path, PUBLISH_COLUMNS)
    assert log.meta.partial
    assert log.meta.partial_reason == "broker_gone"
    assert log.meta.session_start_ms == 5.0
    assert log.rows == [(0, 1.0, 2.0, 3.0)]
