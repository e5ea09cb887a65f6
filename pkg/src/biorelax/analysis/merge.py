"""Merge publisher and sink logs by sequence id into per-packet stage
latencies.

Publish-only sequence ids are transport drops and are reported as
diagnostics; sink-only ids (phantoms) and duplicated ids inside one log are
corruption and raise. End-to-end is constructed as the sum of the three
stages, so the stage-sum identity holds exactly, bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..logs import PUBLISH_COLUMNS, SINK_COLUMNS, StageLog, read_stage_log


class MergeError(ValueError):
    pass


@dataclass(frozen=True)
class LatencyRecord:
    seq: int
    processing_ms: float
    network_ms: float
    rendering_ms: float
    end_to_end_ms: float


@dataclass
class MergeDiagnostics:
    n_publish: int = 0
    n_sink: int = 0
    n_matched: int = 0
    dropped_seqs: list = field(default_factory=list)  # published, never logged by sink
    duplicate_count: int = 0
    publish_clock: str = ""
    sink_clock: str = ""
    clock_mismatch: bool = False
    publish_partial: bool = False
    sink_partial: bool = False

    @property
    def drop_count(self) -> int:
        return len(self.dropped_seqs)


def _index_by_seq(log: StageLog, what: str) -> dict:
    by_seq = {}
    for row in log.rows:
        if row[0] in by_seq:
            raise MergeError(f"duplicate seq {row[0]} in {what} log")
        by_seq[row[0]] = row
    return by_seq


def merge_logs(pub_log_path, sink_log_path,
               network_from: str = "rms") -> tuple[list[LatencyRecord], MergeDiagnostics]:
    """Inner-join the two stage logs on seq and difference the stages.

    ``network_from`` picks the publisher-side boundary between the processing
    and network stages: "rms" (default) splits at the RMS stamp, "publish"
    splits at the transport hand-off. Either way the three stages partition
    the sensor-to-render interval, so their sum is the end-to-end latency.
    """
    if network_from not in ("rms", "publish"):
        raise ValueError(f"network_from must be 'rms' or 'publish', got {network_from!r}")
    pub = read_stage_log(pub_log_path, PUBLISH_COLUMNS)
    sink = read_stage_log(sink_log_path, SINK_COLUMNS)
    pub_by_seq = _index_by_seq(pub, "publish")
    sink_by_seq = _index_by_seq(sink, "sink")

    phantoms = sorted(set(sink_by_seq) - set(pub_by_seq))
    if phantoms:
        raise MergeError(
            f"{len(phantoms)} sink-only seq(s) never published, first: {phantoms[:5]}"
        )

    diagnostics = MergeDiagnostics(
        n_publish=len(pub_by_seq),
        n_sink=len(sink_by_seq),
        dropped_seqs=sorted(set(pub_by_seq) - set(sink_by_seq)),
        publish_clock=pub.meta.clock,
        sink_clock=sink.meta.clock,
        clock_mismatch=pub.meta.clock != sink.meta.clock,
        publish_partial=pub.meta.partial,
        sink_partial=sink.meta.partial,
    )

    records = []
    for seq in sorted(set(pub_by_seq) & set(sink_by_seq)):
        _, t_sensor, t_rms, t_publish = pub_by_seq[seq]
        _, t_recv, _t_pre, t_render = sink_by_seq[seq]
        boundary = t_rms if network_from == "rms" else t_publish
        processing = boundary - t_sensor
        network = t_recv - boundary
        rendering = t_render - t_recv
        records.append(LatencyRecord(
            seq=seq,
            processing_ms=processing,
            network_ms=network,
            rendering_ms=rendering,
            end_to_end_ms=processing + network + rendering,
        ))
    diagnostics.n_matched = len(records)
    return records, diagnostics
