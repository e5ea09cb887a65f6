"""Stage-log CSV files written by the publisher and the sink.

Both logs share one convention: a ``# clock=<source> session_start_ms=<t>``
comment header, a column header row, then one row per packet with timestamps
rendered at 3 decimal places. Comment lines may appear anywhere and are
skipped on read; an aborted run appends ``# partial=1 ...`` so the analyzer
can flag it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

PUBLISH_COLUMNS = ("seq", "t_sensor_ms", "t_rms_ms", "t_publish_ms")
SINK_COLUMNS = ("seq", "t_recv_ms", "t_pre_update_ms", "t_render_ms")

FLUSH_EVERY = 64


class LogFormatError(ValueError):
    pass


@dataclass
class LogMeta:
    clock: str = "wall"
    session_start_ms: float = 0.0
    partial: bool = False
    partial_reason: str = ""


class StageLogWriter:
    """Append-only CSV writer, flushed every FLUSH_EVERY rows."""

    def __init__(self, path, columns, clock_name: str, session_start_ms: float):
        self.path = path
        self.columns = tuple(columns)
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        self._fh.write(f"# clock={clock_name} session_start_ms={session_start_ms:.3f}\n")
        self._fh.write(",".join(self.columns) + "\n")
        self._since_flush = 0
        self.rows_written = 0

    def write(self, seq: int, *times_ms: float) -> None:
        stamps = ",".join(f"{t:.3f}" for t in times_ms)
        self._fh.write(f"{seq},{stamps}\n")
        self.rows_written += 1
        self._since_flush += 1
        if self._since_flush >= FLUSH_EVERY:
            self._fh.flush()
            self._since_flush = 0

    def mark_partial(self, reason: str) -> None:
        self._fh.write(f"# partial=1 reason={reason.replace(' ', '_')}\n")
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class StageLog:
    meta: LogMeta
    columns: tuple
    rows: list = field(default_factory=list)  # (seq, t0, t1, t2) per row


def read_stage_log(path, expected_columns) -> StageLog:
    meta = LogMeta()
    rows = []
    columns = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                _apply_comment(meta, line)
                continue
            if columns is None:
                columns = tuple(c.strip() for c in line.split(","))
                if columns != tuple(expected_columns):
                    raise LogFormatError(
                        f"{path}: unexpected columns {columns}, want {tuple(expected_columns)}"
                    )
                continue
            cells = line.split(",")
            if len(cells) != len(columns):
                raise LogFormatError(f"{path}: line {lineno} has {len(cells)} cells")
            try:
                seq = int(cells[0])
                times = tuple(float(c) for c in cells[1:])
            except ValueError:
                raise LogFormatError(f"{path}: non-numeric value at line {lineno}") from None
            rows.append((seq, *times))
    if columns is None:
        raise LogFormatError(f"{path}: missing column header row")
    return StageLog(meta=meta, columns=columns, rows=rows)


def _apply_comment(meta: LogMeta, line: str) -> None:
    for token in line[1:].split():
        key, _, raw = token.partition("=")
        if key == "clock":
            meta.clock = raw
        elif key == "session_start_ms":
            meta.session_start_ms = float(raw)
        elif key == "partial":
            meta.partial = raw not in ("0", "false", "")
        elif key == "reason":
            meta.partial_reason = raw
