"""EMG sample ingestion, RMS envelope, decimation, and activation scaling.

All transformations here are pure and deterministic; a loaded series is safe
to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class CsvFormatError(ValueError):
    """Raised for a malformed EMG CSV file (bad header, bad cell, empty body)."""


@dataclass
class SampleSeries:
    """Uniformly sampled signal: value i is implicitly at
    ``start_time_ms + i * 1000 / rate_hz``."""

    start_time_ms: float
    rate_hz: float
    values: np.ndarray

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return self.values.size

    def timestamps_ms(self) -> np.ndarray:
        return self.start_time_ms + np.arange(len(self)) * (1000.0 / self.rate_hz)


@dataclass(frozen=True)
class RmsConfig:
    window_ms: float = 64.0
    target_rate_hz: float = 75.0

    def __post_init__(self):
        if self.window_ms <= 0:
            raise ValueError("window_ms must be positive")
        if self.target_rate_hz <= 0:
            raise ValueError("target_rate_hz must be positive")


@dataclass(frozen=True)
class ActivationCalibration:
    """Baseline and reference-maximum RMS amplitude for activation scaling."""

    rms_rest_mv: float = 0.0
    rms_max_mv: float = 1.0

    def __post_init__(self):
        if not (0 <= self.rms_rest_mv < self.rms_max_mv):
            raise ValueError(
                f"calibration requires 0 <= rest < max, got "
                f"rest={self.rms_rest_mv}, max={self.rms_max_mv}"
            )


def load_emg_csv(path, channel: int = 0) -> SampleSeries:
    """Load one channel from an EMG CSV file.

    Format: line 1 is ``# rate_hz=<float> start_time_ms=<int>``, line 2 is the
    column header row (``ch0,ch1,...``), each following line holds one sample
    per channel as decimal text. Data rows are numbered from 1 in error
    messages.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        meta = _parse_header(header, path)
        columns_line = fh.readline()
        if not columns_line:
            raise CsvFormatError(f"{path}: missing column header row")
        columns = [c.strip() for c in columns_line.strip().split(",")]
        if channel < 0 or channel >= len(columns):
            raise CsvFormatError(
                f"{path}: channel {channel} not present (file has {len(columns)} columns)"
            )
        values = []
        for row_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if channel >= len(cells):
                raise CsvFormatError(
                    f"{path}: row {row_number} has {len(cells)} cells, expected {len(columns)}"
                )
            cell = cells[channel].strip()
            try:
                value = float(cell)
            except ValueError:
                raise CsvFormatError(
                    f"{path}: non-numeric cell {cell!r} at row {row_number}"
                ) from None
            if not math.isfinite(value):
                raise CsvFormatError(
                    f"{path}: non-finite cell {cell!r} at row {row_number}"
                )
            values.append(value)
    if not values:
        raise CsvFormatError(f"{path}: no data rows")
    return SampleSeries(meta["start_time_ms"], meta["rate_hz"], np.array(values))


def _parse_header(line: str, path) -> dict:
    line = line.strip()
    if not line.startswith("#"):
        raise CsvFormatError(f"{path}: first line must be a '# rate_hz=... start_time_ms=...' header")
    fields = {}
    for token in line[1:].split():
        if "=" not in token:
            raise CsvFormatError(f"{path}: malformed header token {token!r}")
        key, _, raw = token.partition("=")
        fields[key] = raw
    try:
        return {
            "rate_hz": float(fields["rate_hz"]),
            "start_time_ms": float(fields["start_time_ms"]),
        }
    except KeyError as exc:
        raise CsvFormatError(f"{path}: header missing {exc.args[0]}") from None
    except ValueError:
        raise CsvFormatError(f"{path}: non-numeric header value in {line!r}") from None


def rms_window_samples(window_ms: float, rate_hz: float) -> int:
    """Number of samples spanned by an RMS window of ``window_ms``."""
    n = int(round(window_ms * rate_hz / 1000.0))
    if n < 1:
        raise ValueError(
            f"window of {window_ms} ms spans no samples at {rate_hz} Hz"
        )
    return n


def rms_envelope(series: SampleSeries, window_ms: float) -> SampleSeries:
    """Causal RMS envelope: sqrt of the windowed mean of squares.

    Output has the same rate and length as the input. For the first samples,
    where fewer than a full window exists, the window grows from one sample
    so no future values leak in.
    """
    if len(series) == 0:
        raise ValueError("cannot compute RMS envelope of an empty series")
    n_win = rms_window_samples(window_ms, series.rate_hz)
    sq = series.values.astype(float) ** 2
    csum = np.cumsum(sq)
    win_sum = csum.copy()
    if n_win < len(series):
        win_sum[n_win:] = csum[n_win:] - csum[:-n_win]
    counts = np.minimum(np.arange(1, len(series) + 1), n_win)
    rms = np.sqrt(np.maximum(win_sum, 0.0) / counts)
    return SampleSeries(series.start_time_ms, series.rate_hz, rms)


def decimate_indices(n: int, rate_hz: float, target_rate_hz: float) -> np.ndarray:
    """Indices of the last sample in each non-empty time bucket.

    Buckets have width ``1000 / target_rate_hz`` ms; sample i sits at
    ``i * 1000 / rate_hz`` ms. Bucket membership is computed in exact integer
    arithmetic on the rates' binary representations, so integer rate ratios
    decimate to exactly every k-th sample.
    """
    if target_rate_hz > rate_hz:
        raise ValueError(
            f"target rate {target_rate_hz} Hz exceeds input rate {rate_hz} Hz"
        )
    if n == 0:
        return np.empty(0, dtype=np.int64)
    r_num, r_den = float(rate_hz).as_integer_ratio()
    t_num, t_den = float(target_rate_hz).as_integer_ratio()
    # bucket(i) = floor(t_i / width) = floor(i * target / rate), exactly
    num = t_num * r_den
    den = t_den * r_num
    if num < 2**20 and den < 2**20 and n * num < 2**62:
        buckets = (np.arange(n, dtype=np.int64) * num) // den
    else:
        buckets = np.array([(i * num) // den for i in range(n)], dtype=np.int64)
    last_of_bucket = np.nonzero(np.diff(buckets))[0]
    return np.append(last_of_bucket, n - 1)


def decimate(series: SampleSeries, target_rate_hz: float) -> SampleSeries:
    """Reduce the rate by keeping the last sample of each time bucket.

    Latest-value semantics, mirroring what a live pipeline would stream; no
    averaging. Output rate is ``target_rate_hz``.
    """
    keep = decimate_indices(len(series), series.rate_hz, target_rate_hz)
    return SampleSeries(series.start_time_ms, target_rate_hz, series.values[keep])


def normalize_activation(rms_mv: float, cal: ActivationCalibration) -> float:
    """Map an RMS amplitude to activation in [0, 1] against the calibration."""
    span = cal.rms_max_mv - cal.rms_rest_mv
    x = (rms_mv - cal.rms_rest_mv) / span
    return min(1.0, max(0.0, x))
