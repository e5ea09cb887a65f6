import numpy as np
import pytest


def write_emg_csv(path, values, rate_hz=2000.0, start_time_ms=0, n_channels=1,
                  channel=0):
    """Write the canonical EMG CSV; `values` fill one channel, others zero."""
    header_cols = ",".join(f"ch{i}" for i in range(n_channels))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# rate_hz={rate_hz:g} start_time_ms={start_time_ms}\n")
        fh.write(header_cols + "\n")
        for v in values:
            cells = ["0.0"] * n_channels
            cells[channel] = repr(float(v))
            fh.write(",".join(cells) + "\n")
    return path


@pytest.fixture
def emg_csv(tmp_path):
    def _make(values, **kwargs):
        return write_emg_csv(tmp_path / "emg.csv", values, **kwargs)
    return _make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
