"""biorelax: desk-scale EMG-to-feedback streaming pipeline with a four-stage
latency analyzer.

Components: signal preparation (RMS envelope, decimation, activation
scaling), a canonical wire codec, loopback/MQTT transports, a deadline-paced
replay publisher, a fixed-timestep render sink, and the latency analyzer that
merges their logs into a statistical report.
"""

__version__ = "0.1.0"

from .signal import (
    ActivationCalibration,
    RmsConfig,
    SampleSeries,
    decimate,
    load_emg_csv,
    normalize_activation,
    rms_envelope,
)
from .wire import ProtocolError, RmsPacket, TopicMap, decode_packet, encode_packet

__all__ = [
    "__version__",
    "SampleSeries", "RmsConfig", "ActivationCalibration",
    "load_emg_csv", "rms_envelope", "decimate", "normalize_activation",
    "RmsPacket", "TopicMap", "encode_packet", "decode_packet", "ProtocolError",
]
