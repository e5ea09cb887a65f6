"""Packet schema and canonical JSON codec shared by publisher, sink, and UI.

Timestamps are session-clock milliseconds rendered with 3 decimal places
(sub-ms resolution); the RMS value gets 6. Key order is fixed so identical
packets always encode to identical bytes and logs stay diffable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass


class ProtocolError(ValueError):
    """Raised when a payload does not decode to a valid packet."""


@dataclass(frozen=True)
class RmsPacket:
    seq: int
    t_sensor_ms: float
    t_rms_ms: float
    rms_mv: float

    def __post_init__(self):
        if not isinstance(self.seq, int) or self.seq < 0:
            raise ProtocolError(f"seq must be a non-negative integer, got {self.seq!r}")
        if self.rms_mv < 0:
            raise ProtocolError(f"rms_mv must be non-negative, got {self.rms_mv}")

    def quantized(self) -> "RmsPacket":
        """The packet as it survives a wire round trip (3/6 decimal places)."""
        return RmsPacket(
            self.seq,
            round(self.t_sensor_ms, 3),
            round(self.t_rms_ms, 3),
            round(self.rms_mv, 6),
        )


@dataclass(frozen=True)
class TopicMap:
    data_topic: str = "vrx/emg/rms"
    control_topic: str = "vrx/ui/control"

    def __post_init__(self):
        for name, topic in (("data_topic", self.data_topic),
                            ("control_topic", self.control_topic)):
            if not topic:
                raise ValueError(f"{name} must be non-empty")
            if "#" in topic or "+" in topic:
                raise ValueError(f"{name} must not contain wildcard characters: {topic!r}")


def encode_packet(p: RmsPacket) -> bytes:
    return (
        f'{{"seq":{p.seq},'
        f'"t_sensor_ms":{p.t_sensor_ms:.3f},'
        f'"t_rms_ms":{p.t_rms_ms:.3f},'
        f'"rms_mv":{p.rms_mv:.6f}}}'
    ).encode("utf-8")


_REQUIRED = ("seq", "t_sensor_ms", "t_rms_ms", "rms_mv")


def decode_packet(payload) -> RmsPacket:
    """Parse any JSON object carrying the four required keys.

    Extra keys are ignored so newer peers can add fields without breaking
    older readers.
    """
    if isinstance(payload, (bytes, bytearray)):
        payload = payload.decode("utf-8")
    try:
        obj = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"payload is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ProtocolError(f"payload is not a JSON object: {payload!r}")
    for key in _REQUIRED:
        if key not in obj:
            raise ProtocolError(f"missing key {key}")
        value = obj[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ProtocolError(f"field {key} must be numeric, got {value!r}")
        if not math.isfinite(value):
            raise ProtocolError(f"field {key} must be finite, got {value!r}")
    if not isinstance(obj["seq"], int):
        raise ProtocolError(f"field seq must be an integer, got {obj['seq']!r}")
    if obj["rms_mv"] < 0:
        raise ProtocolError(f"field rms_mv must be non-negative, got {obj['rms_mv']!r}")
    return RmsPacket(
        seq=obj["seq"],
        t_sensor_ms=float(obj["t_sensor_ms"]),
        t_rms_ms=float(obj["t_rms_ms"]),
        rms_mv=float(obj["rms_mv"]),
    )
