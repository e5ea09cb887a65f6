"""Activation-to-scene mapping shared by the render sink and the browser UI.

The scene progresses from dawn (phase 0) to dusk (phase 1) while the muscle
stays relaxed:

    phase' = min(1, phase + base_rate * (1 - activation) * dt_seconds)

with dt taken from consecutive packet sensor timestamps, so the trajectory is
a pure function of the packet stream and can be replayed bit-for-bit. The
browser client implements the identical rule; a committed golden trajectory
cross-checks the two implementations.

The default base rate completes a fully relaxed session in 5 minutes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .signal import ActivationCalibration, normalize_activation
from .wire import RmsPacket

DEFAULT_PHASE_RATE_PER_S = 1.0 / 300.0


@dataclass(frozen=True)
class SceneState:
    activation: float = 0.0
    scene_phase: float = 0.0
    last_seq: Optional[int] = None
    last_t_sensor_ms: Optional[float] = None


def advance_scene(
    state: SceneState,
    packet: RmsPacket,
    cal: ActivationCalibration,
    base_rate_per_s: float = DEFAULT_PHASE_RATE_PER_S,
) -> SceneState:
    """Fold one packet into the scene: update activation, integrate phase.

    Phase is monotone non-decreasing and clamped to [0, 1]; at activation 1 it
    freezes, at activation 0 it advances at the full base rate.
    """
    activation = normalize_activation(packet.rms_mv, cal)
    if state.last_t_sensor_ms is None:
        dt_s = 0.0
    else:
        dt_s = max(0.0, packet.t_sensor_ms - state.last_t_sensor_ms) / 1000.0
    phase = min(1.0, state.scene_phase + base_rate_per_s * (1.0 - activation) * dt_s)
    return SceneState(
        activation=activation,
        scene_phase=phase,
        last_seq=packet.seq,
        last_t_sensor_ms=packet.t_sensor_ms,
    )


def scene_trajectory(packets, cal: ActivationCalibration,
                     base_rate_per_s: float = DEFAULT_PHASE_RATE_PER_S):
    """Reference per-packet trajectory: list of (seq, activation, phase)."""
    state = SceneState()
    out = []
    for packet in packets:
        state = advance_scene(state, packet, cal, base_rate_per_s)
        out.append((packet.seq, state.activation, state.scene_phase))
    return out
