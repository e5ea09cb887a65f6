import pytest

from biorelax.scene import SceneState, advance_scene, scene_trajectory
from biorelax.signal import ActivationCalibration
from biorelax.wire import RmsPacket

CAL = ActivationCalibration(rms_rest_mv=0.0, rms_max_mv=1.0)


def packet(seq, t_ms, rms):
    return RmsPacket(seq=seq, t_sensor_ms=t_ms, t_rms_ms=t_ms, rms_mv=rms)


def test_relaxed_stream_advances_at_full_rate():
    # activation 0 for a full 5 minutes reaches dusk exactly
    state = SceneState()
    for k in range(301):
        state = advance_scene(state, packet(k, k * 1000.0, 0.0), CAL)
    assert state.scene_phase == pytest.approx(1.0)
    assert state.activation == 0.0


def test_full_tension_freezes_phase():
    state = SceneState(scene_phase=0.25, last_t_sensor_ms=0.0)
    for k in range(10):
        state = advance_scene(state, packet(k, (k + 1) * 1000.0, 1.0), CAL)
    assert state.scene_phase == 0.25
    assert state.activation == 1.0


def test_half_activation_half_rate():
    # 1 %/s base rate, activation 0.5 for 10 s -> phase advances 5 %
    state = SceneState(last_t_sensor_ms=0.0)
    state = advance_scene(state, packet(0, 10_000.0, 0.5), CAL, base_rate_per_s=0.01)
    assert state.scene_phase == pytest.approx(0.05)


def test_release_resumes_advance():
    state = SceneState(last_t_sensor_ms=0.0)
    state = advance_scene(state, packet(0, 1000.0, 1.0), CAL)
    frozen = state.scene_phase
    state = advance_scene(state, packet(1, 2000.0, 0.0), CAL)
    assert state.scene_phase > frozen


def test_first_packet_contributes_no_dt():
    state = advance_scene(SceneState(), packet(0, 5_000_000.0, 0.0), CAL)
    assert state.scene_phase == 0.0
    assert state.last_t_sensor_ms == 5_000_000.0


def test_phase_monotone_and_bounded(rng):
    state = SceneState()
    t = 0.0
    prev_phase = 0.0
    for k in range(2000):
        t += float(rng.uniform(0, 2000))
        state = advance_scene(state, packet(k, t, float(rng.uniform(0, 2))), CAL)
        assert 0.0 <= state.scene_phase <= 1.0
        assert state.scene_phase >= prev_phase
        prev_phase = state.scene_phase


def test_trajectory_is_pure_function_of_stream(rng):
    packets = [
        packet(k, k * 13.3, float(rng.uniform(0, 1.2))) for k in range(500)
    ]
    a = scene_trajectory(packets, CAL)
    b = scene_trajectory(packets, CAL)
    assert a == b
    assert [seq for seq, _, _ in a] == list(range(500))
