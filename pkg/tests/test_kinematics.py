import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veloq.errors import InvalidArgumentError
from veloq.kinematics import (Trajectory, make_constant_velocity, make_hold, make_rest_to_rest_move,
                              make_velocity_ramp, positions, rest_to_rest_jerk, sample,
                              zone_transfer_cost)

# T = sqrt(2 dv / j), d = 2 dv T / 3 for dv = 0.05 m/s, j = 12 * 100e-6 / 200e-6**3
ZONE_T = 2.5819888974716113e-05
ZONE_D = 8.606629658238704e-07


def test_baseline_jerk():
    assert rest_to_rest_jerk(100e-6, 200e-6) == pytest.approx(1.5e8, rel=1e-12)


def test_zone_transfer_frozen_values():
    t, d = zone_transfer_cost(0.05, 1.5e8)
    assert t == pytest.approx(ZONE_T, rel=1e-12)
    assert d == pytest.approx(ZONE_D, rel=1e-12)


def test_zone_transfer_sqrt_scaling():
    t1, _ = zone_transfer_cost(0.05, 1.5e8)
    t4, _ = zone_transfer_cost(0.2, 1.5e8)
    assert t4 / t1 == pytest.approx(2.0, rel=1e-12)


def test_rest_to_rest_endpoints():
    traj = make_rest_to_rest_move(4.3e-6, 50e-6, direction=(0.0, 1.0), x0=(1e-6, 2e-6))
    s0, s1 = sample(traj, 0.0), sample(traj, 50e-6)
    np.testing.assert_allclose(s0.x, [1e-6, 2e-6])
    np.testing.assert_allclose(s1.x, [1e-6, 6.3e-6], atol=1e-18)
    np.testing.assert_allclose(s1.v, 0.0, atol=1e-12)
    assert abs(traj.segments[0].jerk()[1]) == pytest.approx(12 * 4.3e-6 / 50e-6**3)


def test_ramp_ends_with_zero_acceleration():
    traj = make_velocity_ramp(0.1, 1.5e8, v0=0.02)
    end = traj.end_state()
    assert end.v[0] == pytest.approx(0.12)
    assert end.a[0] == pytest.approx(0.0, abs=1e-6)


def test_then_is_continuous():
    traj = make_velocity_ramp(0.05, 1.5e8).then(make_constant_velocity(0.05, 10e-6)).then(
        make_velocity_ramp(-0.05, 1.5e8, v0=0.05))
    for dx, dv in traj.continuity_gaps():
        assert dx < 1e-15 and dv < 1e-12
    assert traj.end_state().v[0] == pytest.approx(0.0, abs=1e-15)


def test_sample_extrapolates_at_final_velocity():
    traj = make_constant_velocity(0.1, 1e-6)
    s = sample(traj, 3e-6)
    assert s.x[0] == pytest.approx(3e-7)


def test_positions_matches_sample():
    traj = make_velocity_ramp(0.05, 1.5e8).then(make_hold(5e-6))
    ts = np.linspace(-1e-6, 40e-6, 57)
    np.testing.assert_allclose(positions(traj, ts), [sample(traj, t).x for t in ts], atol=1e-18)


def test_json_roundtrip_is_exact():
    traj = make_rest_to_rest_move(1.234e-6, 7e-6).then(make_constant_velocity(0.03, 1e-6))
    back = Trajectory.from_json_obj(json.loads(traj.to_json()))
    assert back.segments == traj.segments


def test_noncontiguous_segments_rejected():
    a = make_hold(1e-6).segments[0]
    b = make_hold(1e-6, t0=2e-6).segments[0]
    with pytest.raises(InvalidArgumentError):
        Trajectory([a, b])


def test_invalid_arguments():
    with pytest.raises(InvalidArgumentError):
        make_rest_to_rest_move(1e-6, 0.0)
    with pytest.raises(InvalidArgumentError):
        make_velocity_ramp(0.1, -1.0)


@settings(max_examples=50, deadline=None)
@given(d=st.floats(1e-7, 1e-3), T=st.floats(1e-6, 1e-3))
def test_rest_to_rest_peak_velocity(d, T):
    traj = make_rest_to_rest_move(d, T)
    v_mid = sample(traj, T / 2).v[0]
    assert v_mid == pytest.approx(1.5 * d / T, rel=1e-9)
    assert rest_to_rest_jerk(d, T) == pytest.approx(abs(traj.segments[0].jerk()[0]), rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(dv=st.floats(1e-4, 1.0), jerk=st.floats(1e6, 1e10))
def test_ramp_jerk_bounded(dv, jerk):
    traj = make_velocity_ramp(dv, jerk)
    seg = traj.segments[0]
    # the cubic has constant jerk 2 dv / T^2 = jerk
    assert abs(seg.jerk()[0]) == pytest.approx(jerk, rel=1e-9)
    t, d = zone_transfer_cost(dv, jerk)
    assert d == pytest.approx(2 * dv * t / 3, rel=1e-9)
    assert t == pytest.approx(math.sqrt(2 * dv / jerk), rel=1e-12)
