import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from veloq.config import default_cz_profile
from veloq.errors import ConvergenceError, FitError, InvalidArgumentError
from veloq.rydberg import (TWO_PI, PulseProfile, RydbergParams, bell_fidelity_protocol,
                           flyby_scan, sector_amplitudes, simulate_cz, ssb_gate_fidelity,
                           ssb_lengths, ssb_return_probability, superatom_amplitudes,
                           synthesize_time_optimal_cz, write_flyby_curve)

PARAMS = RydbergParams()
PROFILE = default_cz_profile()
# frozen from the shipped profile
DURATION_TIMES_RABI = 7.768


def _dense_amplitudes(profile, params, d1=0.0, d2=0.0):
    """Two three-level atoms (0, 1, r) integrated directly on the 9-state space."""
    lv = 3
    dim = lv * lv

    def idx(a, b):
        return a * lv + b

    def ham(t):
        c = 0.5 * params.rabi * np.exp(1j * profile.phase(t))
        h = np.zeros((dim, dim), complex)
        for other in range(lv):
            h[idx(2, other), idx(1, other)] += c
            h[idx(other, 2), idx(other, 1)] += c
        h = h + h.conj().T
        for a in range(lv):
            for b in range(lv):
                h[idx(a, b), idx(a, b)] = -d1 * (a == 2) - d2 * (b == 2)
        h[idx(2, 2), idx(2, 2)] += params.blockade
        return h

    def rhs(t, y):
        return -1j * ham(t) @ y

    out = []
    for start in (idx(0, 1), idx(1, 0), idx(1, 1)):
        y0 = np.zeros(dim, complex)
        y0[start] = 1.0
        sol = solve_ivp(rhs, (0, profile.duration), y0, method="DOP853", rtol=1e-11, atol=1e-12)
        out.append(sol.y[start, -1])
    return out


class TestPropagation:
    def test_profile_matches_dense_solver(self):
        a01, a10, a11, _ = sector_amplitudes(PROFILE, PARAMS)
        r01, r10, r11 = _dense_amplitudes(PROFILE, PARAMS)
        assert abs(a01 - r01) < 1e-7
        assert abs(a10 - r10) < 1e-7
        assert abs(a11 - r11) < 1e-7

    def test_detuned_matches_dense_solver(self):
        d1, d2 = TWO_PI * 0.3e6, -TWO_PI * 0.1e6
        got = sector_amplitudes(PROFILE, PARAMS, d1, d2)[:3]
        ref = _dense_amplitudes(PROFILE, PARAMS, d1, d2)
        np.testing.assert_allclose(got, ref, atol=1e-7)

    def test_superatom_limit(self):
        strong = RydbergParams(blockade=5000 * PARAMS.rabi)
        a01, _, a11, _ = sector_amplitudes(PROFILE, strong)
        s01, s11 = superatom_amplitudes(PROFILE, PARAMS.rabi)
        assert abs(a01 - s01) < 1e-6
        assert abs(a11 - s11) < 2e-3

    def test_unitarity_without_decay(self):
        _, _, _, final = sector_amplitudes(PROFILE, PARAMS)
        assert np.linalg.norm(final) == pytest.approx(1.0, abs=1e-12)

    def test_decay_loses_norm(self):
        lossy = RydbergParams(rydberg_decay=1e5)
        res = simulate_cz(PROFILE, lossy)
        assert res.leakage > 0
        assert res.bell_fidelity < simulate_cz(PROFILE, PARAMS).bell_fidelity


class TestShippedProfile:
    def test_duration(self):
        assert PROFILE.duration * PARAMS.rabi == pytest.approx(DURATION_TIMES_RABI, abs=1e-3)

    def test_is_a_cz(self):
        res = simulate_cz(PROFILE, PARAMS)
        assert 1 - res.bell_fidelity < 1e-4
        assert res.conditional_phase == pytest.approx(math.pi, abs=1e-3)
        assert res.leakage < 1e-6

    def test_zero_velocity_equals_static(self):
        static = simulate_cz(PROFILE, PARAMS)
        moving = simulate_cz(PROFILE, PARAMS, 0.0, np.zeros(2))
        assert moving.bell_fidelity == static.bell_fidelity

    @pytest.mark.parametrize("v", [0.03, 0.1, -0.07])
    def test_atom_exchange_symmetry(self, v):
        a = simulate_cz(PROFILE, PARAMS, v, 0.0).bell_fidelity
        b = simulate_cz(PROFILE, PARAMS, 0.0, v).bell_fidelity
        assert a == pytest.approx(b, abs=1e-9)

    def test_perpendicular_motion_is_free(self):
        k = PARAMS.k_uv / np.linalg.norm(PARAMS.k_uv)
        perp = 0.2 * np.array([-k[1], k[0]])
        res = simulate_cz(PROFILE, PARAMS, perp, 0.0)
        assert res.bell_fidelity == pytest.approx(simulate_cz(PROFILE, PARAMS).bell_fidelity,
                                                  abs=1e-12)

    def test_flyby_degrades_with_speed(self):
        f = flyby_scan(PROFILE, PARAMS, [0.0, 0.05, 0.1, 0.15])
        assert np.all(np.diff(f) <= 1e-12)

    def test_json_round_trip(self):
        again = PulseProfile.from_json(PROFILE.to_json())
        assert again == PulseProfile(PROFILE.duration, PROFILE.phase_coeffs,
                                     PROFILE.z_correction)

    def test_curve_writer(self, tmp_path):
        write_flyby_curve(tmp_path / "f.csv", [0.0, 0.1], [1.0, 0.99])
        assert (tmp_path / "f.csv").read_text().splitlines() == [
            "v_mps,bell_fidelity", "0.0,1.0", "0.1,0.99"]


class TestBellEstimator:
    def test_bell_state(self):
        phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
        assert bell_fidelity_protocol(phi) == pytest.approx(1.0, abs=1e-12)

    def test_mixed_state(self):
        assert bell_fidelity_protocol(np.eye(4) / 4) == pytest.approx(0.25, abs=1e-12)

    def test_product_state(self):
        assert bell_fidelity_protocol(np.array([1, 0, 0, 0])) == pytest.approx(0.5, abs=1e-12)

    def test_matches_overlap_for_phi_plus_family(self):
        # a|00> + b|11> with real a, b: the estimator equals the overlap with Phi+
        for theta in np.linspace(0, math.pi / 2, 5):
            psi = np.array([math.cos(theta), 0, 0, math.sin(theta)])
            overlap = (math.cos(theta) + math.sin(theta)) ** 2 / 2
            assert bell_fidelity_protocol(psi) == pytest.approx(overlap, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(FitError):
            bell_fidelity_protocol(np.zeros(4))
        with pytest.raises(InvalidArgumentError):
            bell_fidelity_protocol(np.ones(3))


class TestParams:
    def test_weak_blockade_rejected(self):
        with pytest.raises(InvalidArgumentError):
            RydbergParams(blockade=5 * TWO_PI * 5e6)

    def test_bad_duration(self):
        with pytest.raises(InvalidArgumentError):
            PulseProfile(0.0, (0.1,))

    def test_synthesis_failure_carries_best(self):
        with pytest.raises(ConvergenceError) as exc:
            synthesize_time_optimal_cz(PARAMS, n_coeffs=1, restarts=2)
        assert exc.value.best is not None and exc.value.infidelity > 1e-3


class TestSSB:
    def test_noiseless(self):
        res = ssb_gate_fidelity([2, 10, 40], 0.0, shots=100)
        assert res["fidelity"] == 1.0

    def test_odd_length_rejected(self, rng):
        with pytest.raises(InvalidArgumentError):
            ssb_return_probability(3, 0.01, 10, rng)

    def test_lengths_even(self):
        ls = ssb_lengths(0.01)
        assert all(n % 2 == 0 for n in ls) and ls == sorted(ls)

    def test_two_gate_survival(self, rng):
        # any error at all leaves a uniformly random Pauli (CZ conjugation is a
        # bijection), 4 of 16 of which have no Z part: P = 1/4 + 3/4 * 1/4
        shots = 40_000
        p = ssb_return_probability(2, 0.5, shots, rng)
        assert abs(p - 0.4375) < 5 * math.sqrt(0.4375 * 0.5625 / shots)

    def test_return_probability_decays(self, rng):
        short = ssb_return_probability(10, 0.02, 20_000, rng)
        long = ssb_return_probability(200, 0.02, 20_000, rng)
        assert long < short
