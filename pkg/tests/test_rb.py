import math

import numpy as np
import pytest

from veloq.errors import InvalidArgumentError
from veloq.rb import DEFAULT_LENGTHS, clifford_group, rb_runner, rb_survival


def _same_up_to_phase(a, b):
    j = int(np.argmax(np.abs(b.ravel())))
    ph = a.ravel()[j] / b.ravel()[j]
    return abs(abs(ph) - 1) < 1e-9 and np.allclose(a, ph * b, atol=1e-9)


class TestCliffordGroup:
    def test_order(self):
        group, mult, inverse, conj, n = clifford_group()
        assert n == 24 and len(group) == 24
        assert mult.shape == (24, 24)

    def test_tables_match_matrices(self):
        group, mult, inverse, conj, _ = clifford_group()
        for a in range(0, 24, 5):
            for b in range(0, 24, 7):
                assert _same_up_to_phase(group[a] @ group[b], group[mult[a, b]])
            assert _same_up_to_phase(group[a] @ group[inverse[a]], np.eye(2))

    def test_paulis_map_to_paulis(self):
        _, _, _, conj, _ = clifford_group()
        # the identity is fixed and each row permutes X, Y, Z
        assert np.all(conj[:, 0] == 0)
        assert all(sorted(row[1:]) == [1, 2, 3] for row in conj)

    def test_identity_composition(self, rng):
        group, mult, inverse, _, _ = clifford_group()
        seq = rng.integers(0, 24, size=50)
        acc = 0
        for c in seq:
            acc = mult[c, acc]
        assert mult[inverse[acc], acc] == 0


class TestSurvival:
    def test_noiseless_returns(self, rng):
        assert rb_survival(100, 0.0, 200, rng) == 1.0

    def test_full_depolarizing(self, rng):
        shots = 20_000
        p = rb_survival(1, 1.0, shots, rng)
        # a uniformly random Pauli flips the outcome half the time
        assert abs(p - 0.5) < 5 * math.sqrt(0.25 / shots)

    def test_single_gate_rate(self, rng):
        # per-gate error q leaves P(return) = 1 - q/2 after one Clifford
        shots, q = 40_000, 0.2
        p = rb_survival(1, q, shots, rng)
        assert abs(p - (1 - q / 2)) < 5 * math.sqrt(0.09 / shots)

    def test_bad_length(self, rng):
        with pytest.raises(InvalidArgumentError):
            rb_survival(0, 0.0, 10, rng)


class TestRunner:
    def test_noiseless(self):
        res = rb_runner([1, 10, 50], 0.0, shots=200)
        assert res["fidelity"] == 1.0 and res["error"] == 0.0

    def test_recovers_large_error(self):
        res = rb_runner([1, 5, 10, 20, 40, 80], error=0.01, shots=4000, seed=3)
        assert res["error"] == pytest.approx(0.01, rel=0.1)
        assert res["error_err"] > 0

    def test_deterministic(self):
        a = rb_runner([1, 10, 20, 40], 0.01, shots=500, seed=5)
        b = rb_runner([1, 10, 20, 40], 0.01, shots=500, seed=5)
        np.testing.assert_array_equal(a["survival"], b["survival"])

    def test_default_lengths(self):
        assert list(DEFAULT_LENGTHS) == sorted(DEFAULT_LENGTHS)

    def test_bad_error(self):
        with pytest.raises(InvalidArgumentError):
            rb_runner(error=0.7)

    def test_too_few_lengths(self):
        from veloq.errors import FitError

        with pytest.raises(FitError):
            rb_runner([1, 20], 0.01, shots=100)
