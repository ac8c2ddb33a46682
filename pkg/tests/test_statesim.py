import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veloq.errors import EmptyResultError, InvalidArgumentError, ProtocolError
from veloq.statesim import (CZ_DIAG, H, LOST, X, Z, MeasurementRecord, NoiseChannel, NoiseModel,
                            Op, Register, execute, parity_expectation, post_select, run_shots,
                            shot_rng, write_records_csv)


def _dense_1q(n, q, u):
    ops = [np.eye(2)] * n
    ops[q] = u
    out = ops[0]
    for m in ops[1:]:
        out = np.kron(out, m)
    return out


def _random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


class TestGates:
    @pytest.mark.parametrize("n,q", [(1, 0), (3, 0), (3, 2), (5, 3)])
    def test_single_qubit_against_kron(self, rng, n, q):
        reg = Register(n)
        reg.psi[:] = _random_state(rng, n)
        ref = _dense_1q(n, q, H) @ reg.psi
        reg.apply_single_qubit(q, H)
        np.testing.assert_allclose(reg.psi, ref, atol=1e-13)

    def test_cz_against_dense(self, rng):
        n = 3
        reg = Register(n)
        reg.psi[:] = _random_state(rng, n)
        idx = np.arange(8)
        b0, b2 = (idx >> 2) & 1, idx & 1
        ref = np.where(b0 & b2, -1, 1) * reg.psi
        reg.apply_cz([(0, 2)])
        np.testing.assert_allclose(reg.psi, ref, atol=1e-14)

    def test_bell_pair(self):
        reg = Register(2).apply_single_qubit((0, 1), H).apply_cz([(0, 1)]).apply_single_qubit(1, H)
        assert reg.expectation("ZZ") == pytest.approx(1.0)
        assert reg.expectation("XX") == pytest.approx(1.0)

    def test_overlapping_pairs_rejected(self):
        with pytest.raises(InvalidArgumentError):
            Register(3).apply_cz([(0, 1), (1, 2)])
        with pytest.raises(InvalidArgumentError):
            Register(3).apply_cz([(1, 1)])

    def test_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            Register(2).apply_single_qubit(2, X)

    def test_size_limits(self):
        with pytest.raises(InvalidArgumentError):
            Register(0)
        with pytest.raises(InvalidArgumentError):
            Register(17)

    def test_expectation_validates(self):
        with pytest.raises(InvalidArgumentError):
            Register(2).expectation("X")
        with pytest.raises(InvalidArgumentError):
            Register(2).expectation("XQ")


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**31), depth=st.integers(1, 12))
def test_noiseless_circuits_preserve_norm(n, seed, depth):
    rng = np.random.default_rng(seed)
    reg = Register(n, rng)
    for _ in range(depth):
        q = int(rng.integers(n))
        reg.apply_single_qubit(q, [H, X, Z][int(rng.integers(3))])
        if n > 1:
            a, b = rng.choice(n, 2, replace=False)
            reg.apply_cz([(int(a), int(b))])
    assert reg.norm == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_cz_is_symmetric_and_involutive(seed):
    rng = np.random.default_rng(seed)
    psi = _random_state(rng, 3)
    a, b = Register(3), Register(3)
    a.psi[:] = psi
    b.psi[:] = psi
    a.apply_cz([(0, 2)])
    b.apply_cz([(2, 0)])
    np.testing.assert_allclose(a.psi, b.psi, atol=1e-14)
    a.apply_cz([(0, 2)])
    np.testing.assert_allclose(a.psi, psi, atol=1e-14)


class TestLossAndLeakage:
    def test_lost_atom_reads_lost(self):
        reg = Register(2)
        reg.lose(1)
        out = reg.measure()
        assert out[1] == LOST and out[0] == 0

    def test_gate_on_lost_atom_raises(self):
        reg = Register(2)
        reg.lose(0)
        with pytest.raises(ProtocolError):
            reg.apply_single_qubit(0, X)

    def test_leaked_atom_skipped_by_execute(self):
        reg = Register(2)
        reg.leak(0)
        execute([Op("x", (0, 1))], reg)
        assert reg.measure(1)[0] == 1

    def test_transfer_in_and_out(self):
        reg = Register(2, 0, in_manifold=[True, False])
        reg.velocity_selective_transfer(1, 1.0)
        assert reg.active(1)
        reg.velocity_selective_transfer(1, 1.0, direction="out")
        assert not reg.active(1)

    def test_transfer_spectator_flips(self):
        reg = Register(2, 0, in_manifold=[True, False])
        reg.velocity_selective_transfer(1, 1.0, spectators=(0,), spectator_infidelity=1.0)
        assert not reg.in_manifold[0]

    def test_transfer_validates(self):
        with pytest.raises(InvalidArgumentError):
            Register(1).velocity_selective_transfer(0, 1.5)
        with pytest.raises(InvalidArgumentError):
            Register(1).velocity_selective_transfer(0, 1.0, direction="up")


class TestNoise:
    def test_noise_model_strength_lookup(self):
        nm = NoiseModel([NoiseChannel("depolarizing2q", 0.01, "cz")])
        assert nm.strength("depolarizing2q", "cz") == 0.01
        assert nm.strength("depolarizing2q", "flyby_cz") == 0.0
        assert not nm.is_noiseless
        assert NoiseModel().is_noiseless

    def test_bad_channel(self):
        with pytest.raises(InvalidArgumentError):
            NoiseChannel("bitflop", 0.1, "cz")
        with pytest.raises(InvalidArgumentError):
            NoiseChannel("loss", 1.5, "cz")

    def test_depolarizing_1q_statistics(self):
        # (1 - p) rho + p I/2 on |0>: P(1) = p/2
        p = 0.2
        nm = NoiseModel([NoiseChannel("depolarizing1q", p, "1q")])
        ones = 0
        shots = 20_000
        for s in range(shots):
            reg = Register(1, shot_rng(3, s), nm)
            reg.apply_single_qubit(0, np.eye(2))
            ones += int(reg.measure()[0])
        sigma = math.sqrt(0.1 * 0.9 / shots)
        assert abs(ones / shots - p / 2) < 5 * sigma

    def test_readout_flip_rate(self):
        nm = NoiseModel([NoiseChannel("readout_flip", 0.1, "measure")])
        shots = 20_000
        ones = sum(int(Register(1, shot_rng(4, s), nm).measure()[0]) for s in range(shots))
        assert abs(ones / shots - 0.1) < 5 * math.sqrt(0.09 / shots)

    def test_loss_rate(self):
        nm = NoiseModel([NoiseChannel("loss", 0.3, "cz")])
        lost = 0
        shots = 5000
        for s in range(shots):
            reg = Register(2, shot_rng(5, s), nm)
            reg.apply_cz([(0, 1)])
            lost += int(not reg.present[0])
        assert abs(lost / shots - 0.3) < 5 * math.sqrt(0.21 / shots)

    def test_seeded_runs_repeat(self):
        nm = NoiseModel([NoiseChannel("depolarizing2q", 0.3, "cz")])
        ops = [Op("h", (0, 1)), Op("cz", (), {"pairs": [(0, 1)]}), Op("measure", (0, 1))]
        a = run_shots(lambda r: Register(2, r, nm), ops, 50, seed=11)
        b = run_shots(lambda r: Register(2, r, nm), ops, 50, seed=11)
        assert [list(r.outcomes) for r in a] == [list(r.outcomes) for r in b]


class TestGateResultHook:
    def test_custom_diagonal_and_leakage(self):
        class FakeGate:
            leakage = 1.0

            def diagonal(self):
                return CZ_DIAG

        reg = Register(2, 0)
        reg.apply_cz([(0, 1)], "flyby_cz", FakeGate())
        assert int(np.sum(reg.present)) == 1


class TestRecords:
    def _records(self):
        rows = [[0, 0], [1, 1], [1, LOST], [0, 1]]
        return [MeasurementRecord(i, np.array(r, np.int8)) for i, r in enumerate(rows)]

    def test_post_select_all_present(self):
        kept, frac, err = post_select(self._records())
        assert len(kept) == 3 and frac == pytest.approx(0.25)
        assert err == pytest.approx(math.sqrt(0.25 * 0.75 / 4))

    def test_post_select_parity(self):
        kept, frac, _ = post_select(self._records(), "parity_even_in_basis")
        assert [r.shot for r in kept] == [0, 1]

    def test_post_select_empty(self):
        with pytest.raises(EmptyResultError):
            post_select([])
        with pytest.raises(EmptyResultError):
            post_select(self._records(), lambda r: False)

    def test_parity_expectation(self):
        recs = [r for r in self._records() if LOST not in r.outcomes]
        mean, _ = parity_expectation(recs, (0, 1))
        assert mean == pytest.approx(1 / 3)

    def test_csv(self, tmp_path):
        path = tmp_path / "r.csv"
        write_records_csv(path, self._records())
        lines = path.read_text().splitlines()
        assert lines[0] == "shot,atom0,atom1,kept"
        assert lines[3] == "2,1,-1,1"

    def test_unknown_op(self):
        with pytest.raises(InvalidArgumentError):
            execute([Op("toffoli", (0,))], Register(1))
