import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veloq.codes import (LAMBDA_FS, ClusterSpec, FlyingAncillaConfig, FourTwoTwoCode,
                         build_linear_cluster_circuit, cluster_stabilizers, cluster_state,
                         echo_observable, entanglement_witness, flying_ancilla_prepare,
                         flying_ancilla_syndrome, logical_bell_protocol, measurable,
                         pauli_decompose, paulis_commute, stabilizer_plans,
                         stabilizer_readout_exact, write_stabilizer_report)
from veloq.errors import InvalidArgumentError
from veloq.pulsephysics import wavevector
from veloq.statesim import NoiseChannel, NoiseModel, Register

PAULI = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]),
         "Z": np.diag([1, -1])}


def _dense(pauli):
    out = np.array([[1.0]])
    for c in pauli:
        out = np.kron(out, PAULI[c])
    return out


class TestPauliAlgebra:
    @settings(max_examples=60, deadline=None)
    @given(st.text("IXYZ", min_size=4, max_size=4), st.text("IXYZ", min_size=4, max_size=4))
    def test_commutation_matches_matrices(self, p, q):
        a, b = _dense(p), _dense(q)
        commutes = np.allclose(a @ b, b @ a)
        assert paulis_commute(p, q) == commutes

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            paulis_commute("XX", "X")


class TestDisplacementReadout:
    def test_undisplaced_atom_reads_z(self):
        comps = pauli_decompose(echo_observable(0.0))
        assert abs(comps["Z"]) == pytest.approx(1.0)

    def test_eighth_wavelength_reads_equatorial(self):
        phi = float(wavevector(LAMBDA_FS)[0] * LAMBDA_FS / 8)
        comps = pauli_decompose(echo_observable(phi))
        assert abs(comps["X"]) == pytest.approx(1.0, abs=1e-12)
        assert abs(comps["Z"]) < 1e-12

    def test_observable_rotates_with_twice_the_phase(self):
        for phi in np.linspace(0, math.pi, 7):
            comps = pauli_decompose(echo_observable(phi))
            assert math.hypot(comps["X"], comps["Y"]) == pytest.approx(
                abs(math.sin(2 * phi)), abs=1e-12)


class TestCluster:
    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_stabilizers_commute(self, n):
        spec = ClusterSpec(n)
        assert spec.check_commutation()
        assert len(spec.stabilizers) == n

    def test_chain_stabilizer_strings(self):
        assert ClusterSpec(4).stabilizers == ["XZII", "ZXZI", "IZXZ", "IIZX"]

    def test_circuit_uses_two_layers(self):
        ops = build_linear_cluster_circuit(8)
        assert [op.name for op in ops] == ["h", "cz", "cz"]

    @pytest.mark.parametrize("n", [3, 6, 8])
    def test_state_is_stabilized(self, n):
        reg = Register(n)
        reg.psi[:] = cluster_state(n)
        for s in ClusterSpec(n).stabilizers:
            assert reg.expectation(s) == pytest.approx(1.0, abs=1e-12)

    def test_plans_cover_every_stabilizer(self):
        spec = ClusterSpec(8)
        covered = set()
        for plan in stabilizer_plans(spec):
            covered |= {i for i, s in enumerate(spec.stabilizers) if measurable(s, plan)}
        assert covered == set(range(8))

    def test_exact_readout_is_one(self):
        spec = ClusterSpec(8)
        state = cluster_state(8)
        vals = {}
        for plan in stabilizer_plans(spec):
            vals.update(stabilizer_readout_exact(state, spec, plan))
        assert sorted(vals) == list(range(8))
        for v in vals.values():
            assert abs(v - 1.0) < 1e-9

    def test_noiseless_monte_carlo(self):
        res = cluster_stabilizers(6, shots=40, seed=1)
        np.testing.assert_array_equal(res["postselected"], np.ones(6))
        assert res["discard_fraction"] == 0.0

    def test_witness(self):
        assert entanglement_witness([0.6, 0.9])
        assert not entanglement_witness([0.6, 0.5])
        assert not entanglement_witness([])

    def test_report(self, tmp_path):
        res = cluster_stabilizers(3, shots=10, seed=0)
        write_stabilizer_report(tmp_path / "s.csv", res)
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "stabilizer_index,value,stderr,postselected"
        assert len(lines) == 7

    def test_bad_spec(self):
        with pytest.raises(InvalidArgumentError):
            ClusterSpec(1)
        with pytest.raises(InvalidArgumentError):
            ClusterSpec(3, ((0, 0),))


class TestFourTwoTwo:
    def test_code_algebra(self):
        assert FourTwoTwoCode().check()

    def test_logical_states_are_codewords(self):
        code = FourTwoTwoCode()
        for bits in ((0, 0), (0, 1), (1, 0), (1, 1)):
            psi = code.logical_state(bits)
            for s in code.stabilizers:
                assert np.vdot(psi, _dense(s) @ psi).real == pytest.approx(1.0)
            for key, b in (("Z1", bits[0]), ("Z2", bits[1])):
                z = np.vdot(psi, _dense(code.logicals[key]) @ psi).real
                assert z == pytest.approx(1 - 2 * b)

    def test_circuit_prepares_logical_bell(self):
        from veloq.codes import logical_bell_circuit
        from veloq.statesim import execute

        reg = Register(4)
        execute(logical_bell_circuit(), reg)
        target = FourTwoTwoCode().logical_bell_state()
        assert abs(np.vdot(target, reg.psi)) == pytest.approx(1.0)

    def test_noiseless_protocol(self):
        res = logical_bell_protocol(shots=200, seed=3)
        assert res["logical_fidelity"] == 1.0
        assert res["discard_fraction"] == 0.0
        assert res["physical_fidelity"] == 1.0

    def test_detection_beats_physical(self):
        nm = NoiseModel([NoiseChannel("depolarizing2q", 0.05, "cz")])
        res = logical_bell_protocol(nm, shots=3000, seed=2)
        assert res["logical_fidelity"] > res["physical_fidelity"]
        assert res["discard_fraction"] > 0


class TestFlyingAncilla:
    def test_noiseless_heralds_codeword(self):
        res = flying_ancilla_prepare(shots=40, seed=0, return_states=True)
        assert res["success"] == 1.0 and res["discard_fraction"] == 0.0
        assert res["herald_fraction"] == 1.0
        for psi in res["states"]:
            reg = Register(5)
            reg.psi[:] = psi
            assert reg.expectation("XXXXI") == pytest.approx(1.0)
            assert reg.expectation("ZZZZI") == pytest.approx(1.0)

    @pytest.mark.parametrize("atom", [0, 1, 2, 3])
    def test_x_error_always_flagged(self, atom):
        res = flying_ancilla_syndrome(shots=40, seed=1, inject=(atom, "X"))
        assert res["flag_rate"] == 1.0

    def test_no_error_never_flagged(self):
        res = flying_ancilla_syndrome(shots=40, seed=1)
        assert res["flag_rate"] == 0.0 and res["correct_raw"] == 1.0

    def test_z_error_invisible_to_zzzz(self):
        res = flying_ancilla_syndrome(shots=40, seed=1, inject=(2, "Z"))
        assert res["flag_rate"] == 0.0

    def test_failed_transfer_loses_herald(self):
        cfg = FlyingAncillaConfig(transfer_fidelity=0.5)
        res = flying_ancilla_prepare(cfg=cfg, shots=400, seed=4)
        assert 0.35 < res["herald_fraction"] < 0.65
        assert res["success"] == 1.0
