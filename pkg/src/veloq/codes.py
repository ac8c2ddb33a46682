"""Entangled-state protocols: linear cluster states, the [[4,2,2]] code and a flying ancilla.

Measurement bases are chosen kinematically. Every atom sees the same global
``pi/2 - pi - pi/2`` Raman echo; an atom displaced by ``dx`` along the Raman
axis during the ``pi`` pulse picks up the drive phase ``phi = k_FS dx`` on that
pulse only, which turns its measured observable by ``2 phi`` away from ``Z``.
An ``lambda_FS / 8`` displacement therefore reads out an equatorial Pauli while
undisplaced atoms read out ``Z``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyResultError, InvalidArgumentError
from .pulsephysics import LAMBDA_FS, displacement_phase, rotation, wavevector
from .statesim import LOST, NoiseModel, Op, Register, execute, shot_rng

K_FS = wavevector(LAMBDA_FS)
PAULI_MATS = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def paulis_commute(p: str, q: str) -> bool:
    if len(p) != len(q):
        raise InvalidArgumentError("Pauli strings of different length")
    clash = sum(1 for a, b in zip(p, q) if a != "I" and b != "I" and a != b)
    return clash % 2 == 0


# cluster states -------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterSpec:
    n: int
    edges: tuple = ()

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgumentError(f"cluster needs n >= 2, got {self.n}")
        if not self.edges:
            object.__setattr__(self, "edges", tuple((i, i + 1) for i in range(self.n - 1)))
        for a, b in self.edges:
            if not (0 <= a < self.n and 0 <= b < self.n) or a == b:
                raise InvalidArgumentError(f"bad edge {(a, b)}")

    def neighbours(self, i: int) -> list:
        return sorted({b for a, b in self.edges if a == i} | {a for a, b in self.edges if b == i})

    @property
    def stabilizers(self) -> list:
        out = []
        for i in range(self.n):
            s = ["I"] * self.n
            s[i] = "X"
            for j in self.neighbours(i):
                s[j] = "Z"
            out.append("".join(s))
        return out

    def check_commutation(self) -> bool:
        st = self.stabilizers
        return all(paulis_commute(a, b) for a in st for b in st)

    def edge_layers(self) -> list:
        """Greedy split of the edges into layers of disjoint pairs."""
        layers = []
        for e in self.edges:
            for layer in layers:
                if not any(set(e) & set(f) for f in layer):
                    layer.append(e)
                    break
            else:
                layers.append([e])
        return layers


def build_linear_cluster_circuit(n: int) -> list:
    """``|+>^n`` followed by CZ on every chain edge (two parallel layers)."""
    spec = ClusterSpec(n)
    ops = [Op("h", tuple(range(n)))]
    for layer in spec.edge_layers():
        ops.append(Op("cz", (), {"pairs": [tuple(e) for e in layer]}))
    return ops


@dataclass(frozen=True)
class BasisPlan:
    """Displacement (metres along the Raman axis) applied to each atom during the echo pi pulse."""

    displacements: tuple
    axis_phase: float = 0.0

    def phases(self) -> np.ndarray:
        return np.array([displacement_phase(K_FS, (dx, 0.0)) for dx in self.displacements])


# global echo phase making a lambda_FS/8 displacement read out +-X
ECHO_AXIS_PHASE = 0.0


def echo_unitary(phi: float, axis_phase: float = ECHO_AXIS_PHASE) -> np.ndarray:
    r2 = rotation(math.pi / 2, axis_phase)
    return r2 @ rotation(math.pi, axis_phase + phi) @ r2


def echo_observable(phi: float, axis_phase: float = ECHO_AXIS_PHASE) -> np.ndarray:
    """Heisenberg-picture observable ``U^dag Z U`` read out by the echo."""
    u = echo_unitary(phi, axis_phase)
    return u.conj().T @ PAULI_MATS["Z"] @ u


def pauli_decompose(m: np.ndarray) -> dict:
    return {k: float(np.real(np.trace(v @ m))) / 2 for k, v in PAULI_MATS.items()}


def _atom_sign(phi, letter, axis_phase, tol=1e-9):
    comps = pauli_decompose(echo_observable(phi, axis_phase))
    s = comps[letter]
    if abs(abs(s) - 1) > tol:
        return 0
    return 1 if s > 0 else -1


def stabilizer_plans(spec: ClusterSpec) -> list:
    """Two plans: displace even atoms (their stabilizers read out), then odd atoms."""
    plans = []
    for parity in (0, 1):
        dx = tuple(LAMBDA_FS / 8 if i % 2 == parity else 0.0 for i in range(spec.n))
        plans.append(BasisPlan(dx))
    return plans


def readout_ops(plan: BasisPlan, n: int, label: str = "m") -> list:
    if len(plan.displacements) != n:
        raise InvalidArgumentError(f"plan has {len(plan.displacements)} entries for {n} atoms")
    a = plan.axis_phase
    ops = [Op("rot", tuple(range(n)), {"angle": math.pi / 2, "phi": a})]
    for q, ph in enumerate(plan.phases()):
        cls = "displacement" if plan.displacements[q] != 0 else "1q"
        ops.append(Op("rot", (q,), {"angle": math.pi, "phi": a + ph, "gate_class": cls}))
    ops.append(Op("rot", tuple(range(n)), {"angle": math.pi / 2, "phi": a}))
    ops.append(Op("measure", tuple(range(n)), {"basis": "Z", "label": label}))
    return ops


def measurable(stab: str, plan: BasisPlan):
    """Per-atom signs if ``stab`` is read out by ``plan``, else ``None``."""
    signs = []
    for q, (letter, ph) in enumerate(zip(stab, plan.phases())):
        if letter == "I":
            signs.append(0)
            continue
        s = _atom_sign(ph, letter, plan.axis_phase)
        if s == 0:
            return None
        signs.append(s)
    return signs


def stabilizer_readout_exact(state: np.ndarray, spec: ClusterSpec, plan: BasisPlan) -> dict:
    """Noiseless stabilizer values obtained through the displacement echo.

    The echo unitaries are applied to a copy of ``state`` and the product of
    Z outcomes is evaluated exactly; the result maps stabilizer index to value.
    """
    if len(plan.displacements) != spec.n:
        raise InvalidArgumentError("inconsistent plan length")
    reg = Register(spec.n)
    reg.psi[:] = state
    for q, ph in enumerate(plan.phases()):
        reg.apply_single_qubit(q, echo_unitary(ph, plan.axis_phase))
    out = {}
    for i, stab in enumerate(spec.stabilizers):
        signs = measurable(stab, plan)
        if signs is None:
            continue
        zs = "".join("Z" if c != "I" else "I" for c in stab)
        out[i] = float(np.prod([s for s in signs if s])) * reg.expectation(zs)
    return out


def cluster_state(n: int) -> np.ndarray:
    reg = Register(n)
    execute(build_linear_cluster_circuit(n), reg)
    return reg.statevector()


def _stab_value(outcomes, signs):
    parity = 0
    for o, s in zip(outcomes, signs):
        if s:
            parity ^= int(o) & 1
    sign = int(np.prod([s for s in signs if s]))
    return sign * (1 - 2 * parity)


def cluster_stabilizers(n: int, noise: NoiseModel | None = None, shots: int = 10_000,
                        seed: int = 0) -> dict:
    """Monte-Carlo stabilizer values of an ``n``-atom chain read out by displacement.

    Each of the two basis plans runs ``shots`` times. ``postselected`` keeps
    shots where every atom is present (state-resolved detection); ``raw``
    keeps all shots and reads a missing atom as ``1``.
    """
    spec = ClusterSpec(n)
    noise = noise or NoiseModel()
    circuit = build_linear_cluster_circuit(n)
    ps_vals = {i: [] for i in range(n)}
    raw_vals = {i: [] for i in range(n)}
    n_kept = n_total = 0
    for pi_, plan in enumerate(stabilizer_plans(spec)):
        ops = circuit + readout_ops(plan, n)
        readable = {i: measurable(s, plan) for i, s in enumerate(spec.stabilizers)}
        readable = {i: s for i, s in readable.items() if s is not None}
        for shot in range(shots):
            reg = Register(n, shot_rng(seed, pi_ * shots + shot), noise)
            o = execute(ops, reg)["m"]
            present = bool(np.all(o != LOST))
            raw_o = np.where(o == LOST, 1, o)
            n_total += 1
            n_kept += present
            for i, signs in readable.items():
                v = _stab_value(raw_o, signs)
                raw_vals[i].append(v)
                if present:
                    ps_vals[i].append(v)
    if n_kept == 0:
        raise EmptyResultError("no shot had all atoms present")

    def summary(vals):
        arr = {i: np.array(v, float) for i, v in vals.items()}
        means = np.array([arr[i].mean() for i in range(n)])
        errs = np.array([arr[i].std(ddof=1) / math.sqrt(arr[i].size) if arr[i].size > 1 else math.inf
                         for i in range(n)])
        return means, errs

    ps, ps_err = summary(ps_vals)
    raw, raw_err = summary(raw_vals)
    return {"postselected": ps, "postselected_err": ps_err, "raw": raw, "raw_err": raw_err,
            "discard_fraction": 1.0 - n_kept / n_total}


def entanglement_witness(values) -> bool:
    """True iff every stabilizer value exceeds 0.5 (strictly)."""
    v = np.asarray(values, dtype=float)
    return bool(v.size > 0 and np.all(v > 0.5))


def write_stabilizer_report(path, result: dict) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stabilizer_index", "value", "stderr", "postselected"])
        for key, flag in (("postselected", 1), ("raw", 0)):
            for i, (v, e) in enumerate(zip(result[key], result[key + "_err"])):
                w.writerow([i, repr(float(v)), repr(float(e)), flag])


# [[4,2,2]] --------------------------------------------------------------------------

@dataclass(frozen=True)
class FourTwoTwoCode:
    """Stabilizers XXXX, ZZZZ with weight-two logical operators."""

    stabilizers: tuple = ("XXXX", "ZZZZ")
    logicals: dict = field(default_factory=lambda: {
        "X1": "XXII", "Z1": "ZIZI", "X2": "XIXI", "Z2": "ZZII"})

    def check(self) -> bool:
        L = self.logicals
        ok = all(paulis_commute(s, t) for s in self.stabilizers for t in self.stabilizers)
        ok &= all(paulis_commute(s, l) for s in self.stabilizers for l in L.values())
        ok &= not paulis_commute(L["X1"], L["Z1"]) and not paulis_commute(L["X2"], L["Z2"])
        ok &= all(paulis_commute(L[a], L[b]) for a, b in
                  (("X1", "Z2"), ("X2", "Z1"), ("X1", "X2"), ("Z1", "Z2")))
        return bool(ok)

    def logical_state(self, bits: tuple) -> np.ndarray:
        """Physical 4-qubit vector of ``|b1 b2>_L``.

        ``|00>_L`` is the +1 eigenstate of ZZZZ, XXXX, Z_L1 and Z_L2, i.e.
        ``(|0000> + |1111>)/sqrt 2``; the others follow by applying X_L.
        """
        psi = np.zeros(16, dtype=np.complex128)
        psi[0] = psi[15] = 1 / math.sqrt(2)
        reg = Register(4)
        reg.psi[:] = psi
        for flag, key in zip(bits, ("X1", "X2")):
            if flag:
                for q, c in enumerate(self.logicals[key]):
                    if c == "X":
                        reg.apply_single_qubit(q, PAULI_MATS["X"])
        return reg.statevector()

    def logical_bell_state(self) -> np.ndarray:
        return (self.logical_state((0, 0)) + self.logical_state((1, 1))) / math.sqrt(2)


def logical_bell_circuit() -> list:
    """Bell pairs on atoms (0, 3) and (1, 2): H on all, two CZs, H on atoms 3 and 2.

    The product of the two pairs equals ``(|00>_L + |11>_L)/sqrt 2``. Each
    atom takes part in one CZ, so no single fault spreads to two data atoms.
    """
    return [Op("h", (0, 1, 2, 3)), Op("cz", (), {"pairs": [(0, 3), (1, 2)]}), Op("h", (3, 2))]


def _run_basis(ops, basis, noise, shots, seed, stream):
    recs = []
    for s in range(shots):
        reg = Register(4, shot_rng(seed, stream * shots + s), noise)
        out = execute(ops + [Op("measure", (0, 1, 2, 3), {"basis": basis, "label": "m"})], reg)["m"]
        recs.append(out)
    return np.array(recs)


def _pair_parity(outs, a, b):
    return 1 - 2 * ((outs[:, a] + outs[:, b]) % 2)


def _mean_err(vals):
    vals = np.asarray(vals, float)
    if vals.size == 0:
        raise EmptyResultError("no shots survived")
    err = vals.std(ddof=1) / math.sqrt(vals.size) if vals.size > 1 else math.inf
    return float(vals.mean()), float(err)


def logical_bell_protocol(noise: NoiseModel | None = None, shots: int = 10_000,
                          seed: int = 0) -> dict:
    """Lower bound ``F_L >= (<X_L X_L> + <Z_L Z_L>)/2`` with parity post-selection.

    ``shots`` runs are taken in each of the Z and X bases. The physical Bell
    fidelity uses the same estimator on the pairs (0, 3) and (1, 2), keeping
    every shot in which the pair is present. The discard fraction counts
    parity failures among shots with all four atoms present.
    """
    noise = noise or NoiseModel()
    code = FourTwoTwoCode()
    ops = logical_bell_circuit()
    # X_L1 X_L2 = X1 X2 X1 X3 and Z_L1 Z_L2 both act on atoms 1 and 2
    xl = [q for q, (a, b) in enumerate(zip(code.logicals["X1"], code.logicals["X2"])) if (a == "X") != (b == "X")]
    zl = [q for q, (a, b) in enumerate(zip(code.logicals["Z1"], code.logicals["Z2"])) if (a == "Z") != (b == "Z")]
    res = {}
    discard_num = discard_den = 0
    phys = {}
    for stream, (basis, atoms) in enumerate((("Z", zl), ("X", xl))):
        outs = _run_basis(ops, basis, noise, shots, seed, stream)
        present = np.all(outs != LOST, axis=1)
        even = present & (np.sum(np.where(outs == LOST, 0, outs), axis=1) % 2 == 0)
        discard_num += int(np.sum(present & ~even))
        discard_den += int(np.sum(present))
        if not np.any(even):
            raise EmptyResultError("post-selection kept no shots")
        res[basis] = _mean_err(_pair_parity(outs[even], *atoms))
        pair_vals = []
        for a, b in ((0, 3), (1, 2)):
            ok = (outs[:, a] != LOST) & (outs[:, b] != LOST)
            pair_vals.append(_pair_parity(outs[ok], a, b))
        phys[basis] = _mean_err(np.concatenate(pair_vals))
    dfrac = discard_num / max(discard_den, 1)
    f_l = 0.5 * (res["X"][0] + res["Z"][0])
    f_l_err = 0.5 * math.hypot(res["X"][1], res["Z"][1])
    f_p = 0.5 * (phys["X"][0] + phys["Z"][0])
    f_p_err = 0.5 * math.hypot(phys["X"][1], phys["Z"][1])
    return {"logical_fidelity": f_l, "logical_fidelity_err": f_l_err,
            "physical_fidelity": f_p, "physical_fidelity_err": f_p_err,
            "discard_fraction": dfrac,
            "discard_fraction_err": math.sqrt(dfrac * (1 - dfrac) / max(discard_den, 1))}


# flying ancilla -----------------------------------------------------------------------

@dataclass(frozen=True)
class FlyingAncillaConfig:
    """Protocol constants not covered by :class:`NoiseModel`.

    ``gate`` is a :class:`veloq.rydberg.GateResult` for the fly-by CZ (ideal
    CZ when ``None``); atom 1 of the gate is the moving ancilla.
    """

    transfer_fidelity: float = 1.0
    spectator_infidelity: float = 0.0
    gate: object = None


DATA = (0, 1, 2, 3)


def _ancilla_cycle(anc: int, cfg: FlyingAncillaConfig, label: str) -> list:
    ops = [Op("transfer", (anc,), {"fidelity": cfg.transfer_fidelity, "spectators": DATA,
                                   "spectator_infidelity": cfg.spectator_infidelity}),
           Op("h", (anc,))]
    for d in DATA:
        ops.append(Op("flyby_cz", (), {"pairs": [(anc, d)], "gate": cfg.gate}))
    ops += [Op("h", (anc,)), Op("measure", (anc,), {"label": label})]
    return ops


def _new_register(n_anc, noise, rng):
    n = len(DATA) + n_anc
    return Register(n, rng, noise, in_manifold=[True] * len(DATA) + [False] * n_anc)


def _herald_and_correct(reg, m):
    # ancilla outcome 1 projects onto ZZZZ = -1; an X on atom 0 maps it to +1
    if m == 1 and reg.active(0):
        reg.apply_single_qubit(0, PAULI_MATS["X"], "1q")


def flying_ancilla_prepare(noise: NoiseModel | None = None, cfg: FlyingAncillaConfig | None = None,
                           shots: int = 10_000, seed: int = 0, return_states: bool = False) -> dict:
    """Herald ZZZZ with a moving ancilla on ``|+>^4`` data and read the data in X.

    A shot is heralded when the ancilla is detected and every data atom is
    present. Among heralded shots those with odd data X-parity are discarded;
    success means ``X_L1 = X_L2 = +1`` among the remaining (valid) shots.
    """
    noise = noise or NoiseModel()
    cfg = cfg or FlyingAncillaConfig()
    code = FourTwoTwoCode()
    ops = [Op("h", DATA)] + _ancilla_cycle(4, cfg, "a")
    heralded = kept = correct = 0
    states = []
    for s in range(shots):
        reg = _new_register(1, noise, shot_rng(seed, s))
        m = int(execute(ops, reg)["a"][0])
        if m == LOST:
            continue
        _herald_and_correct(reg, m)
        if return_states and all(reg.active(q) for q in DATA):
            states.append(reg.statevector())
        out = reg.measure(DATA, "X")
        if np.any(out == LOST):
            continue
        heralded += 1
        if int(np.sum(out)) % 2:
            continue
        kept += 1
        correct += _logicals_plus(out, code)
    if kept == 0:
        raise EmptyResultError("no heralded shot survived post-selection")
    p = correct / kept
    d = 1.0 - kept / heralded
    res = {"success": p, "success_err": math.sqrt(max(p * (1 - p), 1.0 / kept) / kept),
           "discard_fraction": d, "discard_fraction_err": math.sqrt(d * (1 - d) / heralded),
           "herald_fraction": heralded / shots, "kept": kept}
    if return_states:
        res["states"] = states
    return res


def _logicals_plus(out, code):
    ok = True
    for key in ("X1", "X2"):
        atoms = [q for q, c in enumerate(code.logicals[key]) if c == "X"]
        ok &= int(np.sum(out[atoms])) % 2 == 0
    return int(ok)


def flying_ancilla_syndrome(noise: NoiseModel | None = None, cfg: FlyingAncillaConfig | None = None,
                            shots: int = 10_000, seed: int = 0, inject=None) -> dict:
    """Prepare with one flying ancilla, then measure ZZZZ again with a second one.

    ``inject`` is an optional ``(atom, letter)`` Pauli applied to the data
    between the two cycles. Half of the shots read the data in Z (correct
    means even Z-parity), half in X (correct means even X-parity and both
    X logicals +1). Returns correct-state probabilities with and without
    post-selecting on a trivial second syndrome, and the syndrome flag rate.
    """
    noise = noise or NoiseModel()
    cfg = cfg or FlyingAncillaConfig()
    code = FourTwoTwoCode()
    first = [Op("h", DATA)] + _ancilla_cycle(4, cfg, "a")
    second = _ancilla_cycle(5, cfg, "b")
    raw_ok, ps_ok, flagged, n_valid = [], [], 0, 0
    for s in range(shots):
        basis = "Z" if s % 2 == 0 else "X"
        reg = _new_register(2, noise, shot_rng(seed, s))
        m = int(execute(first, reg)["a"][0])
        if m == LOST:
            continue
        _herald_and_correct(reg, m)
        if inject is not None and reg.active(inject[0]):
            kernel_u = PAULI_MATS[inject[1]]
            reg.apply_single_qubit(inject[0], kernel_u, "1q")
        m2 = int(execute(second, reg)["b"][0])
        if m2 == LOST:
            continue
        out = reg.measure(DATA, basis)
        if np.any(out == LOST):
            continue
        n_valid += 1
        ok = int(np.sum(out)) % 2 == 0
        if basis == "X":
            ok = ok and bool(_logicals_plus(out, code))
        raw_ok.append(ok)
        flagged += m2 == 1
        if m2 == 0:
            ps_ok.append(ok)
    if not raw_ok:
        raise EmptyResultError("no valid shots")
    raw_m, raw_e = _mean_err(raw_ok)
    if ps_ok:
        ps_m, ps_e = _mean_err(ps_ok)
    else:
        ps_m, ps_e = float("nan"), float("inf")
    return {"correct_raw": raw_m, "correct_raw_err": raw_e,
            "correct_postselected": ps_m, "correct_postselected_err": ps_e,
            "flag_rate": flagged / n_valid, "valid": n_valid}
