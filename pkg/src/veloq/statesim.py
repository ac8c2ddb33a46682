"""Monte-Carlo state-vector simulator with per-atom loss and leakage flags.

Qubit 0 is the most significant bit of the basis index. Atoms that are lost,
or that leave the qubit manifold, are removed from the coherent state by a
projective Z measurement; they keep their slot in the vector but no gate
touches them again. Noise channels are sampled per shot (quantum
trajectories), so memory stays at ``2**n`` amplitudes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._core import kernels
from .errors import EmptyResultError, InvalidArgumentError, ProtocolError
from .pulsephysics import rotation

LOST = -1
MAX_QUBITS = 16

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
PAULIS = (I2, X, Y, Z)
CZ_DIAG = np.array([1, 1, 1, -1], dtype=np.complex128)

CHANNEL_KINDS = ("depolarizing1q", "depolarizing2q", "dephasing", "loss", "readout_flip", "leakage")
GATE_CLASSES = ("1q", "cz", "flyby_cz", "transfer", "measure", "displacement")


def rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


@dataclass(frozen=True)
class NoiseChannel:
    """``kind`` with probability ``strength`` after every gate of class ``attach``.

    Depolarizing channels apply a uniformly random Pauli (identity included),
    so ``depolarizing1q(p)`` maps ``rho -> (1 - p) rho + p I/2``.
    """

    kind: str
    strength: float
    attach: str

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise InvalidArgumentError(f"unknown channel kind {self.kind!r}")
        if self.attach not in GATE_CLASSES:
            raise InvalidArgumentError(f"unknown attach point {self.attach!r}")
        if not 0.0 <= self.strength <= 1.0:
            raise InvalidArgumentError(f"strength must lie in [0, 1], got {self.strength}")


@dataclass
class NoiseModel:
    channels: list = field(default_factory=list)

    def on(self, gate_class: str) -> list:
        return [c for c in self.channels if c.attach == gate_class and c.strength > 0]

    def strength(self, kind: str, gate_class: str) -> float:
        return sum(c.strength for c in self.channels if c.kind == kind and c.attach == gate_class)

    @property
    def is_noiseless(self) -> bool:
        return all(c.strength == 0 for c in self.channels)


@dataclass
class MeasurementRecord:
    shot: int
    outcomes: np.ndarray
    kept: bool = True
    meta: dict = field(default_factory=dict)


class Register:
    """State vector of ``n`` atoms plus classical presence / manifold flags."""

    def __init__(self, n: int, seed=0, noise: NoiseModel | None = None,
                 in_manifold: Sequence[bool] | None = None):
        if not 1 <= n <= MAX_QUBITS:
            raise InvalidArgumentError(f"register size must lie in [1, {MAX_QUBITS}], got {n}")
        self.n = n
        self.psi = np.zeros(1 << n, dtype=np.complex128)
        self.psi[0] = 1.0
        self.present = np.ones(n, dtype=bool)
        self.in_manifold = (np.ones(n, dtype=bool) if in_manifold is None
                            else np.array(in_manifold, dtype=bool))
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        self.noise = noise or NoiseModel()
        self._idx = np.arange(1 << n)

    # bookkeeping ------------------------------------------------------------------

    def active(self, q: int) -> bool:
        return bool(self.present[q] and self.in_manifold[q])

    def _check(self, targets):
        for q in targets:
            if not 0 <= q < self.n:
                raise InvalidArgumentError(f"qubit {q} out of range for n={self.n}")
            if not self.present[q]:
                raise ProtocolError(f"atom {q} is lost")
            if not self.in_manifold[q]:
                raise ProtocolError(f"atom {q} is outside the qubit manifold")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def _bit(self, q):
        return (self._idx >> (self.n - 1 - q)) & 1

    def prob_one(self, q: int) -> float:
        return float(np.sum(np.abs(self.psi[self._bit(q) == 1]) ** 2))

    def _project(self, q: int) -> int:
        p1 = self.prob_one(q)
        b = int(self.rng.random() < p1)
        mask = self._bit(q) != b
        self.psi[mask] = 0.0
        self.psi /= np.linalg.norm(self.psi)
        return b

    def _force_zero(self, q: int):
        if self._project(q):
            kernels.apply_1q(self.psi, self.n, q, X)

    def lose(self, q: int):
        """Flag atom ``q`` as lost and remove it from the coherent state."""
        if self.present[q]:
            if self.in_manifold[q]:
                self._project(q)
            self.present[q] = False

    def leak(self, q: int):
        """Move atom ``q`` out of the qubit manifold (detectable as missing in SRD)."""
        if self.present[q] and self.in_manifold[q]:
            self._project(q)
            self.in_manifold[q] = False

    def enter(self, q: int):
        """Bring a present out-of-manifold atom into the manifold in ``|0>``."""
        if self.present[q] and not self.in_manifold[q]:
            self._force_zero(q)
            self.in_manifold[q] = True

    # noise ------------------------------------------------------------------------

    def _after_gate(self, gate_class: str, targets, pairs=()):
        for ch in self.noise.on(gate_class):
            if ch.kind == "depolarizing2q":
                for a, b in pairs:
                    if self.active(a) and self.active(b) and self.rng.random() < ch.strength:
                        k = int(self.rng.integers(16))
                        self._pauli(a, k >> 2)
                        self._pauli(b, k & 3)
                continue
            for q in targets:
                if not self.active(q) or self.rng.random() >= ch.strength:
                    continue
                if ch.kind == "depolarizing1q":
                    self._pauli(q, int(self.rng.integers(4)))
                elif ch.kind == "dephasing":
                    self._pauli(q, 3)
                elif ch.kind == "loss":
                    self.lose(q)
                elif ch.kind == "leakage":
                    self.leak(q)

    def _pauli(self, q: int, k: int):
        if k:
            kernels.apply_1q(self.psi, self.n, q, PAULIS[k])

    # gates ------------------------------------------------------------------------

    def apply_single_qubit(self, targets, unitary, gate_class: str = "1q") -> "Register":
        targets = _as_list(targets)
        self._check(targets)
        u = np.ascontiguousarray(unitary, dtype=np.complex128)
        for q in targets:
            kernels.apply_1q(self.psi, self.n, q, u)
        self._after_gate(gate_class, targets)
        return self

    def apply_cz(self, pairs, gate_class: str = "cz", gate=None) -> "Register":
        """Controlled-Z on each pair.

        ``gate`` may be a :class:`veloq.rydberg.GateResult`; its phases replace
        the ideal diagonal and its leakage loses one atom of the pair (chosen
        at random) with that probability.
        """
        pairs = [tuple(p) for p in pairs]
        seen = [q for p in pairs for q in p]
        if len(set(seen)) != len(seen) or any(a == b for a, b in pairs):
            raise InvalidArgumentError(f"CZ pairs must be disjoint: {pairs}")
        self._check(seen)
        diag = CZ_DIAG if gate is None else np.ascontiguousarray(gate.diagonal())
        for a, b in pairs:
            kernels.apply_diag_2q(self.psi, self.n, a, b, diag)
        if gate is not None and gate.leakage > 0:
            for a, b in pairs:
                if self.rng.random() < gate.leakage:
                    self.lose(a if self.rng.random() < 0.5 else b)
        self._after_gate(gate_class, seen, pairs)
        return self

    def velocity_selective_transfer(self, targets, transfer_fidelity: float = 1.0,
                                    spectators=(), spectator_infidelity: float = 0.0,
                                    direction: str = "in") -> "Register":
        """Doppler-selective transfer of moving ``targets`` into (or out of) the manifold.

        Failed transfers leave the atom on the wrong side of the manifold,
        which state-resolved imaging reports as missing. Each spectator flips
        its manifold membership with probability ``spectator_infidelity``.
        """
        for val in (transfer_fidelity, spectator_infidelity):
            if not 0.0 <= val <= 1.0:
                raise InvalidArgumentError("probabilities must lie in [0, 1]")
        if direction not in ("in", "out"):
            raise InvalidArgumentError("direction must be 'in' or 'out'")
        for q in _as_list(targets):
            if not self.present[q]:
                continue
            if self.rng.random() < transfer_fidelity:
                self.enter(q) if direction == "in" else self.leak(q)
        for q in _as_list(spectators):
            if self.present[q] and self.rng.random() < spectator_infidelity:
                self.leak(q) if self.in_manifold[q] else self.enter(q)
        self._after_gate("transfer", [q for q in _as_list(targets) if self.active(q)])
        return self

    def measure(self, targets=None, basis: str = "Z") -> np.ndarray:
        """Projective readout; returns 0/1 per target or ``LOST`` (-1)."""
        targets = list(range(self.n)) if targets is None else _as_list(targets)
        if basis not in ("Z", "X"):
            raise InvalidArgumentError(f"basis must be 'Z' or 'X', got {basis!r}")
        flip = self.noise.strength("readout_flip", "measure")
        out = np.empty(len(targets), dtype=np.int8)
        for i, q in enumerate(targets):
            if not self.active(q):
                out[i] = LOST
                continue
            if basis == "X":
                kernels.apply_1q(self.psi, self.n, q, H)
            b = self._project(q)
            if basis == "X":
                kernels.apply_1q(self.psi, self.n, q, H)
            if flip and self.rng.random() < flip:
                b ^= 1
            out[i] = b
        self._after_gate("measure", [q for q in targets if self.active(q)])
        return out

    def expectation(self, pauli: str) -> float:
        """Exact ``<psi|P|psi>`` for a Pauli string such as ``"XZI"``."""
        if len(pauli) != self.n:
            raise InvalidArgumentError(f"Pauli string length {len(pauli)} != {self.n}")
        phi = self.psi.copy()
        for q, c in enumerate(pauli.upper()):
            if c == "I":
                continue
            if c not in "XYZ":
                raise InvalidArgumentError(f"bad Pauli letter {c!r}")
            kernels.apply_1q(phi, self.n, q, PAULIS["IXYZ".index(c)])
        return float(np.real(np.vdot(self.psi, phi)))

    def statevector(self) -> np.ndarray:
        return self.psi.copy()


def _as_list(targets):
    if isinstance(targets, (int, np.integer)):
        return [int(targets)]
    return [int(t) for t in targets]


# module-level API -----------------------------------------------------------------

def apply_single_qubit(reg: Register, targets, unitary, gate_class: str = "1q") -> Register:
    return reg.apply_single_qubit(targets, unitary, gate_class)


def apply_cz(reg: Register, pairs, gate_class: str = "cz", gate=None) -> Register:
    return reg.apply_cz(pairs, gate_class, gate)


def velocity_selective_transfer(reg: Register, targets, transfer_fidelity: float,
                                spectator_infidelity: float = 0.0, spectators=(),
                                direction: str = "in") -> Register:
    return reg.velocity_selective_transfer(targets, transfer_fidelity, spectators,
                                           spectator_infidelity, direction)


def measure(reg: Register, targets=None, basis: str = "Z", shot: int = 0) -> MeasurementRecord:
    return MeasurementRecord(shot, reg.measure(targets, basis))


def expectation(reg: Register, pauli: str) -> float:
    return reg.expectation(pauli)


# circuits ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Op:
    """One circuit instruction; see :func:`execute` for the recognised names."""

    name: str
    targets: tuple = ()
    params: dict = field(default_factory=dict)


def _gate_matrix(op: Op):
    if op.name == "h":
        return H
    if op.name == "x":
        return X
    if op.name == "z":
        return Z
    if op.name == "rz":
        return rz(op.params["angle"])
    if op.name == "rot":
        return rotation(op.params["angle"], op.params.get("phi", 0.0))
    if op.name == "u":
        return np.asarray(op.params["matrix"], dtype=np.complex128)
    return None


def execute(ops: Sequence[Op], reg: Register) -> dict:
    """Run ``ops`` on ``reg``; returns measurement outcomes keyed by op ``label``.

    Names: ``h``, ``x``, ``z``, ``rz``, ``rot`` (angle, phi), ``u`` (matrix),
    ``pauli`` (letters), ``cz`` (pairs), ``flyby_cz`` (pairs, gate),
    ``transfer`` (fidelity, spectators, spectator_infidelity, direction),
    ``measure`` (basis, label). Gates are skipped on atoms that are no longer
    active, mirroring an experiment where a lost atom simply is not there.
    """
    results = {}
    for op in ops:
        u = _gate_matrix(op)
        if u is not None:
            live = [q for q in op.targets if reg.active(q)]
            if live:
                reg.apply_single_qubit(live, u, op.params.get("gate_class", "1q"))
        elif op.name == "pauli":
            for q, c in zip(op.targets, op.params["letters"]):
                if reg.active(q) and c != "I":
                    kernels.apply_1q(reg.psi, reg.n, q, PAULIS["IXYZ".index(c)])
        elif op.name in ("cz", "flyby_cz"):
            pairs = [p for p in op.params["pairs"] if reg.active(p[0]) and reg.active(p[1])]
            if pairs:
                reg.apply_cz(pairs, op.name, op.params.get("gate"))
        elif op.name == "transfer":
            reg.velocity_selective_transfer(op.targets, op.params.get("fidelity", 1.0),
                                            op.params.get("spectators", ()),
                                            op.params.get("spectator_infidelity", 0.0),
                                            op.params.get("direction", "in"))
        elif op.name == "measure":
            results[op.params.get("label", "m")] = reg.measure(op.targets, op.params.get("basis", "Z"))
        elif op.name == "barrier":
            pass
        else:
            raise InvalidArgumentError(f"unknown op {op.name!r}")
    return results


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """Independent generator for one shot, reproducible from ``(seed, shot)``."""
    return np.random.default_rng([int(seed), int(shot)])


def run_shots(build: Callable[[], Register], ops: Sequence[Op], shots: int, seed: int,
              label: str = "m") -> list:
    """Execute ``ops`` once per shot on a fresh register from ``build(rng)``."""
    if shots < 1:
        raise InvalidArgumentError("shots must be >= 1")
    records = []
    for s in range(shots):
        reg = build(shot_rng(seed, s))
        res = execute(ops, reg)
        records.append(MeasurementRecord(s, res[label], True, {k: v for k, v in res.items() if k != label}))
    return records


# post-selection -------------------------------------------------------------------

def _predicate(name, **kw) -> Callable:
    if callable(name):
        return name
    if name == "all_present":
        atoms = kw.get("atoms")
        return lambda r: bool(np.all((r.outcomes if atoms is None else r.outcomes[atoms]) != LOST))
    if name == "parity_even_in_basis":
        atoms = kw.get("atoms")

        def even(r):
            o = r.outcomes if atoms is None else r.outcomes[atoms]
            return bool(np.all(o != LOST) and int(np.sum(o)) % 2 == 0)
        return even
    if name == "ancilla_outcome":
        idx, value = kw["index"], kw.get("value", 0)
        return lambda r: int(r.outcomes[idx]) == value
    raise InvalidArgumentError(f"unknown predicate {name!r}")


def post_select(records, predicate="all_present", **kw):
    """Keep records satisfying ``predicate``; returns ``(kept, discard_fraction, stderr)``."""
    if not records:
        raise EmptyResultError("no records to post-select")
    pred = _predicate(predicate, **kw)
    kept = []
    for r in records:
        ok = pred(r)
        r.kept = bool(r.kept and ok)
        if ok:
            kept.append(r)
    if not kept:
        raise EmptyResultError(f"post-selection {predicate!r} kept no shots")
    n = len(records)
    frac = 1.0 - len(kept) / n
    return kept, frac, math.sqrt(frac * (1.0 - frac) / n)


def parity_expectation(records, atoms) -> tuple[float, float]:
    """Mean and standard error of ``(-1)^(sum of outcomes)`` over ``atoms``."""
    vals = np.array([1 - 2 * (int(np.sum(r.outcomes[list(atoms)])) % 2) for r in records], float)
    if vals.size == 0:
        raise EmptyResultError("no records")
    err = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.inf
    return float(vals.mean()), err


def write_records_csv(path, records) -> None:
    if not records:
        raise EmptyResultError("no records")
    n = len(records[0].outcomes)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["shot"] + [f"atom{i}" for i in range(n)] + ["kept"])
        for r in records:
            w.writerow([r.shot] + [int(o) for o in r.outcomes] + [int(r.kept)])
