"""Single-qubit Clifford randomized benchmarking.

The 24 Cliffords are generated from pi/2 rotations about two equatorial
axes. Sequences are simulated in the Pauli frame: injected Pauli errors are
moved to the end of the sequence by conjugation with the Clifford prefix,
which is exact for Pauli noise and costs O(shots) per gate.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError
from .fitting import fit
from .pulsephysics import rotation

_PAULI_MATS = (np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]),
               np.diag([1.0, -1.0]))
# Pauli index -> (x, z) bits; I, X, Y, Z
_BITS = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=np.uint8)


def _key(u: np.ndarray) -> tuple:
    flat = u.ravel()
    j = int(np.argmax(np.abs(flat) > 1e-9))
    v = flat * np.exp(-1j * np.angle(flat[j]))
    return tuple(np.round(v, 8).tolist())


@lru_cache(maxsize=1)
def clifford_group():
    """``(unitaries, mult, inverse, conj)`` for the 24 single-qubit Cliffords.

    ``mult[a, b]`` indexes ``C_a C_b``; ``conj[c, p]`` is the Pauli index of
    ``C_c^dag P_p C_c`` (signs dropped).
    """
    gens = [rotation(math.pi / 2, 0.0), rotation(math.pi / 2, math.pi / 2)]
    group = [np.eye(2, dtype=np.complex128)]
    seen = {_key(group[0]): 0}
    frontier = [group[0]]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                w = g @ u
                k = _key(w)
                if k not in seen:
                    seen[k] = len(group)
                    group.append(w)
                    nxt.append(w)
        frontier = nxt
    if len(group) != 24:
        raise RuntimeError(f"Clifford closure produced {len(group)} elements")
    n = len(group)
    mult = np.array([[seen[_key(a @ b)] for b in group] for a in group], dtype=np.int64)
    inverse = np.array([seen[_key(a.conj().T)] for a in group], dtype=np.int64)
    pauli_keys = {}
    for i, p in enumerate(_PAULI_MATS):
        pauli_keys[_key(p.astype(np.complex128))] = i
    conj = np.array([[pauli_keys[_key(c.conj().T @ p @ c)] for p in _PAULI_MATS] for c in group],
                    dtype=np.int64)
    return tuple(group), mult, inverse, conj, n


def rb_survival(length: int, depolarizing: float, shots: int, rng) -> float:
    """Fraction of shots returning to ``|0>`` after ``length`` random Cliffords plus inverse.

    After each Clifford, with probability ``depolarizing`` a uniformly random
    Pauli (identity included) acts, i.e. the channel ``(1 - q) rho + q I/2``.
    """
    if length < 1 or shots < 1:
        raise InvalidArgumentError("length and shots must be >= 1")
    _, mult, _, conj, n = clifford_group()
    prefix = np.zeros(shots, dtype=np.int64)
    frame = np.zeros((shots, 2), dtype=np.uint8)
    for _ in range(length):
        prefix = mult[rng.integers(0, n, size=shots), prefix]
        if depolarizing > 0:
            hit = rng.random(shots) < depolarizing
            if np.any(hit):
                idx = np.nonzero(hit)[0]
                p = rng.integers(0, 4, size=idx.size)
                # the final inverse undoes the prefix, so the error ends up as P^dag E P
                frame[idx] ^= _BITS[conj[prefix[idx], p]]
    return float(np.mean(frame[:, 0] == 0))


DEFAULT_LENGTHS = (1, 50, 100, 200, 300, 400, 500, 600, 800, 1000, 1200, 1500)


def rb_runner(lengths=DEFAULT_LENGTHS, error: float = 1e-3,
              shots: int = 10_000, seed: int = 0) -> dict:
    """Per-Clifford error recovered from the decay ``A p^m + B``.

    ``error`` is the injected per-Clifford error ``r``; the depolarizing
    probability is ``2 r`` so that ``r = (1 - p) / 2``.
    """
    if not 0.0 <= error <= 0.5:
        raise InvalidArgumentError("error must lie in [0, 0.5]")
    lengths = [int(m) for m in lengths]
    probs = np.array([rb_survival(m, 2.0 * error, shots, np.random.default_rng([seed, m]))
                      for m in lengths])
    if error == 0.0 and np.all(probs == 1.0):
        return {"error": 0.0, "error_err": 0.0, "fidelity": 1.0, "lengths": lengths,
                "survival": probs}
    # binomial weights; the floor keeps saturated points from dominating
    sigma = np.sqrt(np.maximum(probs * (1.0 - probs), 1.0 / shots) / shots)
    res = fit("rb_decay", lengths, probs, p0=(0.5, 1.0 - 2.0 * max(error, 1e-5), 0.5), sigma=sigma)
    r = (1.0 - res["p"]) / 2.0
    return {"error": r, "error_err": res.stderr["p"] / 2.0, "fidelity": 1.0 - r,
            "lengths": lengths, "survival": probs}
