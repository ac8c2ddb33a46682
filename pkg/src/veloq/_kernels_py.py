"""Pure-Python/NumPy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
The compiled module is preferred at import time (see ``veloq._core``); this
one is the fallback and the reference the compiled kernels are tested against.

Qubit ``q`` of an ``n``-qubit state vector is bit ``n - 1 - q`` of the basis
index (qubit 0 is the most significant bit).
"""

import math

import numpy as np

# Gauss-Legendre nodes and weights of the 4th-order commutator-free Magnus step.
_SQ3 = math.sqrt(3.0)
NODE_A = 0.5 - _SQ3 / 6.0
NODE_B = 0.5 + _SQ3 / 6.0
W_SMALL = (3.0 - 2.0 * _SQ3) / 12.0
W_LARGE = (3.0 + 2.0 * _SQ3) / 12.0


def _su2_step(rabi, delta, h, wa, wb, phase_a, phase_b):
    # exp(-i h M) with M = wa*H(phase_a) + wb*H(phase_b), wa + wb = 1/2
    half = 0.5 * rabi
    w = half * (wa * complex(math.cos(phase_a), math.sin(phase_a))
                + wb * complex(math.cos(phase_b), math.sin(phase_b)))
    bz = 0.25 * delta
    norm = math.sqrt(bz * bz + w.real * w.real + w.imag * w.imag)
    c = math.cos(h * norm)
    s = h if norm == 0.0 else math.sin(h * norm) / norm
    glob = complex(math.cos(0.25 * delta * h), math.sin(0.25 * delta * h))
    return (glob * complex(c, -s * bz), glob * (-1j * s * w),
            glob * (-1j * s * w.conjugate()), glob * complex(c, s * bz))


def two_level_cf4(rabi, delta, h, phase_a, phase_b):
    """Propagator of a driven two-level system over ``len(phase_a)`` steps.

    The Hamiltonian in the ``(g, e)`` basis is
    ``[[0, rabi/2 e^{i phi}], [rabi/2 e^{-i phi}, -delta]]`` where ``phi`` is
    sampled at the two Gauss nodes of every step (``phase_a`` and
    ``phase_b``). Each step is a product of two exact SU(2) exponentials, so
    the result is unitary to rounding error.
    """
    u00, u01, u10, u11 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    for k in range(len(phase_a)):
        pa = float(phase_a[k])
        pb = float(phase_b[k])
        for wa, wb in ((W_LARGE, W_SMALL), (W_SMALL, W_LARGE)):
            s00, s01, s10, s11 = _su2_step(rabi, delta, h, wa, wb, pa, pb)
            u00, u01, u10, u11 = (s00 * u00 + s01 * u10, s00 * u01 + s01 * u11,
                                  s10 * u00 + s11 * u10, s10 * u01 + s11 * u11)
    return np.array([[u00, u01], [u10, u11]], dtype=np.complex128)


def chain_apply(first, second, psi):
    """Return ``second[K-1] first[K-1] ... second[0] first[0] psi``."""
    out = np.array(psi, dtype=np.complex128)
    for k in range(first.shape[0]):
        out = second[k] @ (first[k] @ out)
    return out


def apply_1q(psi, n, q, u):
    """Apply the 2x2 matrix ``u`` to qubit ``q`` of ``psi`` in place."""
    view = psi.reshape(1 << q, 2, 1 << (n - q - 1))
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = u[0, 0] * a + u[0, 1] * b
    view[:, 1, :] = u[1, 0] * a + u[1, 1] * b


def apply_diag_2q(psi, n, q1, q2, diag):
    """Multiply ``psi`` in place by ``diag[2*b1 + b2]`` for qubits ``q1, q2``."""
    idx = np.arange(psi.shape[0])
    b1 = (idx >> (n - 1 - q1)) & 1
    b2 = (idx >> (n - 1 - q2)) & 1
    psi *= np.asarray(diag, dtype=np.complex128)[2 * b1 + b2]
