"""Time the compiled kernels against the NumPy fallback.

Run from the repository root after ``pip install -e . --no-build-isolation``::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is also checked for agreement between the two backends.
"""

import argparse
import math
import timeit

import numpy as np

from veloq import _kernels_py

try:
    from veloq import _kernels
except ImportError:
    _kernels = None


def _cases(rng):
    n_steps = 2000
    h = 1e-7
    pa = rng.uniform(-math.pi, math.pi, n_steps)
    pb = rng.uniform(-math.pi, math.pi, n_steps)
    first = np.ascontiguousarray(np.linalg.qr(rng.normal(size=(300, 4, 4))
                                              + 1j * rng.normal(size=(300, 4, 4)))[0])
    second = first[::-1].copy()
    psi4 = np.zeros(4, complex)
    psi4[0] = 1
    n = 14
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    diag = np.array([1, 1, 1, -1], complex)

    def in_place(fn, *args):
        out = psi.copy()
        fn(out, *args)
        return out

    return {
        "two_level_cf4 (2000 steps)": lambda k: k.two_level_cf4(2 * math.pi * 40e3, 1e4, h, pa, pb),
        "chain_apply (300 x 4x4)": lambda k: k.chain_apply(first, second, psi4),
        "apply_1q (14 qubits)": lambda k: in_place(k.apply_1q, n, 5, u),
        "apply_diag_2q (14 qubits)": lambda k: in_place(k.apply_diag_2q, n, 2, 9, diag),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    cases = _cases(np.random.default_rng(0))
    if _kernels is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':30s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s} {'max diff':>9s}")
    for name, call in cases.items():
        t_py = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:30s} {1e3 * t_py:12.3f}")
            continue
        t_cy = min(timeit.repeat(lambda: call(_kernels), number=1, repeat=args.repeat))
        diff = float(np.max(np.abs(np.asarray(call(_kernels_py)) - np.asarray(call(_kernels)))))
        print(f"{name:30s} {1e3 * t_py:12.3f} {1e3 * t_cy:12.3f} {t_py / t_cy:9.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
