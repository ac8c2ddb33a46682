"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
NumPy fallback in ``_kernels_py`` is used. Setting ``VELOQ_PURE_PYTHON=1``
forces the fallback.
"""

import os

if os.environ.get("VELOQ_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels

        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
