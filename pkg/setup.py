import os

import numpy as np
from setuptools import Extension, setup

extensions = []
if not os.environ.get("VELOQ_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # pure-Python install; veloq falls back at import
        cythonize = None
    if cythonize is not None:
        extensions = cythonize(
            [
                Extension(
                    "veloq._kernels",
                    ["src/veloq/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=extensions)
