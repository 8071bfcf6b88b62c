"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a pure NumPy
fallback is selected at import time), so any build failure here only
costs speed, not correctness.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("HYPERCELL_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "hypercell._kernels._core",
                    ["src/hypercell/_kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
