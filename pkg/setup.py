"""Builds the optional compiled ADMM kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile is downgraded to a warning.
"""

import warnings

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "secureplan.qp._admm_cy",
                sources=["src/secureplan/qp/_admm_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError as exc:  # pragma: no cover - build environment dependent
    warnings.warn(f"Cython/numpy unavailable, skipping compiled kernel: {exc}")

setup(ext_modules=ext_modules)
