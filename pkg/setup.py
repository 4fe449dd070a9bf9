"""Builds the optional compiled kernel. The package works without it; the
pure-numpy fallback is selected at import when the extension is missing."""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "objattack.kernels._native",
                ["src/objattack/kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    warnings.warn(f"skipping native kernel build, pure-python fallback will be used: {exc}")
    ext_modules = []

setup(ext_modules=ext_modules)
