"""Build script: compiles the optional Cython evaluator kernel.

The package works without the extension (pure-Python fallback is selected at
import time); a failed compile therefore must not fail the install.
Set CEPDE_PURE=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CEPDE_PURE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "cepde._evalcore",
                    ["src/cepde/_evalcore.pyx"],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
