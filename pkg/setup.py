"""Build script for the compiled amplitude kernels.

The extension is optional: if Cython or a C compiler is unavailable the
package installs without it and ``qgad.kernels`` falls back to the numpy
backend at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "qgad.kernels._core",
        ["src/qgad/kernels/_core.pyx"],
    )
]

if cythonize is not None:
    ext_modules = cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
