"""Build script: compiles the optional Cython butterfly kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so the extension is marked optional and a missing
compiler or Cython never fails the install.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "walshlab._fwht_cy",
                ["src/walshlab/_fwht_cy.pyx"],
                optional=True,
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
