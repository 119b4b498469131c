"""Build script: compiles the optional raking kernel when Cython is available.

The package is fully functional without the extension; ``lorgee.ipf``
falls back to the pure-numpy kernel at import time.
"""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/lorgee/_raking.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
