# Builds the optional C speedup kernel.  The package works without it: if the
# extension is unavailable at import time, rabuild.kernel falls back to the
# pure-Python implementation with identical semantics.
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rabuild._speedups",
                ["src/rabuild/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
