"""Build script: compiles the slot-loop kernel when a C toolchain is available.

The package works without the extension (a pure-Python kernel is selected at
import time), so a failed compile only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "bellsim._kernel",
                ["src/bellsim/_kernel.pyx"],
                # fp-contract off: the pure-Python fallback must produce
                # bit-identical outcomes, so no FMA fusion here
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
