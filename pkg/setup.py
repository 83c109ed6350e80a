"""Build script for the compiled flight-loop kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-Python kernel at import
time (see posepilot.kernels). Build in place for development with:

    python setup.py build_ext --inplace
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
                "posepilot.kernels.fastloop",
                ["src/posepilot/kernels/fastloop.pyx"],
                # -ffp-contract=off keeps the compiled kernel bit-identical
                # to the pure-Python one (no FMA fusion, no fast-math).
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
