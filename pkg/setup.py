import os

from setuptools import Extension, setup

# The compiled kernel must do float arithmetic in exactly the order written,
# with plain libm calls, so that it reproduces the pure-Python kernel bit for
# bit: no FMA contraction, no builtin sin/cos fusion into sincos.
KERNEL_CFLAGS = ["-O2", "-ffp-contract=off", "-fno-builtin"]

ext_modules = []
if not os.environ.get("COLDBEAM_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        ext_modules = []
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "coldbeam.kernels._fast",
                    ["src/coldbeam/kernels/_fast.pyx"],
                    extra_compile_args=KERNEL_CFLAGS,
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
