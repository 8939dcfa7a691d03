"""Build script: compiles the optional native HOG kernels.

The package works without the extension (a numpy implementation is
selected at import time), so a failed native build only costs speed.
-ffp-contract=off keeps the C arithmetic at plain IEEE double ops,
matching the numpy lane closely.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: native kernel build skipped: {exc}", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed: {exc}", file=sys.stderr)


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"warning: native kernels not built ({exc})", file=sys.stderr)
        return []
    ext = Extension(
        "mfrs.recognition._kernels_cy",
        ["src/mfrs/recognition/_kernels_cy.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
