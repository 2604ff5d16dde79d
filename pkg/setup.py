"""Build script: compiles the accelerated kernels when a toolchain is present.

The compiled extension is optional. If Cython or a C compiler is missing the
install still succeeds and the package falls back to the pure-numpy kernels
at import time (see msnt.kernels).
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing
            warnings.warn(f"skipping compiled kernels: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping compiled kernel {ext.name}: {exc}")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        warnings.warn(f"compiled kernels disabled: {exc}")
        return []
    ext = Extension(
        "msnt._kernels_cy",
        ["src/msnt/_kernels_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
