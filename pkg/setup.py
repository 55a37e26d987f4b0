"""Build the optional Cython kernels.

The package works without them: ``detdiar.kernels`` falls back to the
pure-Python implementations when the extension cannot be imported.
"""
import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: Cython kernels not built ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: failed to build {ext.name} ({exc}); using pure-Python fallback")


def extensions():
    if os.environ.get("DETDIAR_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension(
        "detdiar._kernels",
        ["src/detdiar/_kernels.pyx"],
        include_dirs=[np.get_include()],
        # bit-identical results with the Python fallback: no FMA contraction
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
