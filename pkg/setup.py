"""Build the optional compiled engine; the package works without it."""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing etc.
            print(f"warning: compiled engine not built ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc}); using pure Python")


def extensions():
    if os.environ.get("WAKIMOTO_FOCK_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension(
        "wakimoto_fock._ckernels",
        ["src/wakimoto_fock/_ckernels.pyx"],
        include_dirs=["src/wakimoto_fock"],
        depends=["src/wakimoto_fock/_engine.hpp"],
        language="c++",
        extra_compile_args=["-O2", "-std=c++17"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
