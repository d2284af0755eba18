"""Build script: compiles the edit-distance kernel when a toolchain is present.

The package works without the extension; `kgel.similarity` falls back to the
pure-Python kernel at import time.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError

_BUILD_ERRORS = (CCompilerError, ExecError, PlatformError, FileNotFoundError)


class optional_build_ext(build_ext):
    """Treat extension build failures as a soft degradation, not an error."""

    def run(self):
        try:
            super().run()
        except _BUILD_ERRORS as exc:
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except _BUILD_ERRORS as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        warnings.warn(f"C extension build failed ({exc}); using the pure-Python kernel")


try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("kgel._editdist", ["src/kgel/_editdist.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
