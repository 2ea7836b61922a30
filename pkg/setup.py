"""Build the optional compiled kernels.

The package works without them; a failed or skipped build leaves the
pure-Python fallback in charge.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Skip the extension, with a warning, when compilation fails."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any compiler failure means fallback
            print(f"warning: compiled kernels not built ({exc}); using the Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: {ext.name} not built ({exc}); using the Python fallback")

ext_modules = []
if os.environ.get("FEDALLOC_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        extensions = [
            Extension(
                "fedalloc._core._ccore",
                ["src/fedalloc/_core/_ccore.pyx"],
                # no FMA contraction: keeps results bit-identical to the Python twin
                extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
            )
        ]
        ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
