"""Build script: compiles the optional search-kernel extension.

The extension is an accelerator only; if Cython or a C compiler is
unavailable the install proceeds and the pure-Python kernel is used.
Set BELIEFPLAN_NO_EXT=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, broken toolchain
            print(f"warning: skipping optional extension build: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: skipping optional extension {ext.name}: {exc}")


def extensions():
    if os.environ.get("BELIEFPLAN_NO_EXT"):
        return []
    if not os.path.exists("src/beliefplan/planner/_kernel_c.pyx"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "beliefplan.planner._kernel_c",
                ["src/beliefplan/planner/_kernel_c.pyx"],
            )
        ],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
