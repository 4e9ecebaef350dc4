"""Build script: compiles the Monte Carlo stepping kernel as a C extension.

The extension is optional.  If Cython or a C compiler is unavailable the
package installs anyway and `bridgestop.simulate` falls back to the pure
NumPy engine at import time (same results, slower).
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: C extension build skipped ({exc}); "
                  f"pure-Python engine will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  f"pure-Python engine will be used")


def make_extensions():
    pyx = "src/bridgestop/simulate/_engine_cy.pyx"
    if os.environ.get("BRIDGESTOP_NO_EXT") or not os.path.exists(pyx):
        return []
    try:
        import numpy
        import numpy.random
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"warning: {exc}; building without the C extension")
        return []

    npyrandom_dir = os.path.join(os.path.dirname(numpy.random.__file__), "lib")
    ext = Extension(
        "bridgestop.simulate._engine_cy",
        sources=[pyx],
        include_dirs=[numpy.get_include()],
        library_dirs=[npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off keeps the arithmetic bit-identical to the NumPy
        # fallback engine (no FMA contraction).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=make_extensions(), cmdclass={"build_ext": OptionalBuildExt})
