"""Build the optional compiled kernels.

The package works without them: ``levyflow._kernels`` falls back to the
pure-Python implementation when ``levyflow._core`` cannot be imported.
"""
import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:  # build without the extension
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "levyflow._core",
                ["src/levyflow/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


class optional_build_ext(build_ext):
    """Skip the extension with a warning instead of failing the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"levyflow._core not built, using pure Python: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"levyflow._core not built, using pure Python: {exc}")


setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
