"""Build script for the optional compiled path-simulation kernels.

The package is pure Python except for ``latentsts._kernels._native``, a
Cython module that runs the sequential latent-path recursions at C speed.
If Cython or a C compiler is unavailable the build silently skips the
extension and the package falls back to the pure-numpy kernels at import
time (see ``latentsts._kernels``).
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the native kernels if possible, otherwise continue without."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler / headers
            print(f"warning: skipping native kernels ({exc}); "
                  "pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "pure-Python fallback will be used")


def extensions():
    try:
        import os

        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    # The C distribution functions (random_gamma, random_poisson, ...) live
    # in numpy's static helper library, not in the headers.
    random_lib = os.path.join(os.path.dirname(numpy.__file__), "random", "lib")
    ext = Extension(
        "latentsts._kernels._native",
        sources=["src/latentsts/_kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[random_lib],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off: keep the recursion arithmetic bit-identical to
        # the pure-Python fallback (no fused multiply-adds).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
