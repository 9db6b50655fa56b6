"""Builds the optional compiled kernels; the package runs without them."""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pointjump._kernels._core",
                ["src/pointjump/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
except Exception:  # no Cython/numpy at build time: pure-Python install
    ext_modules = []

setup(ext_modules=ext_modules)
