"""Build the optional Cython kernels; the package works without them."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
except ImportError:
    pass
else:
    ext_modules = cythonize(
        "src/bvhier/_kernels.pyx",
        compiler_directives={"language_level": "3"},
        quiet=True,
    )

setup(ext_modules=ext_modules)
