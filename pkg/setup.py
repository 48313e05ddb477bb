import os

from setuptools import Extension, setup

PYX = "src/moosolver/_kernels.pyx"

ext_modules = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "moosolver._kernels",
                    [PYX],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # Without Cython the package still installs; the pure-Python
        # backend is selected at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
