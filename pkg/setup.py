"""Build the optional Cython kernels; the package works without them."""
import os

import numpy as np
from setuptools import setup

ext_modules = []
if os.environ.get("MDPLAB_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "mdplab._ckernels",
                    ["src/mdplab/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "initializedcheck": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
