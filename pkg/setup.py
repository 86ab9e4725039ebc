import os

import numpy as np
from setuptools import Extension, setup

# Pure-Python fallback is used when the extension is absent, so a failed
# cythonize must not break the install.
ext_modules = []
if os.environ.get("PHOTOMECH_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "photomech._kernels._core",
                    ["src/photomech/_kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
