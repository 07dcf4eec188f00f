"""Build script for the compiled stencil/compositing kernels.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and falls back to the numpy kernel backend at
import time (see aerosplat._kernels).
"""

import numpy as np
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "aerosplat._kernels._core",
                ["src/aerosplat/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
