"""Build script: compiles the optional Cython recurrence kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed, not functionality.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "diffsfx.kernels._gru_cy",
                ["src/diffsfx/kernels/_gru_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
