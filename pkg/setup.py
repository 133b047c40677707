import numpy as np
from setuptools import setup
from setuptools.extension import Extension

from Cython.Build import cythonize

ext_modules = [
    Extension(
        "misdiag.classifier._kernels_cy",
        ["src/misdiag/classifier/_kernels_cy.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
