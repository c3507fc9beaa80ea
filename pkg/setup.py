import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernel is optional: if the build fails the package falls back
# to the pure-numpy backend at import time.
ext = Extension(
    "pathnli.model._lstm_cy",
    ["src/pathnli/model/_lstm_cy.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    optional=True,
)

setup(ext_modules=cythonize([ext], language_level=3) if cythonize else [])
