import numpy as np
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/unitfold/_speedups.pyx",
        language_level=3,
    )
except ImportError:
    # Pure-python kernels are used when the extension is unavailable.
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
