"""Build hooks for the optional compiled kernel extension.

The package is fully functional without the extension (a numpy fallback
is selected at import), so compilation failures only log a warning.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "hypermix._kernels._speedups",
        ["src/hypermix/_kernels/_speedups.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize(ext)
except ImportError:
    pass

setup(ext_modules=ext_modules)
