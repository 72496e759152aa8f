"""Build the optional Cython kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); build failures are therefore non-fatal.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext = Extension(
        "latdef._kernels._ck",
        ["src/latdef/_kernels/_ck.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except Exception as exc:  # pragma: no cover - env without Cython
    print(f"latdef: skipping Cython extension build ({exc!r})")

setup(ext_modules=ext_modules)
