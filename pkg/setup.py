import os

from setuptools import setup, Extension

ext_modules = []
if os.environ.get("MRA_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:
        print("Cython/numpy unavailable; installing the pure-Python backend only")
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "spectral_mra._kernels",
                    ["src/spectral_mra/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
