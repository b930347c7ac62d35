import os

from setuptools import Extension, setup

# DARWINSIM_NO_EXT=1 skips the compiled kernel; the pure-Python kernel is used instead.
ext_modules = []
if not os.environ.get("DARWINSIM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "darwinsim.core._ckernel",
                    ["src/darwinsim/core/_ckernel.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
