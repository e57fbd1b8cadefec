import os

from setuptools import Extension, setup

# The compiled stepping kernel is optional: RABISIM_SKIP_EXT=1 installs a
# pure-python build that falls back to the numpy backend at import time.
if os.environ.get("RABISIM_SKIP_EXT"):
    ext_modules = []
else:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rabisim._kernels._core",
                ["src/rabisim/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
