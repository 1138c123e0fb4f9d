from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # The package still works without the compiled core: the kernel
    # dispatcher falls back to the pure-Python implementation.
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("ccarm._kernels._fastcore", ["src/ccarm/_kernels/_fastcore.pyx"])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
