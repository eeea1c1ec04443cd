"""Build script: compiles the hot-loop kernels when Cython is available.

The package works without the extension (a NumPy fallback is selected at
import time); the compiled core is what makes large ensembles fast.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fracshock._kernels",
                ["src/fracshock/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
