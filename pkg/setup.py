"""Build script for the optional compiled stepping kernel.

The package is pure Python apart from ``dickesqueeze._stepcore``, a small
Cython extension that applies precomputed one-step propagators to a state
vector.  If Cython (or a C compiler) is unavailable the build falls back to
a source-only install and the package uses the numpy implementation in
``dickesqueeze._steppy`` instead.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "dickesqueeze._stepcore",
                ["src/dickesqueeze/_stepcore.pyx"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
