"""Build hook for the optional GMP tableau extension.

If Cython or GMP headers are missing the extension is skipped and the
package runs on the pure-Python tableau.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build-time only
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "mrflab.lp._ctableau",
                ["src/mrflab/lp/_ctableau.pyx"],
                libraries=["gmp"],
                extra_compile_args=["-O2"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )

setup(ext_modules=ext_modules)
