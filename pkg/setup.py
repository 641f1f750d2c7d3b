"""Build script for the optional compiled sampling kernel.

The package is pure Python plus one Cython extension, ``softpair._kernel_cy``.
The extension is marked optional: if it cannot be compiled the install still
succeeds and the package falls back to the vectorized numpy kernel at import
time.  Do not add -ffast-math; the kernels rely on IEEE semantics so that the
compiled and fallback paths stay draw-for-draw comparable.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "softpair._kernel_cy",
                ["src/softpair/_kernel_cy.pyx"],
                include_dirs=[numpy.get_include()],
                # fp-contract off: fused multiply-adds would break bitwise
                # agreement with the scalar reference path; likewise the
                # sincos combining, whose glibc result can differ by an ulp
                extra_compile_args=["-O3", "-ffp-contract=off",
                                    "-fno-builtin-sin", "-fno-builtin-cos"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )

setup(ext_modules=ext_modules)
