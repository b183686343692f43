from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    # FP contraction is disabled so the compiled kernels produce floats
    # bit-identical to the pure-numpy fallback.
    ext_modules = cythonize(
        [
            Extension(
                "issuediff.model._kernels",
                ["src/issuediff/model/_kernels.pyx"],
                extra_compile_args=["-ffp-contract=off"],
            )
        ],
        language_level="3",
    )
else:
    # Without Cython the package still works via the pure-numpy kernels.
    ext_modules = []

setup(ext_modules=ext_modules)
