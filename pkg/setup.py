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
                "splitwave._kernels",
                ["src/splitwave/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                # no FP contraction: keeps results bit-identical to the
                # numpy fallback so the backend choice cannot change output
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,  # pure-python fallback covers build failures
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
