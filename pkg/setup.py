import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the compiled stepping kernel numerically aligned
# with the pure-numpy fallback (no FMA contraction of a*b+c).
setup(
    ext_modules=cythonize(
        [
            Extension(
                "mfhawkes._kernels",
                ["src/mfhawkes/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
)
