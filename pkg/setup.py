from setuptools import Extension, setup

# -ffp-contract=off keeps the compiled kernels bit-identical to the pure-Python
# fallback (no FMA contraction), which the backend parity tests rely on.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gaitplan._kernel",
                ["src/gaitplan/_kernel.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython at build time: install pure-Python only, the package falls
    # back to gaitplan._kernel_py at import.
    ext_modules = []

setup(ext_modules=ext_modules)
