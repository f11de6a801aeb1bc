"""Build script: compiles the fictitious-play kernel when Cython and a C
compiler are available, otherwise installs the pure-Python package (the
kernel falls back to the numpy implementation at import time)."""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "vremarket.kernels._fictitious_play_c",
                sources=["src/vremarket/kernels/_fictitious_play_c.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError as exc:  # pragma: no cover - build environment dependent
    print(f"vremarket: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
