from setuptools import Extension, setup
from Cython.Build import cythonize
import numpy as np

ext_modules = [
    Extension(
        "qrff._native",
        sources=["src/qrff/_native.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(ext_modules, language_level=3),
    include_dirs=[np.get_include()],
)
