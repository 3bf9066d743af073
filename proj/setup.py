"""Builds the native extension for pip installs.

The day-to-day build is CMake (see README); this path exists so
`pip install --no-build-isolation -e .` works with just setuptools and
pybind11 on the machine.
"""

import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup


def eigen_include() -> str:
    override = os.environ.get("EIGEN3_INCLUDE_DIR")
    candidates = [override] if override else []
    candidates += ["/usr/include/eigen3", "/usr/local/include/eigen3"]
    for path in candidates:
        if path and os.path.isdir(path):
            return path
    raise RuntimeError(
        "Eigen headers not found; set EIGEN3_INCLUDE_DIR to the directory "
        "containing Eigen/"
    )


ext = Pybind11Extension(
    "isac_precode._isac_precode",
    sources=[
        "python/bindings.cpp",
        "src/linalg.cpp",
        "src/model.cpp",
        "src/sensing.cpp",
        "src/isac.cpp",
    ],
    include_dirs=["include", eigen_include()],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
