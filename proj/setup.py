"""CMake-backed build of the retrainbench._core extension.

The CMake project is the source of truth; this shim configures and builds it
into the wheel's package directory so `pip install .` (or an editable
install with --no-build-isolation) works without a separate cmake step.
"""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        ext_path = Path(self.get_ext_fullpath(ext.name)).resolve()
        package_dir = ext_path.parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        configure = [
            "cmake",
            "-S", os.fspath(source_dir),
            "-B", os.fspath(build_dir),
            "-DCMAKE_BUILD_TYPE=Release",
            "-DRETRAINBENCH_BUILD_TESTS=OFF",
            "-DRETRAINBENCH_BUILD_PYTHON=ON",
            f"-DPython3_EXECUTABLE={sys.executable}",
        ]
        subprocess.run(configure, check=True)
        subprocess.run(
            ["cmake", "--build", os.fspath(build_dir), "--target", "_core", "-j"],
            check=True,
        )

        built = next((build_dir / "python" / "retrainbench").glob("_core*.so"))
        package_dir.mkdir(parents=True, exist_ok=True)
        self.copy_file(os.fspath(built), os.fspath(ext_path))


setup(
    ext_modules=[CMakeExtension("retrainbench._core")],
    cmdclass={"build_ext": CMakeBuild},
)
