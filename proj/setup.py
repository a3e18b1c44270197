"""Builds the beamtune._core extension through the project's CMake tree."""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str, source_dir: str = ".") -> None:
        super().__init__(name, sources=[])
        self.source_dir = str(Path(source_dir).resolve())


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        build_dir = Path(self.build_temp).resolve() / ext.name
        build_dir.mkdir(parents=True, exist_ok=True)

        configure = [
            "cmake",
            ext.source_dir,
            "-DCMAKE_BUILD_TYPE=Release",
            "-DBEAMTUNE_BUILD_TESTS=OFF",
            "-DBEAMTUNE_BUILD_CLI=OFF",
            f"-DPython3_EXECUTABLE={sys.executable}",
            f"-DPYTHON_EXECUTABLE={sys.executable}",
        ]
        try:
            import pybind11

            configure.append(f"-Dpybind11_DIR={pybind11.get_cmake_dir()}")
        except ImportError:
            pass  # CMake falls back to `python3 -m pybind11 --cmakedir`
        subprocess.run(configure, cwd=build_dir, check=True)
        subprocess.run(
            ["cmake", "--build", ".", "--target", "_core"],
            cwd=build_dir,
            check=True,
        )

        # The CMake tree stages the module under python_pkg/beamtune/; copy
        # it to wherever setuptools expects this extension to appear.
        staged = sorted((build_dir / "python_pkg" / "beamtune").glob("_core*"))
        if not staged:
            raise RuntimeError("CMake did not produce the _core module")
        destination = Path(self.get_ext_fullpath(ext.name))
        destination.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(staged[-1], destination)


setup(
    packages=["beamtune"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("beamtune._core")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
