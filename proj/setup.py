import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    """Drive the CMake build and copy the staged extension into place."""

    def build_extension(self, ext: CMakeExtension) -> None:
        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve()
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        source_dir = Path(__file__).parent.resolve()

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DSTEPSYNC_BUILD_PYTHON=ON",
                "-DSTEPSYNC_BUILD_TESTS=OFF",
                "-DCMAKE_BUILD_TYPE=Release",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "stepsync_python", "--parallel"],
            check=True,
        )

        staged = build_dir / "python" / "stepsync"
        out_dir.mkdir(parents=True, exist_ok=True)
        for artifact in staged.glob("_core*"):
            self.copy_file(str(artifact), str(out_dir / artifact.name))


setup(
    packages=["stepsync"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("stepsync._core")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
