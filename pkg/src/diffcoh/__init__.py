"""diffcoh — cohomology, extensions and deformations of weighted differential algebras."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("diffcoh")
except PackageNotFoundError:
    __version__ = "0.1.0"
