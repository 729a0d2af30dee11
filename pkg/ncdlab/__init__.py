"""Compression distance text clustering and retrieval"""

__version__ = "0.1.0"

from .compressors import BACKENDS, get_backend  # noqa: E402
from .errors import NcdLabError, ValidationError  # noqa: E402
from .ncd import LengthCache, NcdMatrix, ncd, ncd_matrix  # noqa: E402

__all__ = [
    "BACKENDS",
    "LengthCache",
    "NcdLabError",
    "NcdMatrix",
    "ValidationError",
    "get_backend",
    "ncd",
    "ncd_matrix",
]
