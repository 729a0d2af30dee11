from .backends import BACKENDS, Backend, BwBackend, LzBackend, PpmBackend, get_backend
from .calgary import CALGARY_FILES, bits_per_byte, calgary_benchmark

__all__ = [
    "BACKENDS",
    "Backend",
    "BwBackend",
    "LzBackend",
    "PpmBackend",
    "get_backend",
    "CALGARY_FILES",
    "bits_per_byte",
    "calgary_benchmark",
]
