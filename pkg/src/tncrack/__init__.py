"""Tensor-network and variational known-plaintext attacks on toy ciphers,
benchmarked against brute force."""

__version__ = "0.1.0"

from .bits import BitString
from .cost import AttackInstance, hamming_distance

__all__ = ["BitString", "AttackInstance", "hamming_distance", "__version__"]
