"""Hash families, CountSketch, TensorSketch and the recursive sketch."""

from .countsketch import CountSketch
from .hashing import HashFamily, addmod, mulmod
from .recursive import RecursiveSketch
from .tensorsketch import TensorSketch

__all__ = [
    "CountSketch",
    "HashFamily",
    "RecursiveSketch",
    "TensorSketch",
    "addmod",
    "mulmod",
]
