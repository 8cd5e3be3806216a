"""
k-wise independent hash families.

A hash is a random polynomial of degree k-1 over the prime field Z_p with
p = 2^61 - 1, evaluated with Horner's rule. Polynomial hashing with uniform
coefficients is exactly k-wise independent on the field; reducing the value
mod J (or taking its parity for signs) gives the bucket/sign maps used by
CountSketch and TensorSketch.

All arithmetic runs vectorized on uint64 arrays. Products of two field
elements (< 2^61) would overflow 64 bits, so mulmod splits each operand into a
30-bit high and 31-bit low half and folds the partial products using
2^61 ≡ 1 (mod p).
"""

import numpy as np

from ..errors import ConfigError

MERSENNE_61 = np.uint64((1 << 61) - 1)
_LOW_31 = np.uint64((1 << 31) - 1)
_LOW_30 = np.uint64((1 << 30) - 1)
_SHIFT_30 = np.uint64(30)
_SHIFT_31 = np.uint64(31)
_SHIFT_61 = np.uint64(61)
_ONE = np.uint64(1)
_MAX_DOMAIN = 1 << 60


def _reduce(value: np.ndarray) -> np.ndarray:
    # value < 2^64; (value mod 2^61) + floor(value / 2^61) < 2p, one subtraction finishes.
    folded = (value & MERSENNE_61) + (value >> _SHIFT_61)
    return np.where(folded >= MERSENNE_61, folded - MERSENNE_61, folded)


def mulmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b) mod 2^61 - 1 for uint64 arrays with entries below the modulus."""
    a_hi, a_lo = a >> _SHIFT_31, a & _LOW_31
    b_hi, b_lo = b >> _SHIFT_31, b & _LOW_31
    # a*b = a_hi*b_hi*2^62 + mid*2^31 + a_lo*b_lo and 2^62 ≡ 2
    mid = a_hi * b_lo + a_lo * b_hi
    total = (
        ((a_hi * b_hi) << _ONE)
        + (mid >> _SHIFT_30)
        + ((mid & _LOW_30) << _SHIFT_31)
        + a_lo * b_lo
    )
    return _reduce(total)


def addmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _reduce(a + b)


class HashFamily:
    """
    One draw from a k-wise independent family mapping [domain] to [codomain].

    With codomain=None the hash maps to signs {-1, +1}. Values over the whole
    domain are tabulated at construction; `table` is what sketches index into.
    """

    def __init__(
        self,
        degree: int,
        domain: int,
        codomain: int | None,
        rng: np.random.Generator,
    ):
        if degree < 1:
            raise ConfigError(f"hash degree must be >= 1, got {degree}")
        if not 1 <= domain <= _MAX_DOMAIN:
            raise ConfigError(f"hash domain must be in [1, 2^60], got {domain}")
        if codomain is not None and codomain < 1:
            raise ConfigError(f"hash codomain must be >= 1, got {codomain}")
        self.degree = degree
        self.domain = domain
        self.codomain = codomain
        self.coefficients = rng.integers(
            0, int(MERSENNE_61), size=degree, dtype=np.uint64, endpoint=False
        )
        raw = self.evaluate(np.arange(domain, dtype=np.uint64))
        if codomain is None:
            self.table = 1.0 - 2.0 * (raw & _ONE).astype(np.float64)
        else:
            self.table = (raw % np.uint64(codomain)).astype(np.int64)

    def evaluate(self, keys: np.ndarray) -> np.ndarray:
        """Raw field values of the polynomial at `keys` (uint64)."""
        keys = np.asarray(keys, dtype=np.uint64)
        value = np.full(keys.shape, self.coefficients[0], dtype=np.uint64)
        for coefficient in self.coefficients[1:]:
            value = addmod(mulmod(value, keys), coefficient)
        return value

    def __call__(self, keys) -> np.ndarray:
        return self.table[np.asarray(keys, dtype=np.int64)]
