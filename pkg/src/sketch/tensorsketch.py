"""
Degree-two TensorSketch.

T (J x J_in^2) acts on Kronecker products as
    T(e_a ⊗ e_b) = s1(a) s2(b) e_{(h1(a) + h2(b)) mod J}
with the first Kronecker factor hashed by (h1, s1). Applied to x ⊗ y it equals
the length-J cyclic convolution of the two CountSketch images, computed with
real FFTs of length J (numpy's FFT handles any length in O(J log J)).
"""

import numpy as np

from ..errors import ConfigError, ShapeError
from .hashing import HashFamily


class TensorSketch:
    def __init__(self, rows: int, input_dim: int, rng: np.random.Generator):
        if rows < 1 or input_dim < 1:
            raise ConfigError(f"TensorSketch needs positive sizes, got {rows}, {input_dim}")
        self.rows = rows
        self.input_dim = input_dim
        self.h1 = HashFamily(3, input_dim, rows, rng).table
        self.h2 = HashFamily(3, input_dim, rows, rng).table
        self.s1 = HashFamily(4, input_dim, None, rng).table
        self.s2 = HashFamily(4, input_dim, None, rng).table

    def _count(self, x: np.ndarray, buckets: np.ndarray, signs: np.ndarray) -> np.ndarray:
        if x.ndim == 0 or x.shape[0] != self.input_dim:
            raise ShapeError(f"TensorSketch expects length {self.input_dim}, got {x.shape}")
        out = np.zeros((self.rows,) + x.shape[1:])
        np.add.at(out, buckets, signs.reshape((-1,) + (1,) * (x.ndim - 1)) * x)
        return out

    def apply_pair(self, x: np.ndarray, y: np.ndarray, direct: bool = False) -> np.ndarray:
        """
        T(x ⊗ y), applied columnwise when x and y carry matching trailing axes.

        direct=True multiplies by the explicit matrix instead (O(J^2) oracle).
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.shape[1:] != y.shape[1:]:
            raise ShapeError(f"operand shapes {x.shape} and {y.shape} do not pair up")
        if direct:
            if x.shape[0] != self.input_dim or y.shape[0] != self.input_dim:
                raise ShapeError(f"TensorSketch expects length {self.input_dim}")
            kron = np.einsum("a...,b...->ab...", x, y).reshape((-1,) + x.shape[1:])
            return np.tensordot(self.matrix(), kron, axes=([1], [0]))
        fx = np.fft.rfft(self._count(x, self.h1, self.s1), axis=0)
        fy = np.fft.rfft(self._count(y, self.h2, self.s2), axis=0)
        return np.fft.irfft(fx * fy, n=self.rows, axis=0)

    def contract(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """
        sum_b T(left[:, a, b] ⊗ right[:, b, c]) for left (J_in, A, B), right (J_in, B, C).

        Returns (J, A, C). The rank contraction happens in the Fourier domain,
        one small matrix product per frequency.
        """
        left = np.asarray(left, dtype=np.float64)
        right = np.asarray(right, dtype=np.float64)
        if left.ndim != 3 or right.ndim != 3 or left.shape[2] != right.shape[1]:
            raise ShapeError(f"cannot contract chain pieces {left.shape} and {right.shape}")
        fl = np.fft.rfft(self._count(left, self.h1, self.s1), axis=0)
        fr = np.fft.rfft(self._count(right, self.h2, self.s2), axis=0)
        return np.fft.irfft(np.einsum("fab,fbc->fac", fl, fr), n=self.rows, axis=0)

    def matrix(self) -> np.ndarray:
        a, b = np.meshgrid(np.arange(self.input_dim), np.arange(self.input_dim), indexing="ij")
        T = np.zeros((self.rows, self.input_dim**2))
        cols = (a * self.input_dim + b).ravel()
        T[((self.h1[a] + self.h2[b]) % self.rows).ravel(), cols] = (self.s1[a] * self.s2[b]).ravel()
        return T
