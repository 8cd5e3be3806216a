"""
Reshaping a square grayscale image into a higher-order tensor.

For a 2^a x 2^a image and an even target order N with 2a divisible by N,
each pixel coordinate is split into N/2 base-b digits, b = 2^(2a/N), most
significant digit first. Mode 2k holds the k-th row digit and mode 2k+1 the
k-th column digit, so neighbouring modes cover the same spatial scale:

    tensor[r_0, c_0, r_1, c_1, ...] = image[r_0 b^(h-1) + ... + r_{h-1},
                                            c_0 b^(h-1) + ... + c_{h-1}]

with h = N/2. A 4096 x 4096 image becomes a 6-way tensor of size 16^6;
order 2 leaves the image unchanged.
"""

import numpy as np

from ..errors import InvalidInputError, ShapeError
from ..tensor import DenseTensor


def _digits(size: int, order: int) -> tuple[int, int]:
    """(digits per axis, base) for a size x size image split into `order` modes."""
    if size < 1 or size & (size - 1):
        raise InvalidInputError(f"image side {size} is not a power of two")
    bits = size.bit_length() - 1
    if order < 2 or order % 2:
        raise InvalidInputError(f"target order must be even and >= 2, got {order}")
    half = order // 2
    if bits % half:
        raise InvalidInputError(f"a {size} x {size} image cannot be split into {order} equal modes")
    return half, 2 ** (bits // half)


def _interleave(half: int) -> list[int]:
    return [axis for k in range(half) for axis in (k, half + k)]


def tensorize_image(image: np.ndarray, order: int) -> DenseTensor:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise ShapeError(f"expected a square grayscale image, got shape {image.shape}")
    half, base = _digits(image.shape[0], order)
    digits = image.reshape((base,) * order)
    return DenseTensor(digits.transpose(_interleave(half)))


def untensorize_image(tensor: DenseTensor) -> np.ndarray:
    """Inverse of tensorize_image."""
    order = tensor.order
    if order < 2 or order % 2 or len(set(tensor.dims)) != 1:
        raise ShapeError(f"{tensor.dims} is not a tensorized square image")
    half = order // 2
    base = tensor.dims[0]
    side = base**half
    return np.transpose(tensor.data, np.argsort(_interleave(half))).reshape(side, side)
