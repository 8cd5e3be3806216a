"""
Exact and sketched leverage scores.

Singular values below sigma_max * 1e-10 * max(rows, cols) are treated as zero
in every SVD here; that cutoff defines the numerical rank. Leverage maps that
drive the conditional samplers use the coarser relative cutoff SAMPLING_RCOND;
the samplers evaluate g^T Phi g through long products of Gram matrices, which
lose directions below it to rounding.
"""

import logging

import numpy as np

from ..errors import ConfigError, DegenerateInputError, ShapeError

logger = logging.getLogger(__name__)

TRUNCATION = 1e-10
SAMPLING_RCOND = 1e-4


def _truncated_svd(
    A: np.ndarray, what: str, rcond: float | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or 0 in A.shape:
        raise ShapeError(f"{what} must be a non-empty matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DegenerateInputError(f"{what} has non-finite entries")
    if not np.any(A):
        raise DegenerateInputError(f"{what} is the zero matrix")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    threshold = s[0] * (TRUNCATION * max(A.shape) if rcond is None else rcond)
    keep = s >= threshold
    if not np.any(keep):
        raise DegenerateInputError(f"all singular values of {what} are below {threshold:.3e}")
    return U[:, keep], s[keep], Vt[keep], threshold


def exact_leverage_scores(A: np.ndarray) -> np.ndarray:
    """l_i = ||U(i, :)||^2 from a compact SVD; the scores sum to rank(A)."""
    U, _, _, _ = _truncated_svd(A, "leverage-score input")
    return np.einsum("ir,ir->i", U, U)


class LeverageMap:
    """
    Phi = V_1 Sigma_1^{-1} (V_1 Sigma_1^{-1})^T from the SVD of a sketched design.

    The estimated leverage score of row a of the unsketched design is a Phi a^T.
    """

    def __init__(self, phi: np.ndarray, rank: int, threshold: float, singular_values: np.ndarray):
        self.phi = phi
        self.rank = rank
        self.threshold = threshold
        self.singular_values = singular_values

    @property
    def columns(self) -> int:
        return self.phi.shape[0]

    def scores(self, design: np.ndarray) -> np.ndarray:
        design = np.atleast_2d(np.asarray(design, dtype=np.float64))
        if design.shape[1] != self.columns:
            raise ShapeError(f"design has {design.shape[1]} columns, Phi expects {self.columns}")
        return np.einsum("ir,rk,ik->i", design, self.phi, design)


def estimate_leverage_map(sketched: np.ndarray, rcond: float | None = None) -> LeverageMap:
    """Phi from the SVD of a sketched design; `rcond` overrides the default relative cutoff."""
    if rcond is not None and not 0 <= rcond < 1:
        raise ConfigError(f"rcond must lie in [0, 1), got {rcond}")
    _, s, Vt, threshold = _truncated_svd(sketched, "sketched design", rcond)
    scaled = Vt.T / s
    phi = scaled @ scaled.T
    phi = 0.5 * (phi + phi.T)
    if s.size < np.asarray(sketched).shape[1]:
        logger.debug("Sketched design has numerical rank %d < %d", s.size, phi.shape[0])
    return LeverageMap(phi, int(s.size), float(threshold), s)
