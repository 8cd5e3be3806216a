"""Least-squares solve shared by exact and sampled ALS updates."""

import logging
from typing import Literal, NamedTuple

import numpy as np

from ..errors import ConfigError, ShapeError
from .scores import TRUNCATION

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e8


class LeastSquaresSolution(NamedTuple):
    solution: np.ndarray
    residual_norm: float
    rank: int
    rank_deficient: bool
    method: Literal["qr", "svd"]


def sampled_least_squares(
    design: np.ndarray,
    rhs: np.ndarray,
    regularization: float = 0.0,
) -> LeastSquaresSolution:
    """
    argmin_X ||design X - rhs||_F (+ regularization ||X||_F^2).

    Rows are expected to carry their sampling weights already. QR is used when
    the ratio of extreme |diag(R)| stays below 1e8, otherwise a truncated SVD
    pseudoinverse; a rank-deficient design is logged and flagged.
    """
    design = np.asarray(design, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    vector_rhs = rhs.ndim == 1
    if vector_rhs:
        rhs = rhs[:, None]
    if design.ndim != 2 or rhs.ndim != 2 or design.shape[0] != rhs.shape[0]:
        raise ShapeError(f"design {design.shape} and rhs {rhs.shape} do not match")
    if regularization < 0:
        raise ConfigError(f"regularization must be non-negative, got {regularization}")
    cols = design.shape[1]
    A, B = design, rhs
    if regularization > 0:
        A = np.vstack([design, np.sqrt(regularization) * np.eye(cols)])
        B = np.vstack([rhs, np.zeros((cols, rhs.shape[1]))])

    solution = None
    method: Literal["qr", "svd"] = "svd"
    rank = cols
    if A.shape[0] >= cols:
        Q, R = np.linalg.qr(A)
        diag = np.abs(np.diag(R))
        if diag.min() > 0 and diag.max() < CONDITION_LIMIT * diag.min():
            solution = np.linalg.solve(R, Q.T @ B)
            method = "qr"
    if solution is None:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
        cutoff = (s[0] if s.size else 0.0) * TRUNCATION * max(A.shape)
        keep = s > cutoff if s.size and s[0] > 0 else np.zeros(s.shape, dtype=bool)
        rank = int(keep.sum())
        solution = Vt[keep].T @ ((U[:, keep].T @ B) / s[keep][:, None])

    rank_deficient = rank < cols
    if rank_deficient:
        logger.warning(
            "Sampled design of shape %s is rank deficient (rank %d < %d); using pseudoinverse",
            design.shape,
            rank,
            cols,
        )
    residual = float(np.linalg.norm(design @ solution - rhs))
    if vector_rhs:
        solution = solution[:, 0]
    return LeastSquaresSolution(solution, residual, rank, rank_deficient, method)
