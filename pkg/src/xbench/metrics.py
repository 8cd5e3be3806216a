"""Distribution comparisons for the sampling experiments."""

import logging

import numpy as np

from ..errors import InvalidInputError, ShapeError
from ..leverage import exact_leverage_scores
from ..settings import check_dense_budget

logger = logging.getLogger(__name__)


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """
    KL(p || q) = sum_{p > 0} p ln(p / q), with 0 ln 0 = 0.

    Returns inf (and logs a warning) if q is zero somewhere p is positive.
    """
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise ShapeError(f"distributions have different support sizes: {p.size} vs {q.size}")
    if np.any(p < 0) or np.any(q < 0):
        raise InvalidInputError("probabilities must be non-negative")
    support = p > 0
    if np.any(q[support] == 0):
        logger.warning(
            "q is zero on %d points where p is positive; KL is infinite",
            int(np.sum(q[support] == 0)),
        )
        return float("inf")
    return float(np.sum(p[support] * np.log(p[support] / q[support])))


def exact_sampling_distribution(design: np.ndarray) -> np.ndarray:
    """p(i) = l_i(A) / rank(A) for a materialized design matrix."""
    design = np.asarray(design, dtype=np.float64)
    check_dense_budget(design.size, "exact sampling distribution design")
    scores = exact_leverage_scores(design)
    return scores / scores.sum()
