"""
Product leverage-score sampling.

Instead of the leverage scores of the full design matrix, each subindex is
drawn independently from the exact leverage distribution of its own factor
matrix (CP) or mode-2 unfolded core (TR), so the joint probability of a row
is the product of the per-mode probabilities. This ignores the interaction
between modes, which is what the comparison experiments measure.
"""

from collections.abc import Sequence

import numpy as np

from ..errors import DegenerateDistributionError, ShapeError
from ..leverage import ChainDistribution, IndexSample, draw_from_weights, exact_leverage_scores
from ..tensor import CpModel, TrModel, check_mode, core_mode2_classical, cyclic_modes_after


def _leverage_distribution(matrix: np.ndarray, mode: int) -> np.ndarray:
    scores = exact_leverage_scores(matrix)
    total = scores.sum()
    if not total > 0:
        raise DegenerateDistributionError(f"mode {mode} has no leverage mass")
    return scores / total


class ProductSamplerState(ChainDistribution):
    """Independent per-mode distributions; the chain state is the prefix probability."""

    def __init__(self, modes: Sequence[int], distributions: Sequence[np.ndarray]):
        if len(modes) != len(distributions):
            raise ShapeError(f"{len(modes)} modes but {len(distributions)} distributions")
        self.modes = tuple(int(m) for m in modes)
        self.distributions = [np.asarray(p, dtype=np.float64) for p in distributions]
        for mode, p in zip(self.modes, self.distributions):
            if p.ndim != 1 or np.any(p < 0) or not np.isclose(p.sum(), 1.0):
                raise DegenerateDistributionError(
                    f"mode {mode} distribution must be non-negative and sum to 1"
                )
        self.dims = tuple(p.size for p in self.distributions)

    @classmethod
    def from_cp(cls, model: CpModel, n: int) -> "ProductSamplerState":
        n = check_mode(n, model.order)
        modes = [j for j in range(model.order) if j != n]
        return cls(modes, [_leverage_distribution(model.factors[j], j) for j in modes])

    @classmethod
    def from_tr(cls, model: TrModel, n: int) -> "ProductSamplerState":
        n = check_mode(n, model.order)
        modes = cyclic_modes_after(model.order, n)
        return cls(
            modes,
            [_leverage_distribution(core_mode2_classical(model.cores[j]), j) for j in modes],
        )

    @property
    def normalization(self) -> float:
        return 1.0

    def start(self, count: int) -> np.ndarray:
        return np.ones(count)

    def candidate_masses(self, states: np.ndarray, step: int) -> np.ndarray:
        return states[:, None] * self.distributions[step][None, :]

    def advance(self, states: np.ndarray, step: int, chosen: np.ndarray) -> np.ndarray:
        return states * self.distributions[step][chosen]

    def probabilities(self, indices: np.ndarray) -> np.ndarray:
        """Joint q for rows of subindices given in `modes` order."""
        indices = np.asarray(indices, dtype=np.int64)
        q = np.ones(indices.shape[0])
        for column, p in enumerate(self.distributions):
            q *= p[indices[:, column]]
        return q


def product_draw(state: ProductSamplerState, count: int, rng: np.random.Generator) -> IndexSample:
    """
    count i.i.d. rows with each subindex drawn from its own mode distribution.

    Repeated rows are merged; their weight carries the draw count.
    """
    columns = [draw_from_weights(p, count, rng).indices[:, 0] for p in state.distributions]
    drawn = np.stack(columns, axis=1)
    unique, counts = np.unique(drawn, axis=0, return_counts=True)
    return IndexSample(
        unique,
        state.probabilities(unique),
        modes=state.modes,
        counts=counts,
        total_draws=count,
    )
