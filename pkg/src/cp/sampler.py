"""
Sampling from estimated leverage scores of the CP design matrix A^{≠n}.

With Phi from the sketched design, the estimated score of the row for
(i_j)_{j≠n} is sum_{r,k} Phi(r,k) prod_{j≠n} A_j(i_j,r) A_j(i_j,k). Summing
over any set of free subindices replaces their factor by the Gram matrix
A_j^T A_j, so with modes drawn in ascending order:

    C            = sum Phi ∘ prod_j Gram_j
    P(prefix)    = (1/C) sum Phi ∘ prod_{prefix} a_j a_j^T ∘ prod_{rest} Gram_j

The states carried through the chain are the (R x R) Hadamard products
Phi ∘ prod_{prefix} a_j a_j^T, and the Gram tails are precomputed once.
"""

from collections.abc import Sequence

import numpy as np

from ..errors import DegenerateDistributionError, ShapeError
from ..leverage import ChainDistribution, IndexSample, LeverageMap, chain_marginal, draw_chain
from ..tensor import CpModel, check_mode


class CpGramCache:
    """Gram matrices A_j^T A_j, refreshed only for the factor just solved."""

    def __init__(self, model: CpModel):
        self.grams = [f.T @ f for f in model.factors]

    def update(self, n: int, factor: np.ndarray) -> None:
        self.grams[n] = factor.T @ factor


class CpSamplerState(ChainDistribution):
    def __init__(
        self,
        model: CpModel,
        n: int,
        leverage_map: LeverageMap,
        grams: Sequence[np.ndarray] | None = None,
    ):
        n = check_mode(n, model.order)
        rank = model.rank
        if leverage_map.phi.shape != (rank, rank):
            raise ShapeError(f"Phi {leverage_map.phi.shape} does not match CP rank {rank}")
        self.n = n
        self.modes = tuple(j for j in range(model.order) if j != n)
        self.dims = tuple(model.dims[j] for j in self.modes)
        self.factors = [model.factors[j] for j in self.modes]
        all_grams = grams if grams is not None else CpGramCache(model).grams
        self.grams = [all_grams[j] for j in self.modes]
        self.phi = leverage_map.phi
        tails = [np.ones((rank, rank))]
        for gram in reversed(self.grams):
            tails.append(gram * tails[-1])
        self.tails = tails[::-1]
        self._normalization = float(np.sum(self.phi * self.tails[0]))
        if not self._normalization > 0:
            raise DegenerateDistributionError(
                f"CP sampling normalization constant is {self._normalization:.3e}"
            )

    @property
    def normalization(self) -> float:
        return self._normalization

    @property
    def state_size(self) -> int:
        return self.phi.size

    def start(self, count: int) -> np.ndarray:
        return np.repeat(self.phi[None], count, axis=0)

    def candidate_masses(self, states: np.ndarray, step: int) -> np.ndarray:
        weighted = states * self.tails[step + 1]
        factor = self.factors[step]
        return np.einsum("crk,ir,ik->ci", weighted, factor, factor, optimize=True)

    def advance(self, states: np.ndarray, step: int, chosen: np.ndarray) -> np.ndarray:
        rows = self.factors[step][chosen]
        return states * rows[:, :, None] * rows[:, None, :]


def cp_normalization(state: CpSamplerState) -> float:
    return state.normalization


def cp_marginal(state: CpSamplerState, prefix: Sequence[int]) -> float:
    """P(i_{m_0}, ..., i_{m_{s-1}} = prefix) over modes in ascending order, skipping n."""
    return chain_marginal(state, prefix)


def cp_draw_indices(state: CpSamplerState, count: int, rng: np.random.Generator) -> IndexSample:
    return draw_chain(state, count, rng)
