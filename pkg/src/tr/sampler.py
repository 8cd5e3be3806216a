"""
Sampling from estimated leverage scores of the TR design matrix G^{≠n}_[2].

The design row for (i_{n+1}, ..., i_{n-1}) is g = vec(M) with
M = G_{n+1}[:, i_{n+1}, :] ... G_{n-1}[:, i_{n-1}, :] (R_n x R_{n-1}), and its
estimated score g^T Phi g is the trace of a ring of "pair" matrices:

    score = trace(P_{n+1}(i_{n+1}) ... P_{n-1}(i_{n-1}) Phi_hat)

where P_j(i) = kron(G_j[:, i, :], G_j[:, i, :]) and Phi_hat is Phi regrouped
as (r_{n-1} r'_{n-1}) x (r_n r'_n). Summing a subindex out replaces its
P_j(i) by the pair Gram sum_i P_j(i) (a regrouping of G_j,[2]^T G_j,[2]).

Subindices are drawn in ring order n+1, ..., N-1, 0, ..., n-1. The states are
the running prefix products L (R_n^2 x R_{m}^2); suffix products of pair
Grams times Phi_hat are precomputed, so a candidate's mass costs one small
contraction.

Every core in the chain is scaled to unit Frobenius norm and Phi_hat is
scaled back by the product of the squared norms. Leverage scores do not
change when a core is scaled, and the chain products stay near unit size.
"""

from collections.abc import Sequence

import numpy as np

from ..errors import DegenerateDistributionError, ShapeError
from ..leverage import ChainDistribution, IndexSample, LeverageMap, chain_marginal, draw_chain
from ..tensor import TrModel, check_mode, cyclic_modes_after


def unit_core(core: np.ndarray) -> tuple[np.ndarray, float]:
    """(core / ||core||_F, ||core||_F); a zero core is returned unscaled."""
    scale = float(np.linalg.norm(core))
    if scale == 0:
        return core, 1.0
    return core / scale, scale


def unit_cores(model: TrModel, n: int) -> TrModel:
    """The model with every core except n scaled to unit Frobenius norm."""
    return TrModel([core if j == n else unit_core(core)[0] for j, core in enumerate(model.cores)])


def pair_gram(core: np.ndarray) -> np.ndarray:
    """sum_i kron(G[:, i, :], G[:, i, :]) as an (R_p^2 x R_q^2) matrix."""
    rp, _, rq = core.shape
    return np.einsum("aib,cid->acbd", core, core, optimize=True).reshape(rp * rp, rq * rq)


def pair_slices(core: np.ndarray, chosen: np.ndarray) -> np.ndarray:
    """kron(G[:, i, :], G[:, i, :]) for each chosen i, shape (count, R_p^2, R_q^2)."""
    rp, _, rq = core.shape
    slices = np.moveaxis(core[:, chosen, :], 1, 0)
    return np.einsum("nab,ncd->nacbd", slices, slices).reshape(-1, rp * rp, rq * rq)


def regroup_phi(phi: np.ndarray, rank_before: int, rank_after: int) -> np.ndarray:
    """Phi over columns a + R_{n-1} b  ->  Phi_hat[(a, a'), (b, b')]."""
    quad = phi.reshape(rank_before, rank_after, rank_before, rank_after, order="F")
    return quad.transpose(0, 2, 1, 3).reshape(rank_before**2, rank_after**2)


class TrGramCache:
    """Pair Gram matrices of every unit-norm core, refreshed only for the core just solved."""

    def __init__(self, model: TrModel):
        self.grams = [pair_gram(unit_core(core)[0]) for core in model.cores]

    def update(self, n: int, core: np.ndarray) -> None:
        self.grams[n] = pair_gram(unit_core(core)[0])


class TrSamplerState(ChainDistribution):
    def __init__(
        self,
        model: TrModel,
        n: int,
        leverage_map: LeverageMap,
        grams: Sequence[np.ndarray] | None = None,
    ):
        n = check_mode(n, model.order)
        before, after = model.rank_before(n), model.rank_after(n)
        if leverage_map.phi.shape != (before * after, before * after):
            raise ShapeError(
                f"Phi {leverage_map.phi.shape} does not match ranks ({before}, {after})"
            )
        self.n = n
        self.rank_after_n = after
        self.modes = tuple(cyclic_modes_after(model.order, n))
        self.dims = tuple(model.dims[j] for j in self.modes)
        scaled = [unit_core(model.cores[j]) for j in self.modes]
        self.cores = [core for core, _ in scaled]
        log_scale = 2.0 * sum(np.log(scale) for _, scale in scaled)
        all_grams = grams if grams is not None else TrGramCache(model).grams
        self.phi_hat = regroup_phi(leverage_map.phi, before, after) * np.exp(log_scale)
        tails = [np.eye(before * before)]
        for j in reversed(self.modes):
            tails.append(all_grams[j] @ tails[-1])
        tails = tails[::-1]
        # weights[s] = (pair Grams after step s) @ Phi_hat
        self.weights = [tails[s + 1] @ self.phi_hat for s in range(len(self.modes))]
        self._normalization = float(np.trace(tails[0] @ self.phi_hat))
        if not self._normalization > 0:
            raise DegenerateDistributionError(
                f"TR sampling normalization constant is {self._normalization:.3e}"
            )
        self._max_rank = max(max(c.shape[0], c.shape[2]) for c in self.cores)

    @property
    def normalization(self) -> float:
        return self._normalization

    @property
    def state_size(self) -> int:
        return self.rank_after_n**2 * self._max_rank**2

    def start(self, count: int) -> np.ndarray:
        return np.repeat(np.eye(self.rank_after_n**2)[None], count, axis=0)

    def candidate_masses(self, states: np.ndarray, step: int) -> np.ndarray:
        core = self.cores[step]
        rp, _, rq = core.shape
        closing = np.matmul(self.weights[step][None], states)
        closing = closing.reshape(-1, rq, rq, rp, rp)
        return np.einsum("aib,cid,nbdac->ni", core, core, closing, optimize=True)

    def advance(self, states: np.ndarray, step: int, chosen: np.ndarray) -> np.ndarray:
        return np.matmul(states, pair_slices(self.cores[step], chosen))


def tr_normalization(state: TrSamplerState) -> float:
    return state.normalization


def tr_marginal(state: TrSamplerState, prefix: Sequence[int]) -> float:
    """P(prefix) for subindices in ring order n+1, ..., n-1."""
    return chain_marginal(state, prefix)


def tr_draw_indices(state: TrSamplerState, count: int, rng: np.random.Generator) -> IndexSample:
    return draw_chain(state, count, rng)
