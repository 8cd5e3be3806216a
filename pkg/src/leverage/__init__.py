"""Leverage scores, sampling, the sampled least-squares solve and the chain sampler."""

from .chain import ChainDistribution, chain_marginal, draw_chain, enumerate_joint
from .lstsq import LeastSquaresSolution, sampled_least_squares
from .sampling import IndexSample, draw_from_weights, exhaustive_sample
from .scores import SAMPLING_RCOND, LeverageMap, estimate_leverage_map, exact_leverage_scores

__all__ = [
    "SAMPLING_RCOND",
    "ChainDistribution",
    "IndexSample",
    "LeastSquaresSolution",
    "LeverageMap",
    "chain_marginal",
    "draw_chain",
    "draw_from_weights",
    "enumerate_joint",
    "estimate_leverage_map",
    "exact_leverage_scores",
    "exhaustive_sample",
    "sampled_least_squares",
]
