"""TR-ALS and TR-ALS with sketched leverage-score sampling (tensor trains via tt=True)."""

from .als import initial_tr_model, resolve_ranks, tr_als
from .es import (
    TrEsConfig,
    project_tr_samples,
    run_sampled_tr_als,
    tr_als_es,
    tr_es_draw,
    tr_leaf_dims,
    tr_sampled_rows,
    tr_sampled_update,
    tr_sketch_design,
    tr_sketch_leaves,
    tr_sketch_order,
)
from .sampler import (
    TrGramCache,
    TrSamplerState,
    pair_gram,
    regroup_phi,
    tr_draw_indices,
    tr_marginal,
    tr_normalization,
    unit_core,
    unit_cores,
)

__all__ = [
    "TrEsConfig",
    "TrGramCache",
    "TrSamplerState",
    "initial_tr_model",
    "pair_gram",
    "project_tr_samples",
    "regroup_phi",
    "resolve_ranks",
    "run_sampled_tr_als",
    "tr_als",
    "tr_als_es",
    "tr_draw_indices",
    "tr_es_draw",
    "tr_leaf_dims",
    "tr_marginal",
    "tr_normalization",
    "tr_sampled_rows",
    "tr_sampled_update",
    "tr_sketch_design",
    "tr_sketch_leaves",
    "tr_sketch_order",
    "unit_core",
    "unit_cores",
]
