"""CP-ALS and CP-ALS with sketched leverage-score sampling."""

from .als import cp_als, initial_cp_model
from .es import (
    CpEsConfig,
    cp_als_es,
    cp_design_rows,
    cp_es_draw,
    cp_leaf_dims,
    cp_sampled_update,
    cp_sketch_design,
    cp_sketch_leaves,
    project_cp_samples,
    run_sampled_cp_als,
)
from .sampler import (
    CpGramCache,
    CpSamplerState,
    cp_draw_indices,
    cp_marginal,
    cp_normalization,
)

__all__ = [
    "CpEsConfig",
    "CpGramCache",
    "CpSamplerState",
    "cp_als",
    "cp_als_es",
    "cp_design_rows",
    "cp_draw_indices",
    "cp_es_draw",
    "cp_leaf_dims",
    "cp_marginal",
    "cp_normalization",
    "cp_sampled_update",
    "cp_sketch_design",
    "cp_sketch_leaves",
    "initial_cp_model",
    "project_cp_samples",
    "run_sampled_cp_als",
]
