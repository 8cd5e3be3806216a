"""Dense tensors, unfoldings, products and CP/TR models."""

from .dense import (
    DenseTensor,
    check_dims,
    check_mode,
    classical_fold,
    classical_unfold,
    delinearize,
    fold,
    gaussian_range,
    gaussian_sketch,
    linear_index,
    mode_fibers,
    unfold,
    unfold_permutation,
)
from .io import load_model, read_dt, save_model, write_dt
from .models import (
    CpModel,
    TrModel,
    core_mode2_classical,
    cp_design_matrix,
    cp_reconstruct,
    cyclic_modes_after,
    fold_core,
    rel_error,
    subchain,
    subchain_unfold_2,
    tr_reconstruct,
)
from .monitor import RelativeErrorMonitor
from .products import khatri_rao, kronecker

__all__ = [
    "CpModel",
    "DenseTensor",
    "RelativeErrorMonitor",
    "TrModel",
    "check_dims",
    "check_mode",
    "classical_fold",
    "classical_unfold",
    "core_mode2_classical",
    "cp_design_matrix",
    "cp_reconstruct",
    "cyclic_modes_after",
    "delinearize",
    "fold",
    "fold_core",
    "gaussian_range",
    "gaussian_sketch",
    "khatri_rao",
    "kronecker",
    "linear_index",
    "load_model",
    "mode_fibers",
    "read_dt",
    "rel_error",
    "save_model",
    "subchain",
    "subchain_unfold_2",
    "tr_reconstruct",
    "unfold",
    "unfold_permutation",
    "write_dt",
]
