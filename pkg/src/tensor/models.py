"""
CP and tensor-ring models, their design matrices and reconstruction.

CP:  X(i) = sum_r prod_j A_j(i_j, r), factors A_j of shape (I_j, R).
TR:  X(i) = trace(G_0[:, i_0, :] @ G_1[:, i_1, :] @ ... @ G_{N-1}[:, i_{N-1}, :]),
     cores G_j of shape (R_{j-1}, I_j, R_j) with R_{-1} = R_{N-1}. A tensor train
     is the case where that shared boundary rank is 1.

Core/column convention used everywhere in the tr package: the mode-2 design
matrix of core n has columns indexed by (r_{n-1}, r_n) with r_{n-1} fastest,
i.e. column a + R_{n-1} * b. core_mode2_classical and fold_core are the only
places that translate between that flat column and the core's axes.
"""

import math
from collections.abc import Sequence

import numpy as np

from ..errors import DegenerateInputError, ShapeError
from ..settings import check_dense_budget
from .dense import DenseTensor, check_mode
from .products import khatri_rao

ERROR_BLOCK = 2**20


class CpModel:
    """CP model: list of factor matrices sharing the column count R."""

    def __init__(self, factors: Sequence[np.ndarray]):
        factors = [np.array(f, dtype=np.float64) for f in factors]
        if not factors:
            raise ShapeError("a CP model needs at least one factor")
        if any(f.ndim != 2 for f in factors):
            raise ShapeError("CP factors must be matrices")
        ranks = {f.shape[1] for f in factors}
        if len(ranks) != 1:
            raise ShapeError(f"CP factors must share column count, got {sorted(ranks)}")
        self.factors = factors

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1]

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    def with_factor(self, n: int, factor: np.ndarray) -> "CpModel":
        factors = list(self.factors)
        factors[n] = factor
        return CpModel(factors)

    def values_at(self, indices: np.ndarray) -> np.ndarray:
        """Model entries at 0-based multi-indices of shape (count, N)."""
        indices = np.asarray(indices, dtype=np.int64)
        acc = np.ones((indices.shape[0], self.rank))
        for j, factor in enumerate(self.factors):
            acc *= factor[indices[:, j]]
        return acc.sum(axis=1)

    def to_tensor(self) -> DenseTensor:
        return cp_reconstruct(self)

    def __repr__(self) -> str:
        return f"CpModel(dims={self.dims}, rank={self.rank})"


class TrModel:
    """Tensor-ring model: cyclic chain of 3-way cores."""

    def __init__(self, cores: Sequence[np.ndarray]):
        cores = [np.array(c, dtype=np.float64) for c in cores]
        if not cores:
            raise ShapeError("a TR model needs at least one core")
        if any(c.ndim != 3 for c in cores):
            raise ShapeError("TR cores must be 3-way arrays")
        for j, core in enumerate(cores):
            nxt = cores[(j + 1) % len(cores)]
            if core.shape[2] != nxt.shape[0]:
                raise ShapeError(
                    f"core {j} has trailing rank {core.shape[2]} but core "
                    f"{(j + 1) % len(cores)} has leading rank {nxt.shape[0]}"
                )
        self.cores = cores

    @property
    def order(self) -> int:
        return len(self.cores)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        """(R_0, ..., R_{N-1}) where R_j is the trailing rank of core j; R_{N-1} closes the ring."""
        return tuple(c.shape[2] for c in self.cores)

    def rank_before(self, n: int) -> int:
        return self.cores[n].shape[0]

    def rank_after(self, n: int) -> int:
        return self.cores[n].shape[2]

    @property
    def is_train(self) -> bool:
        return self.cores[0].shape[0] == 1

    def with_core(self, n: int, core: np.ndarray) -> "TrModel":
        cores = list(self.cores)
        cores[n] = core
        return TrModel(cores)

    def values_at(self, indices: np.ndarray) -> np.ndarray:
        """Model entries via the trace of batched slice products."""
        indices = np.asarray(indices, dtype=np.int64)
        product = np.moveaxis(self.cores[0][:, indices[:, 0], :], 1, 0)
        for j in range(1, self.order):
            product = product @ np.moveaxis(self.cores[j][:, indices[:, j], :], 1, 0)
        return np.einsum("caa->c", product)

    def to_tensor(self) -> DenseTensor:
        return tr_reconstruct(self)

    def __repr__(self) -> str:
        return f"TrModel(dims={self.dims}, ranks={self.ranks})"


def cp_design_matrix(model: CpModel, n: int) -> np.ndarray:
    """A^{≠n} = A_{N-1} ⊙ ... ⊙ A_0 without A_n; rows follow classical_unfold columns."""
    n = check_mode(n, model.order)
    if model.order < 2:
        raise ShapeError("the CP design matrix needs at least two modes")
    rows = math.prod(model.dims) // model.dims[n]
    check_dense_budget(rows * model.rank, "CP design matrix")
    return khatri_rao([model.factors[j] for j in reversed(range(model.order)) if j != n])


def _chain(cores: Sequence[np.ndarray]) -> np.ndarray:
    """Contract cores left to right; the middle index lists the first core fastest."""
    acc = cores[0]
    for core in cores[1:]:
        a, p, _ = acc.shape
        _, i, c = core.shape
        acc = np.einsum("apb,bic->apic", acc, core).reshape(a, p * i, c, order="F")
    return acc


def cyclic_modes_after(order: int, n: int) -> list[int]:
    """Modes n+1, ..., N-1, 0, ..., n-1: the row order of the subchain unfolding."""
    return [(n + 1 + s) % order for s in range(order - 1)]


def subchain(model: TrModel, n: int) -> np.ndarray:
    """G^{≠n} of shape (R_n, prod_{j!=n} I_j, R_{n-1}), middle index cyclic from n+1."""
    n = check_mode(n, model.order)
    if model.order < 2:
        raise ShapeError("the subchain needs at least two modes")
    check_dense_budget(
        model.rank_after(n) * math.prod(model.dims) // model.dims[n] * model.rank_before(n),
        "TR subchain",
    )
    return _chain([model.cores[j] for j in cyclic_modes_after(model.order, n)])


def subchain_unfold_2(model: TrModel, n: int) -> np.ndarray:
    """G^{≠n}_[2]: rows follow unfold(X, n) columns, columns are (r_{n-1}, r_n) with r_{n-1} fastest."""
    chain = subchain(model, n)
    return chain.transpose(1, 2, 0).reshape(chain.shape[1], -1, order="F")


def core_mode2_classical(core: np.ndarray) -> np.ndarray:
    """Classical mode-2 unfolding G_(2): (I_n, R_{n-1} R_n), column a + R_{n-1} * b."""
    core = np.asarray(core)
    return core.transpose(1, 0, 2).reshape(core.shape[1], -1, order="F")


def fold_core(solution: np.ndarray, rank_before: int, rank_after: int) -> np.ndarray:
    """
    Inverse of core_mode2_classical for a least-squares solution G_(2)^T.

    solution has shape (R_{n-1} R_n, I_n); row a + R_{n-1} * b holds G(a, :, b).
    """
    solution = np.asarray(solution, dtype=np.float64)
    if solution.shape[0] != rank_before * rank_after:
        raise ShapeError(
            f"solution has {solution.shape[0]} rows, expected {rank_before}*{rank_after}"
        )
    folded = solution.reshape(rank_before, rank_after, solution.shape[1], order="F")
    return folded.transpose(0, 2, 1)


def cp_reconstruct(model: CpModel) -> DenseTensor:
    check_dense_budget(math.prod(model.dims), "CP reconstruction")
    if model.order == 1:
        return DenseTensor(model.factors[0].sum(axis=1))
    head = khatri_rao([model.factors[j] for j in reversed(range(model.order - 1))])
    flat = head @ model.factors[-1].T
    return DenseTensor.from_flat(flat.ravel(order="F"), model.dims)


def tr_reconstruct(model: TrModel) -> DenseTensor:
    check_dense_budget(math.prod(model.dims), "TR reconstruction")
    if model.order == 1:
        return DenseTensor(np.einsum("aia->i", model.cores[0]))
    split = max(1, model.order // 2)
    left = _chain(model.cores[:split])
    right = _chain(model.cores[split:])
    flat = np.einsum("apb,bqa->pq", left, right)
    return DenseTensor.from_flat(flat.ravel(order="F"), model.dims)


def _cp_residual_squared(model: CpModel, X: DenseTensor) -> float:
    """||model - X||_F^2 summed over blocks of at most ERROR_BLOCK entries."""
    lead = 1
    while lead < model.order and math.prod(model.dims[: lead + 1]) <= ERROR_BLOCK:
        lead += 1
    head = khatri_rao([model.factors[j] for j in reversed(range(lead))])
    total = 0.0
    for tail in np.ndindex(*model.dims[lead:]):
        weights = np.ones(model.rank)
        for j, i in enumerate(tail, start=lead):
            weights = weights * model.factors[j][i]
        block = head @ weights - X.data[(Ellipsis, *tail)].ravel(order="F")
        total += float(block @ block)
    return total


def rel_error(model: CpModel | TrModel, X: DenseTensor) -> float:
    """||model - X||_F / ||X||_F; CP models are compared block by block without reconstruction."""
    if model.dims != X.dims:
        raise ShapeError(f"model dims {model.dims} do not match tensor dims {X.dims}")
    reference = X.norm()
    if reference == 0:
        raise DegenerateInputError("relative error is undefined for a zero tensor")
    if isinstance(model, CpModel):
        return float(np.sqrt(_cp_residual_squared(model, X)) / reference)
    residual = model.to_tensor().data - X.data
    return float(np.linalg.norm(residual.ravel()) / reference)
