"""
Unit tests for leverage scores, index sampling, the least-squares solve and
the conditional chain sampler.

Tests cover:
- Exact and sketched leverage scores
- IndexSample weights and draws from explicit weights
- QR, pseudoinverse and ridge paths of sampled_least_squares
- ChainDistribution walks, marginals, joint enumeration and clamping
"""

import numpy as np
import pytest

from src.errors import (
    ConfigError,
    DegenerateDistributionError,
    DegenerateInputError,
    IndexRangeError,
    InvalidInputError,
    ShapeError,
)
from src.leverage import (
    SAMPLING_RCOND,
    ChainDistribution,
    IndexSample,
    chain_marginal,
    draw_chain,
    draw_from_weights,
    enumerate_joint,
    estimate_leverage_map,
    exact_leverage_scores,
    exhaustive_sample,
    sampled_least_squares,
)
from src.sketch import RecursiveSketch
from src.tensor import khatri_rao


class TableDistribution(ChainDistribution):
    """Chain distribution over an explicit table; states are C-order prefix offsets."""

    def __init__(self, table: np.ndarray):
        self.table = np.asarray(table, dtype=float)
        self.dims = self.table.shape
        self.modes = tuple(range(self.table.ndim))

    @property
    def normalization(self) -> float:
        return float(self.table.sum())

    def start(self, count):
        return np.zeros(count, dtype=np.int64)

    def candidate_masses(self, states, step):
        trailing = tuple(range(step + 1, self.table.ndim))
        marginal = self.table.sum(axis=trailing) if trailing else self.table
        return marginal.reshape(-1, self.dims[step])[states]

    def advance(self, states, step, chosen):
        return states * self.dims[step] + chosen


class TestLeverageScores:
    """Test exact and sketched leverage scores."""

    def test_scores_sum_to_rank(self):
        """Scores lie in [0, 1] and sum to the rank."""
        rng = np.random.default_rng(0)
        A = rng.standard_normal((20, 3)) @ rng.standard_normal((3, 5))
        scores = exact_leverage_scores(A)
        assert scores.sum() == pytest.approx(3.0), "scores must sum to the numerical rank"
        assert np.all(scores >= -1e-12) and np.all(scores <= 1 + 1e-12), "scores out of [0, 1]"

    def test_identity_rows(self):
        """Rows of an identity block carry score 1, zero rows score 0."""
        A = np.vstack([np.eye(2), np.zeros((3, 2))])
        np.testing.assert_allclose(exact_leverage_scores(A), [1, 1, 0, 0, 0], atol=1e-12)

    def test_unsketched_map_is_exact(self):
        """With the design itself as 'sketch' the estimate is exact."""
        A = np.random.default_rng(1).standard_normal((15, 4))
        leverage_map = estimate_leverage_map(A)
        assert leverage_map.rank == 4, "full column rank expected"
        np.testing.assert_allclose(leverage_map.scores(A), exact_leverage_scores(A), atol=1e-10)

    def test_map_column_check(self):
        """Scoring rows of the wrong width is rejected."""
        leverage_map = estimate_leverage_map(np.eye(3))
        with pytest.raises(ShapeError):
            leverage_map.scores(np.ones((2, 4)))

    def test_small_exact_cases(self):
        """Identity rows score 1; a repeated row splits its score."""
        np.testing.assert_allclose(exact_leverage_scores(np.eye(3)), [1, 1, 1], atol=1e-12)
        np.testing.assert_allclose(exact_leverage_scores(np.ones((2, 1))), [0.5, 0.5], atol=1e-12)

    def test_orthonormal_sketch_gives_identity(self):
        """Orthonormal columns have unit singular values, so Phi is the identity."""
        Q, _ = np.linalg.qr(np.random.default_rng(20).standard_normal((10, 3)))
        np.testing.assert_allclose(estimate_leverage_map(Q).phi, np.eye(3), atol=1e-10)

    def test_estimates_are_scale_free(self):
        """Scaling design and sketch together does not change the estimated scores."""
        rng = np.random.default_rng(21)
        A, sketched = rng.standard_normal((12, 3)), rng.standard_normal((30, 3))
        np.testing.assert_allclose(
            estimate_leverage_map(2 * sketched).scores(2 * A),
            estimate_leverage_map(sketched).scores(A),
            rtol=1e-10,
        )

    def test_sampling_cutoff(self):
        """A relative cutoff drops weak directions; invalid cutoffs are rejected."""
        rng = np.random.default_rng(23)
        U, _ = np.linalg.qr(rng.standard_normal((20, 3)))
        sketched = U * np.array([1.0, 1e-2, 1e-6])
        assert estimate_leverage_map(sketched).rank == 3, "default cutoff keeps 1e-6"
        truncated = estimate_leverage_map(sketched, rcond=SAMPLING_RCOND)
        assert truncated.rank == 2, "sampling cutoff must drop the 1e-6 direction"
        assert truncated.scores(sketched).sum() == pytest.approx(2.0)
        for rcond in (-1.0, 1.0):
            with pytest.raises(ConfigError):
                estimate_leverage_map(sketched, rcond=rcond)

    @pytest.mark.slow
    def test_recursive_sketch_estimates(self):
        """With J1 = 64 M R^2, estimates stay within [l/2, 3l/2] in at least 95 of 100 sketches."""
        A = np.random.default_rng(22).standard_normal((128, 4))
        exact = exact_leverage_scores(A)
        within = 0
        for seed in range(100):
            sketch = RecursiveSketch(64 * 2 * 16, (8, 16), seed=seed)
            estimate = estimate_leverage_map(sketch.materialize() @ A).scores(A)
            within += bool(np.all((estimate >= 0.5 * exact) & (estimate <= 1.5 * exact)))
        assert within >= 95, f"only {within} of 100 sketches met the bound"

    def test_degenerate_inputs(self):
        """Zero and non-finite matrices are rejected."""
        with pytest.raises(DegenerateInputError):
            exact_leverage_scores(np.zeros((3, 2)))
        with pytest.raises(DegenerateInputError):
            estimate_leverage_map(np.array([[1.0, np.nan]]))


class TestIndexSample:
    """Test sample bookkeeping and draws from explicit weights."""

    def test_weights_with_counts(self):
        """Weight is sqrt(count / (total_draws * q))."""
        sample = IndexSample(
            np.array([[0, 1], [2, 3]]), np.array([0.5, 0.25]), modes=(0, 2),
            counts=np.array([2, 1]), total_draws=4,
        )
        np.testing.assert_allclose(sample.weights, [1.0, 1.0])
        np.testing.assert_array_equal(sample.columns((2, 0)), [[1, 0], [3, 2]])

    def test_unsampled_mode(self):
        """Asking for a mode that was not drawn is an error."""
        sample = IndexSample(np.array([[0]]), np.array([1.0]), modes=(1,))
        with pytest.raises(ShapeError):
            sample.columns((0,))

    def test_invalid_probabilities(self):
        """Probabilities must lie in (0, 1]."""
        with pytest.raises(InvalidInputError):
            IndexSample(np.array([[0]]), np.array([1.5]), modes=(0,))

    def test_draw_from_weights_support(self):
        """Zero-weight slots are never drawn and q is the normalized weight."""
        sample = draw_from_weights(np.array([0.0, 1.0, 0.0, 3.0]), 500, np.random.default_rng(2))
        drawn = sample.indices[:, 0]
        assert set(np.unique(drawn)) <= {1, 3}, "drew a zero-weight slot"
        np.testing.assert_allclose(sample.probabilities, np.where(drawn == 1, 0.25, 0.75))

    def test_point_mass(self):
        """A single positive weight is always drawn."""
        sample = draw_from_weights(np.array([0.0, 0.0, 2.0]), 50, np.random.default_rng(23))
        assert np.all(sample.indices[:, 0] == 2), "point mass must always be drawn"
        np.testing.assert_allclose(sample.probabilities, 1.0)

    @pytest.mark.slow
    def test_uniform_frequencies(self):
        """Uniform weights over four slots give frequencies within 0.01 of 0.25."""
        sample = draw_from_weights(np.ones(4), 100_000, np.random.default_rng(24))
        freq = np.bincount(sample.indices[:, 0], minlength=4) / 100_000
        np.testing.assert_allclose(freq, 0.25, atol=0.01)

    def test_draw_from_weights_errors(self):
        """Negative or all-zero weights are rejected."""
        with pytest.raises(InvalidInputError):
            draw_from_weights(np.array([1.0, -1.0]), 3, np.random.default_rng(0))
        with pytest.raises(DegenerateDistributionError):
            draw_from_weights(np.zeros(3), 3, np.random.default_rng(0))

    def test_exhaustive(self):
        """Exhaustive samples visit every grid point once with unit weight."""
        sample = exhaustive_sample((2, 3), modes=(1, 2))
        assert sample.count == 6, "every grid point once"
        np.testing.assert_allclose(sample.weights, np.ones(6))
        np.testing.assert_array_equal(sample.flat((2, 3)), np.arange(6))


class TestSampledLeastSquares:
    """Test the shared least-squares solve."""

    def test_consistent_system(self):
        """A consistent well-conditioned system is solved exactly by QR."""
        rng = np.random.default_rng(3)
        A, X = rng.standard_normal((12, 4)), rng.standard_normal((4, 2))
        result = sampled_least_squares(A, A @ X)
        assert result.method == "qr", "well-conditioned design should use QR"
        assert not result.rank_deficient, "full rank design flagged deficient"
        np.testing.assert_allclose(result.solution, X, atol=1e-10)
        assert result.residual_norm < 1e-10, "consistent system must have zero residual"

    def test_rank_deficient(self):
        """Duplicated columns fall back to the minimum-norm pseudoinverse."""
        rng = np.random.default_rng(4)
        a = rng.standard_normal((10, 1))
        A = np.hstack([a, a])
        result = sampled_least_squares(A, 2 * a[:, 0])
        assert result.method == "svd", "singular design must use the pseudoinverse"
        assert result.rank_deficient and result.rank == 1, "rank deficiency not detected"
        np.testing.assert_allclose(result.solution, [1.0, 1.0], atol=1e-10)

    def test_ridge(self):
        """Regularization matches (A^T A + lambda I)^{-1} A^T b."""
        rng = np.random.default_rng(5)
        A, b = rng.standard_normal((8, 3)), rng.standard_normal(8)
        expected = np.linalg.solve(A.T @ A + 0.5 * np.eye(3), A.T @ b)
        result = sampled_least_squares(A, b, regularization=0.5)
        assert result.solution.shape == (3,), "vector rhs must give a vector solution"
        np.testing.assert_allclose(result.solution, expected, atol=1e-10)

    def test_underdetermined(self):
        """Fewer rows than columns still returns the minimum-norm solution."""
        A = np.array([[1.0, 1.0, 0.0]])
        result = sampled_least_squares(A, np.array([2.0]))
        np.testing.assert_allclose(result.solution, [1.0, 1.0, 0.0], atol=1e-12)
        assert result.rank_deficient, "wide design is rank deficient"

    def test_extreme_condition_does_not_overflow(self):
        """A diag(R) ratio beyond float range falls back to SVD without overflow."""
        A = np.diag([1e160, 1e-160])
        with np.errstate(over="raise"):
            result = sampled_least_squares(A, np.array([1e160, 0.0]))
        assert result.method == "svd", "ill-conditioned design must use the pseudoinverse"
        np.testing.assert_allclose(result.solution, [1.0, 0.0], atol=1e-12)

    @pytest.mark.slow
    def test_leverage_sampled_relative_error(self):
        """Leverage sampling with J2 = 200 stays within 1.5 OPT in at least 90% of trials."""
        rng = np.random.default_rng(25)
        A = khatri_rao([rng.standard_normal((16, 4)) for _ in range(3)])
        Y = A @ rng.standard_normal((4, 2)) + rng.standard_normal((4096, 2))
        optimum = np.linalg.norm(A @ np.linalg.lstsq(A, Y, rcond=None)[0] - Y)
        scores = exact_leverage_scores(A)
        good = 0
        for trial in range(200):
            sample = draw_from_weights(scores, 200, np.random.default_rng(100 + trial))
            rows, weights = sample.indices[:, 0], sample.weights[:, None]
            X = sampled_least_squares(A[rows] * weights, Y[rows] * weights).solution
            good += np.linalg.norm(A @ X - Y) <= 1.5 * optimum
        assert good >= 180, f"only {good} of 200 sampled solves were within 1.5 OPT"

    def test_errors(self):
        """Shape mismatches and negative regularization are rejected."""
        with pytest.raises(ShapeError):
            sampled_least_squares(np.ones((3, 2)), np.ones(4))
        with pytest.raises(ConfigError):
            sampled_least_squares(np.eye(2), np.ones(2), regularization=-1.0)


class TestChainSampler:
    """Test conditional chain sampling on explicit tables."""

    TABLE = np.array([[[1.0, 2.0], [0.0, 3.0]], [[4.0, 0.5], [1.5, 0.0]]])

    def test_enumerate_joint(self):
        """Joint enumeration returns the normalized table, last step fastest."""
        indices, probabilities = enumerate_joint(TableDistribution(self.TABLE))
        np.testing.assert_allclose(probabilities, self.TABLE.ravel() / self.TABLE.sum())
        np.testing.assert_array_equal(indices[1], [0, 0, 1])
        np.testing.assert_array_equal(indices[2], [0, 1, 0])

    def test_marginal(self):
        """chain_marginal sums out the unfixed subindices."""
        dist = TableDistribution(self.TABLE)
        total = self.TABLE.sum()
        assert chain_marginal(dist, ()) == 1.0, "empty prefix has probability 1"
        assert chain_marginal(dist, (1,)) == pytest.approx(6.0 / total)
        assert chain_marginal(dist, (0, 1)) == pytest.approx(3.0 / total)
        assert chain_marginal(dist, (1, 0, 1)) == pytest.approx(0.5 / total)
        with pytest.raises(IndexRangeError):
            chain_marginal(dist, (2,))

    def test_draw_probabilities(self):
        """Recorded probabilities equal the joint; zero cells are never drawn."""
        dist = TableDistribution(self.TABLE)
        sample = draw_chain(dist, 400, np.random.default_rng(6))
        joint = self.TABLE[tuple(sample.indices.T)] / self.TABLE.sum()
        assert np.all(joint > 0), "drew a zero-probability cell"
        np.testing.assert_allclose(sample.probabilities, joint)
        assert sample.modes == (0, 1, 2), "modes follow the draw order"
        assert sample.clamp_events == 0, "non-negative table needs no clamping"

    @pytest.mark.slow
    def test_empirical_frequencies(self):
        """Draw frequencies approach the joint."""
        dist = TableDistribution(self.TABLE)
        sample = draw_chain(dist, 20_000, np.random.default_rng(7))
        flat = np.ravel_multi_index(tuple(sample.indices.T), self.TABLE.shape)
        freq = np.bincount(flat, minlength=8) / 20_000
        np.testing.assert_allclose(freq, self.TABLE.ravel() / self.TABLE.sum(), atol=0.02)

    def test_negative_mass_clamped(self):
        """Negative cells are clamped to zero and counted."""
        dist = TableDistribution(np.array([[1.0, -0.5], [1.0, 1.0]]))
        sample = draw_chain(dist, 300, np.random.default_rng(8))
        drawn = {tuple(i) for i in sample.indices}
        assert (0, 1) not in drawn, "clamped cell must never be drawn"
        assert sample.clamp_events > 0, "clamping must be recorded"
        _, probabilities = enumerate_joint(dist)
        assert probabilities[1] == 0.0, "negative joint mass enumerates as zero"

    def test_no_mass(self):
        """A distribution with no mass fails after the retries."""
        with pytest.raises(DegenerateDistributionError):
            draw_chain(TableDistribution(np.zeros((2, 2))), 5, np.random.default_rng(9))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
