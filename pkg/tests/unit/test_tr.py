"""
Unit tests for TR-ALS and TR-ALS with sketched leverage-score sampling.

Tests cover:
- Rank resolution, including the tensor-train closing rank
- The ring sampler against exact leverage scores of the subchain unfolding
- Sampled draws in total variation, prefix marginals and core-scale invariance
- Sketched and sampled subchain rows against their dense definitions
- Exact TR-ALS monotonicity, range initialization and the matrix SVD optimum
- Exhaustive sampling and sampled fits
- Projection of new samples onto frozen cores
"""

import itertools

import numpy as np
import pytest

from src.errors import ConfigError, ShapeError
from src.leverage import (
    enumerate_joint,
    estimate_leverage_map,
    exact_leverage_scores,
    exhaustive_sample,
)
from src.sketch import RecursiveSketch
from src.tensor import (
    DenseTensor,
    TrModel,
    cyclic_modes_after,
    linear_index,
    subchain_unfold_2,
)
from src.tr import (
    TrEsConfig,
    TrGramCache,
    TrSamplerState,
    initial_tr_model,
    pair_gram,
    project_tr_samples,
    regroup_phi,
    resolve_ranks,
    tr_als,
    tr_als_es,
    tr_draw_indices,
    tr_leaf_dims,
    tr_marginal,
    tr_sampled_rows,
    tr_sketch_design,
    tr_sketch_order,
    unit_core,
    unit_cores,
)
from src.xbench.synth import synth_tr


def random_tr(dims, ranks, seed=0) -> TrModel:
    rng = np.random.default_rng(seed)
    return TrModel(
        [rng.standard_normal((ranks[j - 1], d, ranks[j])) for j, d in enumerate(dims)]
    )


def noisy(X: DenseTensor, sd: float, seed: int = 0) -> DenseTensor:
    rng = np.random.default_rng(seed)
    return DenseTensor(X.data + sd * rng.standard_normal(X.dims))


class TestResolveRanks:
    """Test rank normalization."""

    def test_int_and_sequence(self):
        """An int repeats; a sequence is taken as given."""
        assert resolve_ranks(3, 4) == (3, 3, 3, 3), "int rank must repeat per mode"
        assert resolve_ranks([2, 3, 4], 3) == (2, 3, 4), "sequence must be kept"

    def test_tensor_train(self):
        """tt=True closes the ring with rank 1."""
        assert resolve_ranks(3, 4, tt=True) == (3, 3, 3, 1), "closing rank must be 1"

    def test_invalid(self):
        """Wrong lengths and non-positive ranks are rejected."""
        with pytest.raises(ConfigError):
            resolve_ranks([2, 2], 3)
        with pytest.raises(ConfigError):
            resolve_ranks([2, 0, 2], 3)


class TestTrSampler:
    """Test the ring sampler over rows of G^{≠n}_[2]."""

    def test_pair_gram(self):
        """pair_gram sums kron(G_i, G_i) over slices."""
        core = np.random.default_rng(0).standard_normal((2, 3, 2))
        expected = sum(np.kron(core[:, i, :], core[:, i, :]) for i in range(3))
        np.testing.assert_allclose(pair_gram(core), expected, atol=1e-12)

    def test_regroup_phi_quadratic_form(self):
        """g^T Phi g equals trace(kron(M, M) Phi_hat) for g = vec(M^T)."""
        rng = np.random.default_rng(1)
        before, after = 2, 3
        B = rng.standard_normal((6, 6))
        phi = B @ B.T
        M = rng.standard_normal((after, before))
        g = M.reshape(-1)
        expected = g @ phi @ g
        actual = np.trace(np.kron(M, M) @ regroup_phi(phi, before, after))
        assert actual == pytest.approx(expected), "regrouped Phi changes the quadratic form"

    @pytest.mark.parametrize(
        "dims, ranks, n",
        [((2, 3, 2), (2, 2, 3), 0), ((2, 3, 2, 2), (2, 1, 3, 2), 2), ((3, 2, 2), (2, 2, 1), 1)],
    )
    def test_exact_phi_gives_leverage_distribution(self, dims, ranks, n):
        """With Phi from the unsketched design the joint is l_i / rank."""
        model = random_tr(dims, ranks, seed=2)
        design = subchain_unfold_2(model, n)
        leverage_map = estimate_leverage_map(design)
        state = TrSamplerState(model, n, leverage_map)
        assert state.normalization == pytest.approx(leverage_map.rank), "C must equal the rank"
        indices, probabilities = enumerate_joint(state)
        rows = linear_index(indices, [model.dims[j] for j in state.modes])
        expected = exact_leverage_scores(design)[rows] / leverage_map.rank
        np.testing.assert_allclose(probabilities, expected, atol=1e-10)

    def test_draws_and_marginals(self):
        """Draws record joint probabilities; first-step marginals sum to one."""
        model = random_tr((3, 2, 3), (2, 2, 2), seed=3)
        state = TrSamplerState(model, 1, estimate_leverage_map(subchain_unfold_2(model, 1)))
        assert state.modes == (2, 0), "draw order follows the ring after n"
        assert sum(tr_marginal(state, (i,)) for i in range(3)) == pytest.approx(1.0)
        sample = tr_draw_indices(state, 50, np.random.default_rng(4))
        indices, probabilities = enumerate_joint(state)
        lookup = dict(zip(map(tuple, indices), probabilities))
        np.testing.assert_allclose(
            sample.probabilities, [lookup[tuple(i)] for i in sample.indices], atol=1e-12
        )

    def test_cached_grams(self):
        """A refreshed cache gives the same state as fresh Grams."""
        model = random_tr((2, 3, 2), (2, 2, 2), seed=5)
        cache = TrGramCache(random_tr((2, 3, 2), (2, 2, 2), seed=6))
        for j, core in enumerate(model.cores):
            cache.update(j, core)
        leverage_map = estimate_leverage_map(subchain_unfold_2(model, 0))
        cached = TrSamplerState(model, 0, leverage_map, cache.grams)
        fresh = TrSamplerState(model, 0, leverage_map)
        assert cached.normalization == pytest.approx(fresh.normalization)

    def test_draws_match_joint_in_total_variation(self):
        """1e5 draws from a sketched Phi are within TV 0.01 of the enumerated joint."""
        model = random_tr((2, 2, 2), (2, 2, 2), seed=12)
        sketch = RecursiveSketch(64, tr_leaf_dims(model.dims, 0), seed=3)
        state = TrSamplerState(model, 0, estimate_leverage_map(tr_sketch_design(model, 0, sketch)))
        indices, probabilities = enumerate_joint(state)
        size = int(np.prod(state.dims))
        expected = np.zeros(size)
        expected[linear_index(indices, state.dims)] = probabilities
        sample = tr_draw_indices(state, 100_000, np.random.default_rng(13))
        observed = np.bincount(
            linear_index(sample.indices, state.dims), weights=sample.counts, minlength=size
        ) / sample.total_draws
        tv = 0.5 * np.abs(observed - expected).sum()
        assert tv <= 0.01, f"total variation {tv:.4f} exceeds 0.01"

    def test_marginals_sum_at_every_depth(self):
        """Every prefix marginal equals the sum over its one-longer extensions."""
        model = random_tr((2, 3, 2, 2), (2, 2, 3, 2), seed=14)
        sketch = RecursiveSketch(64, tr_leaf_dims(model.dims, 2), seed=4)
        state = TrSamplerState(model, 2, estimate_leverage_map(tr_sketch_design(model, 2, sketch)))
        for depth, dim in enumerate(state.dims):
            for prefix in itertools.product(*(range(d) for d in state.dims[:depth])):
                children = sum(tr_marginal(state, prefix + (i,)) for i in range(dim))
                assert tr_marginal(state, prefix) == pytest.approx(children, rel=1e-9, abs=1e-12), (
                    f"marginal of {prefix} does not split over step {depth}"
                )

    def test_unit_core(self):
        """unit_core splits off the Frobenius norm; zero cores pass through."""
        core = np.random.default_rng(15).standard_normal((2, 3, 2))
        unit, scale = unit_core(5.0 * core)
        assert scale == pytest.approx(5.0 * np.linalg.norm(core))
        assert np.linalg.norm(unit) == pytest.approx(1.0)
        zero, zero_scale = unit_core(np.zeros((2, 3, 2)))
        assert zero_scale == 1.0 and not zero.any(), "zero core must be returned as is"
        model = random_tr((2, 3, 2), (2, 2, 2), seed=16)
        balanced = unit_cores(model, 1)
        np.testing.assert_array_equal(balanced.cores[1], model.cores[1])
        for j in (0, 2):
            assert np.linalg.norm(balanced.cores[j]) == pytest.approx(1.0), f"core {j} not unit"

    def test_state_ignores_core_scale(self):
        """Rescaling cores leaves the sampling distribution and C unchanged."""
        model = random_tr((2, 3, 2, 3), (2, 3, 2, 2), seed=17)
        cores = [core.copy() for core in model.cores]
        cores[1] *= 1e4
        cores[2] *= 1e-3
        scaled = TrModel(cores)
        states = []
        for m in (model, scaled):
            leverage_map = estimate_leverage_map(subchain_unfold_2(m, 0))
            states.append(TrSamplerState(m, 0, leverage_map, TrGramCache(m).grams))
        assert states[1].normalization == pytest.approx(states[0].normalization, rel=1e-8)
        np.testing.assert_allclose(
            enumerate_joint(states[1])[1], enumerate_joint(states[0])[1], atol=1e-10
        )

    def test_phi_shape_check(self):
        """Phi must match R_{n-1} R_n."""
        model = random_tr((2, 3, 2), (2, 2, 2))
        with pytest.raises(ShapeError):
            TrSamplerState(model, 0, estimate_leverage_map(np.eye(3)))


class TestTrDesign:
    """Test sketched and sampled views of G^{≠n}_[2]."""

    def test_sketch_order(self):
        """Leaves run n-1, n-2, ..., n+1 around the ring."""
        assert tr_sketch_order(5, 2) == [1, 0, 4, 3], "wrong leaf order"
        assert tr_leaf_dims((2, 3, 4, 5), 0) == (5, 4, 3), "wrong leaf dims"

    @pytest.mark.parametrize(
        "dims, ranks, n",
        [((2, 3, 2), (2, 3, 2), 1), ((2, 2, 3, 2), (2, 3, 2, 2), 0), ((2, 2, 3, 2), (2, 3, 2, 2), 3)],
    )
    def test_sketch_design_matches_dense(self, dims, ranks, n):
        """Psi G^{≠n}_[2] equals the explicit sketch times the dense subchain unfolding."""
        model = random_tr(dims, ranks, seed=7)
        sketch = RecursiveSketch(16, tr_leaf_dims(model.dims, n), seed=1)
        expected = sketch.materialize() @ subchain_unfold_2(model, n)
        np.testing.assert_allclose(tr_sketch_design(model, n, sketch), expected, atol=1e-9)

    def test_sketch_leaf_mismatch(self):
        """A sketch for the wrong leaf dims is rejected."""
        model = random_tr((2, 3, 4), (2, 2, 2))
        with pytest.raises(ShapeError):
            tr_sketch_design(model, 0, RecursiveSketch(8, (3, 4), seed=0))

    @pytest.mark.parametrize("n", [0, 1, 3])
    def test_sampled_rows_are_design_rows(self, n):
        """Slice products reproduce the rows of the dense subchain unfolding."""
        model = random_tr((2, 3, 2, 2), (2, 1, 3, 2), seed=8)
        others = tuple(j for j in range(4) if j != n)
        sample = exhaustive_sample([model.dims[j] for j in others], others)
        modes = cyclic_modes_after(4, n)
        rows = linear_index(sample.columns(modes), [model.dims[j] for j in modes])
        np.testing.assert_allclose(
            tr_sampled_rows(model, n, sample), subchain_unfold_2(model, n)[rows], atol=1e-12
        )


class TestTrAls:
    """Test exact TR-ALS."""

    def test_monotone_error(self):
        """The relative error never increases between sweeps."""
        X = noisy(random_tr((4, 3, 4), (2, 2, 2), seed=9).to_tensor(), 0.1)
        fit = tr_als(X, 2, iterations=10, tolerance=0.0)
        errors = fit.diagnostics.errors
        assert all(b <= a + 1e-10 for a, b in zip(errors, errors[1:])), f"not monotone: {errors}"
        assert fit.diagnostics.method == "tr-als", "wrong method label"

    def test_tensor_train(self):
        """tt=True fits a train with closing rank 1."""
        X = random_tr((3, 4, 3), (2, 2, 1), seed=10).to_tensor()
        fit = tr_als(X, 2, iterations=5, tt=True)
        assert fit.model.is_train, "model must be a tensor train"
        assert fit.model.ranks == (2, 2, 1), f"unexpected ranks {fit.model.ranks}"

    def test_range_init(self):
        """Range initialization gives unit-norm cores 1..N-1 from the mode sketches."""
        X = random_tr((5, 6, 7), (2, 2, 2), seed=11).to_tensor()
        model = initial_tr_model(X, 2, seed=0, init="range")
        for core in model.cores[1:]:
            assert core.shape[0] * core.shape[2] == 4, "sketch width must be R_{n-1} R_n"
            assert np.linalg.norm(core) == pytest.approx(1.0), "range cores must have unit norm"

    def test_range_init_keeps_spike(self):
        """With R_{n-1} R_n > I_n the spike slice still dominates each range core."""
        X, _ = synth_tr((6, 6, 6, 6), 3, seed=3)
        model = initial_tr_model(X, 3, seed=0, init="range")
        for n, core in enumerate(model.cores[1:], start=1):
            share = np.linalg.norm(core[:, 0, :]) ** 2 / np.linalg.norm(core) ** 2
            assert share >= 0.99, f"core {n} spreads the spike: slice 0 holds {share:.3f}"

    def test_matrix_matches_truncated_svd(self):
        """A two-core train with ranks (R, 1) reaches the truncated SVD error."""
        rng = np.random.default_rng(18)
        M = rng.standard_normal((8, 2)) @ rng.standard_normal((2, 6))
        M += 0.05 * rng.standard_normal(M.shape)
        s = np.linalg.svd(M, compute_uv=False)
        optimal = np.linalg.norm(s[2:]) / np.linalg.norm(s)
        fit = tr_als(DenseTensor(M), 2, iterations=100, tolerance=0.0, seed=2, tt=True)
        assert fit.model.ranks == (2, 1), f"unexpected ranks {fit.model.ranks}"
        assert fit.diagnostics.final_error == pytest.approx(optimal, abs=1e-6), (
            "TR-ALS on a matrix must match the best rank-2 approximation"
        )

    def test_invalid(self):
        """Bad iterations or init are configuration errors."""
        X = random_tr((3, 3, 3), (1, 1, 1)).to_tensor()
        with pytest.raises(ConfigError):
            tr_als(X, 1, iterations=0)
        with pytest.raises(ConfigError):
            initial_tr_model(X, 1, 0, init="svd")


class TestTrAlsEs:
    """Test TR-ALS with sketched leverage-score sampling."""

    def test_defaults(self):
        """Ring defaults use J1=10^4 and J2=10^3."""
        config = TrEsConfig()
        assert (config.j1, config.j2) == (10_000, 1_000), "wrong TR sampling defaults"

    def test_exhaustive_matches_exact(self):
        """Using every row once gives the exact ALS trajectory."""
        X = noisy(random_tr((3, 4, 3), (2, 2, 2), seed=12).to_tensor(), 0.05)
        exact = tr_als(X, 2, iterations=3, seed=2, tolerance=0.0)
        config = TrEsConfig(exhaustive=True, max_iterations=3, seed=2, tolerance=0.0)
        sampled = tr_als_es(X, 2, config)
        np.testing.assert_allclose(sampled.diagnostics.errors, exact.diagnostics.errors, atol=1e-9)

    @pytest.mark.slow
    def test_sampled_tracks_exact(self):
        """With generous J2 the sampled fit ends close to the exact fit."""
        X = noisy(random_tr((5, 5, 5, 5), (2, 2, 2, 2), seed=13).to_tensor(), 0.01)
        exact = tr_als(X, 2, iterations=8, seed=4)
        config = TrEsConfig(j1=512, j2=400, max_iterations=8, seed=4)
        sampled = tr_als_es(X, 2, config)
        assert sampled.diagnostics.final_error < exact.diagnostics.final_error + 0.05, (
            f"sampled {sampled.diagnostics.final_error} vs exact {exact.diagnostics.final_error}"
        )
        assert len(sampled.diagnostics.normalization_constants) == 4 * sampled.diagnostics.iterations

    def test_tensor_train_sampling(self):
        """The sampled driver supports tensor trains."""
        X = random_tr((3, 3, 3, 3), (2, 2, 2, 1), seed=14).to_tensor()
        fit = tr_als_es(X, 2, TrEsConfig(j1=256, j2=60, max_iterations=3), tt=True)
        assert fit.model.is_train, "model must be a tensor train"
        assert np.isfinite(fit.diagnostics.final_error), "fit must produce a finite error"

    def test_reproducible(self):
        """The same seed gives bit-identical cores."""
        X = random_tr((3, 3, 3), (2, 2, 2), seed=15).to_tensor()
        config = TrEsConfig(j1=64, j2=30, max_iterations=2, seed=7)
        first, second = tr_als_es(X, 2, config), tr_als_es(X, 2, config)
        for a, b in zip(first.model.cores, second.model.cores):
            np.testing.assert_array_equal(a, b)


class TestProjectTrSamples:
    """Test feature extraction for new samples."""

    def test_exhaustive_projection_is_exact(self):
        """New slices built from the frozen cores project to their own core slices."""
        model = random_tr((5, 5, 4), (2, 2, 2), seed=16)
        new_core = np.random.default_rng(17).standard_normal((2, 6, 2))
        X_new = model.with_core(2, new_core).to_tensor()
        features = project_tr_samples(model, X_new, 2, TrEsConfig(exhaustive=True))
        assert features.shape == (6, 4), f"unexpected shape {features.shape}"
        np.testing.assert_allclose(features, core_mode2_classical(new_core), atol=1e-9)

    def test_sampled_projection_is_exact(self):
        """A consistent system is solved exactly from sampled rows."""
        model = random_tr((5, 5, 4), (2, 2, 2), seed=18)
        new_core = np.random.default_rng(19).standard_normal((2, 3, 2))
        X_new = model.with_core(2, new_core).to_tensor()
        features = project_tr_samples(model, X_new, -1, TrEsConfig(j1=128, j2=60))
        np.testing.assert_allclose(features, core_mode2_classical(new_core), atol=1e-8)

    def test_dims_mismatch(self):
        """New samples must share the frozen modes."""
        model = random_tr((5, 5, 4), (2, 2, 2))
        with pytest.raises(ShapeError):
            project_tr_samples(model, DenseTensor(np.ones((4, 5, 4))), 2)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
