import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import jacobi_eigh, sample_covariance
from projreg import (
    DimensionMismatchError,
    EmptySetError,
    NonFiniteError,
    TrainingSet,
    assemble,
    en_norm,
    rank_bounds_check,
    sample_stats,
)
from projreg.problems import example_images

E = np.eye(3)


class TestAssemble:
    def test_singleton(self):
        ts = assemble([E[0]], [E[0]], 0.0)
        assert (ts.n, ts.m, ts.q) == (1, 3, 3)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            assemble([E[0], [1.0, 0.0]], [E[0], E[1]])
        with pytest.raises(DimensionMismatchError):
            assemble([E[0], E[1]], [E[0]])

    def test_empty(self):
        with pytest.raises(EmptySetError):
            assemble([], [])

    def test_non_finite(self):
        with pytest.raises(NonFiniteError):
            assemble([[np.nan, 0.0]], [[1.0]])

    def test_negative_delta(self):
        with pytest.raises(ValueError):
            assemble([E[0]], [E[0]], -1.0)

    def test_example_one(self):
        ts = assemble(example_images(1), np.ones((3, 2)))
        assert ts.n == 3 and ts.m == 3

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        ts = assemble(rng.standard_normal((4, 3)), rng.standard_normal((4, 2)), 0.125)
        ts.save(tmp_path / "ts")
        back = TrainingSet.load(tmp_path / "ts")
        assert back.images.tobytes() == ts.images.tobytes()
        assert back.data.tobytes() == ts.data.tobytes()
        assert back.delta == ts.delta
        meta = (tmp_path / "ts" / "meta").read_text()
        assert "n=4\nm=3\nq=2\ndelta=0.125\n" == meta


class TestSampleStats:
    def test_example_one(self):
        model = sample_stats(assemble(example_images(1), example_images(1)))
        np.testing.assert_allclose(model.x_mean, [-1.0, 2.0, 0.0], atol=1e-15)
        assert model.p_prime == 1
        # oracle: 28/3, the only nonzero eigenvalue of the entrywise covariance
        evals, _ = jacobi_eigh(sample_covariance(example_images(1)))
        assert evals[0] == pytest.approx(28 / 3, rel=1e-12)
        assert model.covariance_eigenvalues[0] == pytest.approx(28 / 3, rel=1e-9)

    def test_example_two(self):
        model = sample_stats(assemble(example_images(2), example_images(2)))
        np.testing.assert_allclose(model.x_mean, [1.0, 1.0, 0.0], atol=1e-15)
        assert model.p_prime == 2

    def test_identical_images(self):
        model = sample_stats(assemble(np.ones((4, 3)), np.ones((4, 2))))
        assert model.p_prime == 0
        assert model.basis.shape == (3, 0)

    def test_spectrum_and_ones_orthogonality(self):
        rng = np.random.default_rng(1)
        images = rng.standard_normal((6, 9))
        model = sample_stats(assemble(images, rng.standard_normal((6, 2))))
        evals, _ = jacobi_eigh(sample_covariance(images))
        np.testing.assert_allclose(
            model.covariance_eigenvalues, evals[: model.p_prime], rtol=1e-9
        )
        np.testing.assert_allclose(model.xi.T @ np.ones(6), 0.0, atol=1e-10)
        assert model.p_prime == 5

    def test_zero_mean_images_keep_rank(self):
        rng = np.random.default_rng(2)
        images = rng.standard_normal((5, 3)) @ rng.standard_normal((3, 8))
        images -= images.mean(axis=0)
        ts = assemble(images, images)
        bounds = rank_bounds_check(ts)
        assert bounds.p == bounds.p_prime == 3
        raw = np.linalg.svd(images.T, full_matrices=False)[0][:, :3]
        basis = sample_stats(ts).basis
        np.testing.assert_allclose(raw @ raw.T, basis @ basis.T, atol=1e-10)


class TestRankBounds:
    def test_example_one(self):
        r = rank_bounds_check(assemble(example_images(1), example_images(1)))
        assert (r.p, r.p_prime, r.holds) == (2, 1, True)

    def test_example_two(self):
        r = rank_bounds_check(assemble(example_images(2), example_images(2)))
        assert (r.p, r.p_prime, r.holds) == (2, 2, True)

    def test_full_rank_forces_n_minus_one(self):
        r = rank_bounds_check(assemble(np.eye(3), np.eye(3)))
        assert (r.p, r.p_prime, r.holds) == (3, 2, True)
        evals, _ = jacobi_eigh(sample_covariance(np.eye(3)))
        assert np.sum(evals > 1e-12) == 2

    @settings(max_examples=80, deadline=None)
    @given(
        n=st.integers(1, 7),
        m=st.integers(1, 7),
        rank=st.integers(0, 7),
        shift=st.sampled_from([0.0, 1.0, 3.0]),
        seed=st.integers(0, 2**16),
    )
    def test_bounds_property(self, n, m, rank, shift, seed):
        rng = np.random.default_rng(seed)
        r = min(rank, m)
        images = rng.standard_normal((n, r)) @ rng.standard_normal((r, m)) + shift * rng.standard_normal(m)
        r = rank_bounds_check(assemble(images, np.zeros((n, 1))))
        assert r.holds
        centered = images - images.mean(axis=0)
        np.testing.assert_allclose(centered.sum(axis=0), 0.0, atol=1e-12)


class TestEnNorm:
    def setup_method(self):
        rng = np.random.default_rng(4)
        images = rng.standard_normal((4, 6))
        self.images = images
        self.model = sample_stats(assemble(images, np.zeros((4, 1))))

    def test_zero(self):
        assert en_norm(self.model, np.zeros(6)) == 0.0

    def test_off_span_is_infinite(self):
        basis = self.model.basis
        u = np.random.default_rng(5).standard_normal(6)
        u -= basis @ (basis.T @ u)
        assert en_norm(self.model, u) == float("inf")

    def test_scaled_basis_column_against_covariance_solve(self):
        model = self.model
        lam1 = model.covariance_eigenvalues[0]
        scale = 2.5
        u = scale * lam1 * model.basis[:, 0]
        expected = np.sqrt(scale**2 * lam1)  # = sqrt(n / lambda_1) * scale * lambda_1 / sqrt(n)
        # oracle: solve Gamma w = u on span(basis) with the dense covariance
        G = sample_covariance(self.images)
        B = model.basis
        w = B @ np.linalg.solve(B.T @ G @ B, B.T @ u)
        assert en_norm(model, u) == pytest.approx(np.sqrt(u @ w), rel=1e-9)
        assert en_norm(model, u) == pytest.approx(expected, rel=1e-9)

    def test_isometry(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            u = self.model.basis @ rng.standard_normal(self.model.p_prime)
            assert en_norm(self.model, u) == pytest.approx(
                np.linalg.norm(self.model.whiten(u)), rel=1e-9
            )
            np.testing.assert_allclose(self.model.unwhiten(self.model.whiten(u)), u, atol=1e-12)
