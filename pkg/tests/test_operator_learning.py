import numpy as np
import pytest

from instances import random_instance, smoothing_instance
from oracles import singular_values
from projreg import (
    LearnedOperator,
    RankZeroError,
    TruncationTooLargeError,
    assemble,
    collinearity_report,
    hs_deviation_bound_check,
    learn_centered,
    learn_uncentered,
    noise_inject,
    phi,
    pinv,
    sample_stats,
    spectral_norm,
    thin_svd,
)
from projreg.linalg import hs_norm, orthonormal_complement
from projreg.problems import example_images


class TestLearnUncentered:
    @pytest.mark.parametrize("seed", range(5))
    def test_exact_data_gives_restriction_of_K(self, seed):
        problem, ts = smoothing_instance(seed, n=8)
        learned = learn_uncentered(ts)
        U = learned.svd_of_images.left
        err = spectral_norm(learned.kn - problem.K @ U @ U.T)
        assert err <= 1e-9 * spectral_norm(problem.K)

    def test_rank_one(self):
        learned = learn_uncentered(assemble([[1.0, 0.0]], [[2.0, 0.0]]))
        np.testing.assert_allclose(learned.apply(np.array([1.0, 0.0])), [2.0, 0.0])
        np.testing.assert_allclose(learned.apply(np.array([0.0, 3.0])), [0.0, 0.0])

    @pytest.mark.parametrize("seed", range(3))
    def test_equals_data_times_pinv_of_images(self, seed):
        _, ts = random_instance(seed, delta=0.1)
        learned = learn_uncentered(ts)
        ref = ts.Y @ pinv(ts.X)
        assert spectral_norm(learned.kn - ref) <= 1e-9 * spectral_norm(ref)

    def test_minimizes_phi(self):
        _, ts = random_instance(7, m=10, q=6, n=8, delta=0.2)
        learned = learn_uncentered(ts)
        svd = learned.svd_of_images
        best = phi(learned.zn, ts, svd)
        rng = np.random.default_rng(0)
        for _ in range(100):
            Z = learned.zn + rng.standard_normal(learned.zn.shape) * rng.uniform(1e-6, 1.0)
            assert best <= phi(Z, ts, svd)
        complement = orthonormal_complement(svd.right)
        assert best**2 == pytest.approx(hs_norm(ts.Y @ complement) ** 2, rel=1e-9)

    def test_truncation_monotone(self):
        _, ts = random_instance(8, m=10, q=6, n=8, delta=0.2)
        values = []
        for r in range(1, thin_svd(ts.X).rank + 1):
            learned = learn_uncentered(ts, truncation_rank=r)
            values.append(phi(learned.zn, ts, learned.svd_of_images))
        assert all(b <= a * (1 + 1e-12) for a, b in zip(values, values[1:]))

    def test_errors(self):
        with pytest.raises(RankZeroError):
            learn_uncentered(assemble(np.zeros((2, 3)), np.ones((2, 2))))
        _, ts = random_instance(0, n=4)
        with pytest.raises(TruncationTooLargeError):
            learn_uncentered(ts, truncation_rank=5)

    def test_round_trip(self, tmp_path):
        _, ts = random_instance(1)
        learned = learn_uncentered(ts, truncation_rank=3)
        learned.save(tmp_path / "op")
        back = LearnedOperator.load(tmp_path / "op")
        assert back.kind == "uncentered" and back.truncation_rank == 3
        assert back.kn.tobytes() == learned.kn.tobytes()


class TestLearnCentered:
    def test_ln_equals_zn_lambda(self):
        _, ts = random_instance(2, delta=0.05)
        model = sample_stats(ts)
        learned = learn_centered(model, ts)
        np.testing.assert_allclose(learned.ln, learned.zn * model.lambdas, atol=1e-10)
        np.testing.assert_allclose(
            learned.ln, learned.kn @ model.basis * model.lambdas, atol=1e-10
        )

    def test_agrees_with_uncentered_for_zero_mean_exact_data(self):
        problem, ts = random_instance(3, n=5, delta=0.0, zero_mean=True)
        model = sample_stats(ts)
        centered = learn_centered(model, ts)
        uncentered = learn_uncentered(ts)
        B = model.basis
        np.testing.assert_allclose(centered.kn @ B, uncentered.kn @ B, atol=1e-9)

    def test_constant_data_gives_zero_ln(self):
        rng = np.random.default_rng(4)
        ts = assemble(rng.standard_normal((4, 5)), np.tile([1.0, 2.0], (4, 1)))
        learned = learn_centered(sample_stats(ts), ts)
        np.testing.assert_allclose(learned.ln, 0.0, atol=1e-15)

    def test_example_two_with_identity(self):
        images = example_images(2)
        ts = assemble(images, images, 0.0)
        model = sample_stats(ts)
        learned = learn_centered(model, ts)
        expected = (images - images.mean(axis=0)).T @ model.xi
        np.testing.assert_allclose(learned.ln, expected, atol=1e-14)

    def test_rank_zero(self):
        ts = assemble(np.ones((3, 2)), np.ones((3, 2)))
        with pytest.raises(RankZeroError):
            learn_centered(sample_stats(ts), ts)

    def test_round_trip_keeps_model(self, tmp_path):
        _, ts = random_instance(5)
        model = sample_stats(ts)
        learn_centered(model, ts).save(tmp_path / "c")
        back = LearnedOperator.load(tmp_path / "c")
        again = back.centered_model()
        assert again.p_prime == model.p_prime
        np.testing.assert_array_equal(again.lambdas, model.lambdas)
        np.testing.assert_array_equal(back.ln, learn_centered(model, ts).ln)


class TestDeviationBound:
    def test_exact_data(self):
        problem, ts = smoothing_instance(1, n=6)
        report = hs_deviation_bound_check(ts, learn_uncentered(ts), problem.K)
        assert report.rhs == 0.0
        assert report.lhs <= 1e-12 * spectral_norm(problem.K)
        assert report.holds

    def test_noisy(self):
        problem, ts = random_instance(11, m=20, q=20, n=10, delta=1e-2)
        report = hs_deviation_bound_check(ts, learn_uncentered(ts), problem.K)
        assert report.rhs == pytest.approx(2 * np.sqrt(10) * 1e-2, rel=1e-15)
        # direct evaluation of the left-hand side
        learned = learn_uncentered(ts)
        U, lam = learned.svd_of_images.left, learned.svd_of_images.singulars
        lhs = hs_norm((learned.kn - problem.K) @ U * lam)
        assert report.lhs == pytest.approx(lhs, rel=1e-10)
        assert report.holds and report.per_vector_holds
        for k, entry in enumerate(report.per_vector):
            direct = np.linalg.norm((learned.kn - problem.K) @ U[:, k])
            assert entry["lhs"] == pytest.approx(direct, rel=1e-9)
            assert entry["rhs"] == pytest.approx(2 * np.sqrt(10) * 1e-2 / lam[k])


class TestCollinearity:
    def test_orthonormal_images(self):
        ts = assemble(np.eye(3), np.eye(3), 0.1)
        assert collinearity_report(ts).condition_number == pytest.approx(1.0)

    def test_nearly_dependent_pair(self):
        ts = assemble([[1.0, 0.0], [1.0, 1e-6]], np.eye(2), 1e-3)
        report = collinearity_report(ts)
        # sigma_1 sigma_2 = |det X|; the eigen-oracle resolves sigma_1 accurately
        sigma_1 = singular_values(ts.X)[0]
        sigma_2 = abs(np.linalg.det(ts.X)) / sigma_1
        assert report.smallest_sigma == pytest.approx(sigma_2, rel=1e-9)
        assert report.smallest_sigma == pytest.approx(7.07e-7, rel=1e-3)
        assert report.amplification == pytest.approx(2 * np.sqrt(2) * 1e-3 / sigma_2, rel=1e-9)

    def test_example_one(self):
        images = example_images(1)
        report = collinearity_report(assemble(images, images))
        # smaller nonzero singular value of [e1, e2, 5e2 - 4e1]; X X* has eigenvalues 42 and 1
        assert report.smallest_sigma == pytest.approx(1.0, rel=1e-12)
        assert report.largest_sigma == pytest.approx(np.sqrt(42), rel=1e-12)
