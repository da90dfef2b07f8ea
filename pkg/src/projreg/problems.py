"""Synthetic problems with a known forward operator and ground truth."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .exceptions import BadDimensionsError, ValidationError
from .linalg import thin_svd


@dataclass(frozen=True)
class SyntheticProblem:
    K: np.ndarray
    prior_mean: np.ndarray
    prior_factor: np.ndarray
    x_dagger: np.ndarray
    kernel_width: float = float("nan")
    seed: int = 0

    @property
    def m(self):
        return self.K.shape[1]

    @property
    def q(self):
        return self.K.shape[0]

    @property
    def prior_covariance(self):
        return self.prior_factor @ self.prior_factor.T

    def condition_number(self):
        s = thin_svd(self.K, 0.0).singulars
        return float(s[0] / s[-1]) if s.size and s[-1] > 0 else float("inf")

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        io.write_dense_map(directory / "K.csv", self.K)
        io.write_dense_map(directory / "xdagger.csv", self.x_dagger)
        io.write_dense_map(directory / "prior_factor.csv", self.prior_factor)
        io.write_dense_map(directory / "prior_mean.csv", self.prior_mean)
        io.write_meta(
            directory / "meta",
            {"m": self.m, "q": self.q, "kernel_width": float(self.kernel_width),
             "seed": self.seed},
        )

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        meta = io.read_meta(directory / "meta")
        return cls(
            K=io.read_dense_map(directory / "K.csv"),
            prior_mean=io.read_vector(directory / "prior_mean.csv"),
            prior_factor=io.read_dense_map(directory / "prior_factor.csv"),
            x_dagger=io.read_vector(directory / "xdagger.csv"),
            kernel_width=float(meta.get("kernel_width", "nan")),
            seed=int(meta.get("seed", 0)),
        )


def _grid(size):
    return (np.arange(size) + 0.5) / size


def smooth_kink_profile(t):
    """Gaussian bump plus a tent function with kinks at 0.55, 0.7 and 0.85."""
    bump = np.exp(-((t - 0.3) ** 2) / 0.02)
    tent = 0.5 * np.maximum(0.0, 1.0 - np.abs(t - 0.7) / 0.15)
    return bump + tent


def matern_factor(t, length=0.2, scale=1.0):
    """Square-root factor ``F`` of a Matérn-3/2 covariance on grid ``t``."""
    r = np.abs(t[:, None] - t[None, :]) * np.sqrt(3.0) / length
    cov = scale**2 * (1.0 + r) * np.exp(-r)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    keep = evals > 1e-12 * evals[0]
    return evecs[:, keep] * np.sqrt(evals[keep])


def make_smoothing_problem(m, q, kernel_width, seed=0, prior_length=0.2, prior_scale=1.0):
    """Row-normalized Gaussian blur from an ``m``-point grid to a ``q``-point grid.

    Wider kernels give faster singular-value decay. The prior mean is a
    random low-frequency sine series drawn from ``seed``; the ground truth is
    the fixed :func:`smooth_kink_profile`.
    """
    if m < 2 or q < 2:
        raise BadDimensionsError(f"need m, q >= 2, got m={m}, q={q}")
    if not kernel_width > 0:
        raise ValidationError("kernel_width must be positive")
    t = _grid(m)
    s = _grid(q)
    K = np.exp(-((s[:, None] - t[None, :]) ** 2) / (2.0 * kernel_width**2))
    row_sums = K.sum(axis=1)
    empty = row_sums == 0
    if np.any(empty):
        # kernel narrower than the grid spacing underflows; fall back to nearest node
        nearest = np.argmin(np.abs(s[empty, None] - t[None, :]), axis=1)
        K[np.flatnonzero(empty), nearest] = 1.0
        row_sums = K.sum(axis=1)
    K /= row_sums[:, None]

    rng = np.random.default_rng(seed)
    freqs = np.arange(1, 4)
    amps = rng.normal(0.0, 0.5, size=freqs.size) / freqs
    prior_mean = np.sin(np.pi * np.outer(t, freqs)) @ amps
    return SyntheticProblem(
        K=K,
        prior_mean=prior_mean,
        prior_factor=matern_factor(t, prior_length, prior_scale),
        x_dagger=smooth_kink_profile(t),
        kernel_width=float(kernel_width),
        seed=int(seed),
    )


def sample_images(problem, n, seed):
    """``n`` prior draws ``x_k = x° + F g_k``, draw ``k`` seeded with ``seed + k``."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    F = problem.prior_factor
    rows = [
        problem.prior_mean + F @ np.random.default_rng(seed + k).standard_normal(F.shape[1])
        for k in range(n)
    ]
    return np.array(rows)


def make_collinear_images(m, n, epsilon):
    """Images ``e1, e1 + ε e2, ..., e1 + ε e_n``; the smallest singular value is Θ(ε)."""
    if n < 2 or m < n:
        raise BadDimensionsError(f"need 2 <= n <= m, got m={m}, n={n}")
    if not 0 < epsilon <= 1:
        raise BadDimensionsError(f"epsilon must lie in (0, 1], got {epsilon}")
    images = np.zeros((n, m))
    images[:, 0] = 1.0
    for k in range(1, n):
        images[k, k] = epsilon
    return images


def example_images(which):
    """The two three-point image sets in R^3 used to illustrate the rank bounds.

    Set 1 is ``e1, e2, 5 e2 - 4 e1`` (collinear after centering); set 2 is
    ``e1, e2, 2 (e1 + e2)``.
    """
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    if which == 1:
        return np.array([e1, e2, 5 * e2 - 4 * e1])
    if which == 2:
        return np.array([e1, e2, 2 * (e1 + e2)])
    raise ValidationError(f"no canned example {which!r}")
