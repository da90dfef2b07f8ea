"""Training pairs, sample statistics and the centered image factorization.

Images are stored row-wise, ``images[k]`` being ``x_k``; the column-matrix
view ``X_n = [x_1, ..., x_n]`` is available as :attr:`TrainingSet.X`.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from ._validation import as_rows, as_vector
from .exceptions import DimensionMismatchError, EmptySetError, ValidationError
from .linalg import DEFAULT_REL_TOL, thin_svd

# Relative size of the off-span component above which the E_n-norm is infinite.
SPAN_TOL = 1e-9


@dataclass(frozen=True)
class TrainingSet:
    images: np.ndarray
    data: np.ndarray
    delta: float = 0.0

    @property
    def n(self):
        return self.images.shape[0]

    @property
    def m(self):
        return self.images.shape[1]

    @property
    def q(self):
        return self.data.shape[1]

    @property
    def X(self):
        return self.images.T

    @property
    def Y(self):
        return self.data.T

    def head(self, n):
        """The first ``n`` pairs, with the same noise level."""
        if not 1 <= n <= self.n:
            raise ValidationError(f"cannot take {n} of {self.n} pairs")
        return TrainingSet(self.images[:n], self.data[:n], self.delta)

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        io.write_dense_map(directory / "images.csv", self.X)
        io.write_dense_map(directory / "data.csv", self.Y)
        io.write_meta(
            directory / "meta",
            {"n": self.n, "m": self.m, "q": self.q, "delta": float(self.delta)},
        )

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        meta = io.read_meta(directory / "meta")
        ts = assemble(
            io.read_dense_map(directory / "images.csv").T,
            io.read_dense_map(directory / "data.csv").T,
            float(meta.get("delta", 0.0)),
        )
        for key in ("n", "m", "q"):
            if key in meta and int(meta[key]) != getattr(ts, key):
                raise DimensionMismatchError(
                    f"{directory}: meta {key}={meta[key]} disagrees with the CSV files"
                )
        return ts


def assemble(images, data, delta=0.0):
    """Validate and bundle training pairs ``(x_k, y_k)``.

    ``delta`` is recorded as metadata only; the forward operator is unknown
    here so the noise bound cannot be checked.
    """
    try:
        images = as_rows(images, "images")
        data = as_rows(data, "data")
    except EmptySetError:
        raise EmptySetError("a training set needs at least one pair") from None
    if images.shape[0] != data.shape[0]:
        raise DimensionMismatchError(
            f"{images.shape[0]} images but {data.shape[0]} data vectors"
        )
    delta = float(delta)
    if not np.isfinite(delta) or delta < 0:
        raise ValidationError(f"delta must be a nonnegative real, got {delta!r}")
    return TrainingSet(images.copy(), data.copy(), delta)


@dataclass(frozen=True)
class CenteredModel:
    """Sample mean and the SVD ``X_n - X°_n = U Λ Ξ*`` of the centered images."""

    x_mean: np.ndarray
    y_mean: np.ndarray
    basis: np.ndarray
    lambdas: np.ndarray
    xi: np.ndarray
    rel_tol: float = DEFAULT_REL_TOL

    @property
    def n(self):
        return self.xi.shape[0]

    @property
    def p_prime(self):
        return self.lambdas.shape[0]

    @property
    def covariance_eigenvalues(self):
        """Nonzero spectrum of the sample covariance, ``lambdas**2 / n``."""
        return self.lambdas**2 / self.n

    def whiten(self, u):
        """Isometry ``J u = sqrt(n) Λ^{-1} U* u`` from E_n onto R^{p'}."""
        return np.sqrt(self.n) * (self.basis.T @ u) / self.lambdas

    def unwhiten(self, xi):
        return self.basis @ (self.lambdas * xi) / np.sqrt(self.n)

    def projector(self):
        """Orthogonal projector onto E_n = span(basis)."""
        return self.basis @ self.basis.T


def center_images(X, rel_tol=DEFAULT_REL_TOL):
    """Sample mean of the columns of ``X`` and the SVD of the centered matrix."""
    x_mean = X.mean(axis=1)
    return x_mean, thin_svd(X - x_mean[:, None], rel_tol)


def sample_stats(ts, rel_tol=DEFAULT_REL_TOL):
    x_mean, svd = center_images(ts.X, rel_tol)
    y_mean = ts.Y.mean(axis=1)
    return CenteredModel(
        x_mean=x_mean,
        y_mean=y_mean,
        basis=svd.left,
        lambdas=svd.singulars,
        xi=svd.right,
        rel_tol=float(rel_tol),
    )


@dataclass(frozen=True)
class RankBoundsReport:
    p: int
    p_prime: int
    n: int
    holds: bool


def rank_bounds_check(ts, rel_tol=DEFAULT_REL_TOL):
    """Compare ``p = dim span{x_k}`` with ``p' = rank Γ_n``.

    ``holds`` requires ``p - 1 <= p' <= min(p, n - 1)`` and, when ``p = n``,
    also ``p' = n - 1``.
    """
    p = thin_svd(ts.X, rel_tol).rank
    p_prime = sample_stats(ts, rel_tol).p_prime
    n = ts.n
    holds = p - 1 <= p_prime <= min(p, n - 1)
    if p == n:
        holds = holds and p_prime == n - 1
    return RankBoundsReport(p=p, p_prime=p_prime, n=n, holds=bool(holds))


def en_norm(model, u):
    """Cameron-Martin norm of ``u``; ``inf`` when ``u`` leaves E_n.

    ``u`` is a displacement from the sample mean, not a point of X.
    """
    u = as_vector(u, model.basis.shape[0], "u")
    size = np.linalg.norm(u)
    if size == 0:
        return 0.0
    coeffs = model.basis.T @ u
    off_span = np.linalg.norm(u - model.basis @ coeffs)
    if off_span > SPAN_TOL * size:
        return float("inf")
    return float(np.sqrt(model.n) * np.linalg.norm(coeffs / model.lambdas))
