"""Finite-rank surrogates of the forward operator learned from training pairs.

Two constructions are provided. :func:`learn_uncentered` fits
``K_n = Y_n Ξ Λ^{-1} U_n*`` from the SVD of the raw image matrix, which is
the minimizer of ``||Y_n - Z Λ Ξ*||_HS`` over ``Z``. :func:`learn_centered`
does the same on mean-subtracted pairs and also keeps ``L_n = Z_n Λ``, which
never divides by the singular values of the images.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from ._validation import as_dense_map
from .exceptions import DimensionMismatchError, RankZeroError, TruncationTooLargeError
from .linalg import DEFAULT_REL_TOL, ThinSVD, hs_norm, spectral_norm, thin_svd
from .training import CenteredModel

UNCENTERED = "uncentered"
CENTERED = "centered"

# Above this size K_n is only applied in factored form and not written to disk.
MATERIALIZE_LIMIT = 2000


@dataclass(frozen=True)
class LearnedOperator:
    """A learned map ``K_n = zn @ svd_of_images.left.T``.

    For the centered kind ``K_n`` acts on displacements from ``x_mean`` and
    returns displacements from ``y_mean``; for the uncentered kind both means
    are zero.
    """

    kind: str
    zn: np.ndarray
    svd_of_images: ThinSVD
    x_mean: np.ndarray
    y_mean: np.ndarray
    ln: np.ndarray = None
    truncation_rank: int = None
    rel_tol: float = DEFAULT_REL_TOL

    @property
    def rank(self):
        return self.svd_of_images.rank

    @property
    def n(self):
        return self.svd_of_images.right.shape[0]

    @property
    def m(self):
        return self.svd_of_images.left.shape[0]

    @property
    def q(self):
        return self.zn.shape[0]

    @property
    def kn(self):
        return self.zn @ self.svd_of_images.left.T

    def apply(self, x):
        """``K_n x`` without materializing ``K_n``."""
        return self.zn @ (self.svd_of_images.left.T @ x)

    def predict(self, x):
        """Affine surrogate ``y_mean + K_n (x - x_mean)``."""
        return self.y_mean + self.apply(x - self.x_mean)

    def centered_model(self):
        if self.kind != CENTERED:
            raise ValueError("only a centered operator carries a CenteredModel")
        svd = self.svd_of_images
        return CenteredModel(
            self.x_mean, self.y_mean, svd.left, svd.singulars, svd.right, self.rel_tol
        )

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        svd = self.svd_of_images
        io.write_dense_map(directory / "basis.csv", svd.left)
        io.write_dense_map(directory / "singulars.csv", svd.singulars)
        io.write_dense_map(directory / "xi.csv", svd.right)
        io.write_dense_map(directory / "zn.csv", self.zn)
        io.write_dense_map(directory / "x_mean.csv", self.x_mean)
        io.write_dense_map(directory / "y_mean.csv", self.y_mean)
        if self.ln is not None:
            io.write_dense_map(directory / "ln.csv", self.ln)
        materialized = max(self.m, self.q) <= MATERIALIZE_LIMIT
        if materialized:
            io.write_dense_map(directory / "kn.csv", self.kn)
        io.write_meta(
            directory / "meta",
            {
                "kind": self.kind,
                "n": self.n,
                "m": self.m,
                "q": self.q,
                "rank": self.rank,
                "rel_tol": self.rel_tol,
                "truncation_rank": self.truncation_rank,
                "materialized": materialized,
            },
        )

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        meta = io.read_meta(directory / "meta")
        trunc = meta.get("truncation_rank", "none")
        rel_tol = float(meta["rel_tol"])
        svd = ThinSVD(
            io.read_dense_map(directory / "basis.csv"),
            io.read_dense_map(directory / "singulars.csv").ravel(),
            io.read_dense_map(directory / "xi.csv"),
            rel_tol,
        )
        ln_path = directory / "ln.csv"
        return cls(
            kind=meta["kind"],
            zn=io.read_dense_map(directory / "zn.csv"),
            svd_of_images=svd,
            x_mean=io.read_vector(directory / "x_mean.csv"),
            y_mean=io.read_vector(directory / "y_mean.csv"),
            ln=io.read_dense_map(ln_path) if ln_path.exists() else None,
            truncation_rank=None if trunc == "none" else int(trunc),
            rel_tol=rel_tol,
        )


def learn_uncentered(ts, rel_tol=DEFAULT_REL_TOL, truncation_rank=None):
    """Fit ``K_n = Y_n Ξ Λ^{-1} U_n*`` from the raw images.

    With ``truncation_rank`` only that many leading singular triplets of
    ``X_n`` are used, which caps the amplification of data noise.
    """
    svd = thin_svd(ts.X, rel_tol)
    if svd.rank == 0:
        raise RankZeroError("all training images are zero")
    if truncation_rank is not None:
        if truncation_rank < 1 or truncation_rank > svd.rank:
            raise TruncationTooLargeError(
                f"truncation_rank={truncation_rank} outside 1..{svd.rank}"
            )
        svd = svd.truncate(truncation_rank)
    zn = (ts.Y @ svd.right) / svd.singulars
    return LearnedOperator(
        kind=UNCENTERED,
        zn=zn,
        svd_of_images=svd,
        x_mean=np.zeros(ts.m),
        y_mean=np.zeros(ts.q),
        truncation_rank=truncation_rank,
        rel_tol=float(rel_tol),
    )


def learn_centered(model, ts):
    """Fit the centered surrogate; ``L_n = [y_k - y°_n] Ξ`` and ``Z_n = L_n Λ^{-1}``."""
    if model.p_prime == 0:
        raise RankZeroError("the centered images are all zero (p' = 0)")
    if model.n != ts.n:
        raise DimensionMismatchError("model was fitted on a different training set")
    ln = (ts.Y - model.y_mean[:, None]) @ model.xi
    svd = ThinSVD(model.basis, model.lambdas, model.xi, model.rel_tol)
    return LearnedOperator(
        kind=CENTERED,
        zn=ln / model.lambdas,
        svd_of_images=svd,
        x_mean=model.x_mean,
        y_mean=model.y_mean,
        ln=ln,
        rel_tol=model.rel_tol,
    )


def phi(Z, ts, svd):
    """Data misfit ``||Y_n - Z Λ Ξ*||_HS`` of a candidate coefficient map."""
    Z = as_dense_map(Z, "Z")
    return hs_norm(ts.Y - (Z * svd.singulars) @ svd.right.T)


@dataclass(frozen=True)
class DeviationReport:
    lhs: float
    rhs: float
    holds: bool
    per_vector: list = field(default_factory=list)
    full_deviation: float = float("nan")

    @property
    def per_vector_holds(self):
        return all(v["holds"] for v in self.per_vector)


def hs_deviation_bound_check(ts, learned, K_true):
    """Check ``||(K_n - K) U_n Λ||_HS <= 2 sqrt(n) δ`` and its per-vector form.

    ``full_deviation`` is the spectral norm of ``K_n - K`` on the whole space,
    reported for context only; no bound is claimed for it.
    """
    K_true = as_dense_map(K_true, "K_true")
    if K_true.shape != (learned.q, learned.m):
        raise DimensionMismatchError(
            f"K_true has shape {K_true.shape}, expected {(learned.q, learned.m)}"
        )
    svd = learned.svd_of_images
    diff_on_basis = learned.zn - K_true @ svd.left
    lhs = hs_norm(diff_on_basis * svd.singulars)
    rhs = 2.0 * np.sqrt(ts.n) * ts.delta
    per_vector = []
    for k, sigma in enumerate(svd.singulars):
        err = float(np.linalg.norm(diff_on_basis[:, k]))
        bound = rhs / sigma
        per_vector.append(
            {"sigma": float(sigma), "lhs": err, "rhs": bound,
             "holds": err <= bound + 1e-9 * bound + 1e-12}
        )
    return DeviationReport(
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs + 1e-9 * rhs + 1e-12,
        per_vector=per_vector,
        full_deviation=spectral_norm(learned.kn - K_true),
    )


@dataclass(frozen=True)
class CollinearityReport:
    condition_number: float
    smallest_sigma: float
    largest_sigma: float
    amplification: float


def collinearity_report(ts, rel_tol=DEFAULT_REL_TOL):
    """How strongly near-dependent images amplify data noise in ``K_n``."""
    svd = thin_svd(ts.X, rel_tol)
    if svd.rank == 0:
        raise RankZeroError("all training images are zero")
    smallest = float(svd.singulars[-1])
    largest = float(svd.singulars[0])
    return CollinearityReport(
        condition_number=largest / smallest,
        smallest_sigma=smallest,
        largest_sigma=largest,
        amplification=2.0 * np.sqrt(ts.n) * ts.delta / smallest,
    )

