"""Reconstruction by projection.

* :func:`method1` -- least-squares projection ``x = K_n^† y``.
* :func:`method3` -- minimal Cameron-Martin-norm solution
  ``x = x°_n + U_n Λ L_n^† (y - y°_n)``.
* :func:`map_estimate` -- the same with ``L_n^†`` replaced by the Tikhonov
  inverse ``(L_n* L_n + α I)^{-1} L_n*``.
* :func:`oracle_dls` -- dual least squares with the true operator; only usable
  on synthetic problems.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from ._validation import as_dense_map, as_vector, check_alpha
from .exceptions import DimensionMismatchError, RankZeroError, ValidationError
from .linalg import pinv, pinv_tikhonov, thin_svd
from .operator_learning import CENTERED, UNCENTERED
from .training import en_norm

SOLVER_REL_TOL = 1e-10

METHOD_I = "i"
METHOD_III = "iii"
METHOD_MAP = "map"
METHOD_ORACLE = "oracle-dls"


@dataclass
class Reconstruction:
    x_hat: np.ndarray
    method: str
    residual_norm: float
    diagnostics: dict = field(default_factory=dict)
    alpha: float = None

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        io.write_dense_map(directory / "x_hat.csv", self.x_hat)
        items = {"method": self.method, "residual_norm": float(self.residual_norm)}
        if self.alpha is not None:
            items["alpha"] = float(self.alpha)
        items.update(self.diagnostics)
        io.write_meta(directory / "diagnostics", items)


def _require_kind(learned, kind):
    if learned.kind != kind:
        raise ValidationError(f"expected a {kind} operator, got {learned.kind}")


def _check_consistent(model, learned):
    _require_kind(learned, CENTERED)
    if learned.ln is None or learned.ln.shape[1] != model.p_prime:
        raise DimensionMismatchError("model and learned operator do not match")
    if model.p_prime == 0:
        raise RankZeroError("p' = 0: the centered images are all zero")


def kn_pinv(learned, rel_tol=SOLVER_REL_TOL):
    """``K_n^†`` via the SVD of ``Z_n``; ``K_n = P S (U Q)*`` when ``Z_n = P S Q*``."""
    svd = thin_svd(learned.zn, rel_tol)
    if svd.rank == 0:
        raise RankZeroError("the learned operator is zero")
    return (learned.svd_of_images.left @ svd.right / svd.singulars) @ svd.left.T


def method1(learned, y, rel_tol=SOLVER_REL_TOL):
    """Least-squares projection: the minimal-norm least-squares solution of ``K_n x = y``."""
    _require_kind(learned, UNCENTERED)
    y = as_vector(y, learned.q, "y")
    svd = thin_svd(learned.zn, rel_tol)
    if svd.rank == 0:
        raise RankZeroError("the learned operator is zero")
    coeffs = svd.right @ ((svd.left.T @ y) / svd.singulars)
    x_hat = learned.svd_of_images.left @ coeffs
    residual = float(np.linalg.norm(learned.apply(x_hat) - y))
    return Reconstruction(
        x_hat=x_hat,
        method=METHOD_I,
        residual_norm=residual,
        diagnostics={
            "rank_kn": svd.rank,
            "mu_n": float(svd.singulars[-1]),
            "x_norm": float(np.linalg.norm(x_hat)),
        },
    )


def method3(model, learned, y, rel_tol=SOLVER_REL_TOL):
    """Minimal E_n-norm least-squares solution in the affine set ``x°_n + E_n``.

    The projection onto ``Y_n = span{y_k - y°_n}`` is not applied explicitly:
    ``range(L_n)`` lies inside ``Y_n`` so it does not change the minimizer.
    """
    _check_consistent(model, learned)
    w = as_vector(y, learned.q, "y") - model.y_mean
    ln_svd = thin_svd(learned.ln, rel_tol)
    coeffs = ln_svd.right @ ((ln_svd.left.T @ w) / ln_svd.singulars)
    x_hat = model.x_mean + model.basis @ (model.lambdas * coeffs)
    residual = float(np.linalg.norm(learned.ln @ coeffs - w))
    return Reconstruction(
        x_hat=x_hat,
        method=METHOD_III,
        residual_norm=residual,
        diagnostics={
            "rank_ln": ln_svd.rank,
            "p_prime": model.p_prime,
            "injective": ln_svd.rank == model.p_prime,
            "en_norm": float(np.sqrt(model.n) * np.linalg.norm(coeffs)),
        },
    )


def map_objective(model, learned, x, y, alpha):
    """``||K_n(x - x°_n) - (y - y°_n)||² + (α/n) ||x - x°_n||²_{E_n}``.

    The ``1/n`` factor is what replacing ``L_n^†`` by
    ``(L_n* L_n + α I)^{-1} L_n*`` actually minimizes, because
    ``||u||_{E_n} = sqrt(n) ||Λ^{-1} U_n* u||``. Points off ``x°_n + E_n``
    give ``inf``.
    """
    u = as_vector(x, learned.m, "x") - model.x_mean
    w = as_vector(y, learned.q, "y") - model.y_mean
    norm_e = en_norm(model, u)
    if not np.isfinite(norm_e):
        return float("inf")
    misfit = learned.apply(u) - w
    return float(misfit @ misfit + alpha / model.n * norm_e**2)


def map_estimate(model, learned, y, alpha, n_perturbations=50, seed=0):
    """MAP estimate with the sample Gaussian prior ``N(x°_n, Γ_n)``.

    Diagnostics include the residual of the regularized normal equations and
    whether the objective at the estimate is below its value at
    ``n_perturbations`` random nearby points of ``x°_n + E_n``.
    """
    alpha = check_alpha(alpha)
    _check_consistent(model, learned)
    w = as_vector(y, learned.q, "y") - model.y_mean
    ln = learned.ln
    coeffs = pinv_tikhonov(ln, alpha) @ w
    x_hat = model.x_mean + model.basis @ (model.lambdas * coeffs)
    normal_residual = float(
        np.linalg.norm(ln.T @ (ln @ coeffs) + alpha * coeffs - ln.T @ w)
    )
    objective = float(np.sum((ln @ coeffs - w) ** 2) + alpha * coeffs @ coeffs)
    rng = np.random.default_rng(seed)
    scale = 1e-3 * (1.0 + np.linalg.norm(coeffs))
    worst_gap = np.inf
    for _ in range(n_perturbations):
        c = coeffs + scale * rng.standard_normal(coeffs.shape)
        value = np.sum((ln @ c - w) ** 2) + alpha * c @ c
        worst_gap = min(worst_gap, value - objective)
    tol = 1e-12 * (1.0 + abs(objective))
    return Reconstruction(
        x_hat=x_hat,
        method=METHOD_MAP,
        residual_norm=float(np.linalg.norm(ln @ coeffs - w)),
        alpha=alpha,
        diagnostics={
            "normal_residual": normal_residual,
            "objective": objective,
            "perturbation_gap": float(worst_gap),
            "local_minimum": bool(worst_gap >= -tol),
            "en_norm": float(np.sqrt(model.n) * np.linalg.norm(coeffs)),
        },
    )


def oracle_dls(K_true, subspace_basis, y, rel_tol=SOLVER_REL_TOL):
    """Minimal-norm minimizer of ``||P K x - P y||`` with ``P`` the projector onto ``Y_n``.

    Needs the true operator, which the data-driven setting does not have.
    """
    K_true = as_dense_map(K_true, "K_true")
    B = as_dense_map(subspace_basis, "subspace_basis")
    if B.shape[0] != K_true.shape[0]:
        raise DimensionMismatchError("subspace basis lives in the wrong space")
    if not np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-8):
        raise ValidationError("subspace_basis must have orthonormal columns")
    y = as_vector(y, K_true.shape[0], "y")
    PK = B @ (B.T @ K_true)
    svd = thin_svd(PK, rel_tol)
    if svd.rank == 0:
        raise RankZeroError("the projected operator is zero")
    Py = B @ (B.T @ y)
    x_hat = pinv(PK, rel_tol) @ Py
    return Reconstruction(
        x_hat=x_hat,
        method=METHOD_ORACLE,
        residual_norm=float(np.linalg.norm(PK @ x_hat - Py)),
        diagnostics={"rank_pk": svd.rank},
    )


def span_basis(vectors_as_columns, rel_tol=1e-12):
    """Orthonormal basis of the column span, e.g. of ``Y_n``."""
    return thin_svd(vectors_as_columns, rel_tol).left
