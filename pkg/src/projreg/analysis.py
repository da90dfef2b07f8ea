"""Numerical checks of the pseudoinverse identity and the error decomposition.

Also hosts the noise models used to build synthetic training sets and
observations with a prescribed noise level.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_dense_map, as_rows, as_vector
from .exceptions import NoTruthError, NotInjectiveError, ValidationError
from .linalg import matrix_rank, pinv, range_projector, smallest_singular, spectral_norm
from .solvers import SOLVER_REL_TOL, _check_consistent, method3
from .training import assemble

IDENTITY_TOL = 1e-8


def _rel_defect(residual, reference):
    return spectral_norm(residual) / max(spectral_norm(reference), 1e-300)


@dataclass
class LemmaReport:
    """Defects of the Penrose identities for ``A = U_n Λ L_n^†``.

    ``identities`` maps a name to ``(relative defect, passed)``; the entries
    that need injectivity carry ``passed=None`` when it fails.
    """

    identities: dict
    injective: bool
    rank_ln: int
    p_prime: int
    A: np.ndarray = field(repr=False, default=None)

    @property
    def unconditional_pass(self):
        return all(self.identities[k][1] for k in ("KA_projector", "AKA", "KAK"))

    @property
    def all_pass(self):
        return all(passed is not False for _, passed in self.identities.values())


def lemma_check(model, learned, rel_tol=SOLVER_REL_TOL):
    _check_consistent(model, learned)
    ln = learned.ln
    kn = learned.kn
    A = (model.basis * model.lambdas) @ pinv(ln, rel_tol)
    rank_ln = matrix_rank(ln, rel_tol)
    injective = rank_ln == model.p_prime

    KA = kn @ A
    P_range = range_projector(kn, rel_tol)
    checks = {
        "KA_projector": _rel_defect(KA - P_range, np.eye(1)),
        "AKA": _rel_defect(A @ KA - A, A),
        "KAK": _rel_defect(KA @ kn - kn, kn),
    }
    identities = {k: (v, v <= IDENTITY_TOL) for k, v in checks.items()}
    if injective:
        AK_defect = _rel_defect(A @ kn - model.projector(), np.eye(1))
        pinv_defect = _rel_defect(A - pinv(kn, rel_tol), A)
        identities["AK_projector"] = (AK_defect, AK_defect <= IDENTITY_TOL)
        identities["A_is_pinv"] = (pinv_defect, pinv_defect <= IDENTITY_TOL)
    else:
        identities["AK_projector"] = (float("nan"), None)
        identities["A_is_pinv"] = (float("nan"), None)
    return LemmaReport(identities, injective, rank_ln, model.p_prime, A)


@dataclass
class ErrorDecomposition:
    """``x_hat - x† = (I - P_E)(x°_n - x†) + d_n`` with ``d_n = K_n^† r_n``."""

    projection_term: np.ndarray
    d_n: np.ndarray
    r_n: np.ndarray
    mu_n: float
    bound_rhs: float
    equality_defect: float
    x_hat: np.ndarray
    exact_data: bool
    dn_recompute_defect: float = 0.0

    @property
    def d_norm(self):
        return float(np.linalg.norm(self.d_n))

    @property
    def bound_holds(self):
        return self.d_norm <= self.bound_rhs + 1e-9 * (1.0 + self.bound_rhs)


def proposition_check(problem, model, learned, y=None, rel_tol=SOLVER_REL_TOL):
    """Evaluate the error decomposition of the Bayesian projection estimate.

    ``problem`` supplies the true operator ``K`` and ground truth
    ``x_dagger``. By default ``y = K x_dagger``; passing a noisy ``y``
    still yields the decomposition but the bound on ``d_n`` is then not a
    theorem and ``exact_data`` is ``False``.
    """
    K = getattr(problem, "K", None)
    x_dagger = getattr(problem, "x_dagger", None)
    if K is None or x_dagger is None:
        raise NoTruthError("proposition_check needs the true operator and x_dagger")
    K = as_dense_map(K, "K")
    x_dagger = as_vector(x_dagger, K.shape[1], "x_dagger")
    _check_consistent(model, learned)
    if matrix_rank(learned.ln, rel_tol) != model.p_prime:
        raise NotInjectiveError("K_n is not injective on E_n (rank L_n < p')")

    exact = y is None
    y_exact = K @ x_dagger
    y = y_exact if exact else as_vector(y, K.shape[0], "y")
    x_bar, y_bar = model.x_mean, model.y_mean
    kn = learned.kn

    x_hat = method3(model, learned, y, rel_tol).x_hat
    projection_term = (x_bar - x_dagger) - model.basis @ (model.basis.T @ (x_bar - x_dagger))
    r_direct = y - y_bar - kn @ (x_dagger - x_bar)
    if exact:
        r_n = (K - kn) @ (x_dagger - x_bar) + K @ x_bar - y_bar
    else:
        r_n = r_direct
    kn_pinv = pinv(kn, rel_tol)
    d_n = kn_pinv @ r_n
    mu_n = smallest_singular(kn, rel_tol)
    bound_rhs = (
        np.linalg.norm((K - kn) @ (x_bar - x_dagger)) + np.linalg.norm(y_bar - K @ x_bar)
    ) / mu_n
    defect = np.linalg.norm((x_hat - x_dagger) - projection_term - d_n)
    return ErrorDecomposition(
        projection_term=projection_term,
        d_n=d_n,
        r_n=r_n,
        mu_n=mu_n,
        bound_rhs=float(bound_rhs),
        equality_defect=float(defect),
        x_hat=x_hat,
        exact_data=exact,
        dn_recompute_defect=float(np.linalg.norm(kn_pinv @ r_direct - d_n)),
    )


def _bounded_noise(rng, dim, level):
    """A vector of norm at most ``level``: Gaussian direction, uniform radius."""
    g = rng.standard_normal(dim)
    rho = rng.uniform()
    norm = np.linalg.norm(g)
    if norm == 0 or level == 0:
        return np.zeros(dim)
    return level * rho * g / norm


def noise_inject(K, x_true_list, delta, seed):
    """Training pairs ``y_k = K x_k + e_k`` with ``||e_k|| <= delta`` by construction."""
    K = as_dense_map(K, "K")
    images = as_rows(x_true_list, "images")
    if images.shape[1] != K.shape[1]:
        raise ValidationError("images do not match the operator's input dimension")
    delta = float(delta)
    if delta < 0:
        raise ValidationError("delta must be nonnegative")
    rng = np.random.default_rng(seed)
    clean = images @ K.T
    noise = np.array([_bounded_noise(rng, K.shape[0], delta) for _ in images])
    return assemble(images, clean + noise, delta)


def data_noise(K, x_dagger, eta_level, seed):
    """Observation ``y = K x_dagger + eta`` with ``||eta|| = eta_level`` exactly."""
    K = as_dense_map(K, "K")
    x_dagger = as_vector(x_dagger, K.shape[1], "x_dagger")
    eta_level = float(eta_level)
    if eta_level < 0:
        raise ValidationError("eta_level must be nonnegative")
    y = K @ x_dagger
    if eta_level == 0:
        return y
    g = np.random.default_rng(seed).standard_normal(K.shape[0])
    return y + eta_level * g / np.linalg.norm(g)
