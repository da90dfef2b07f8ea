"""scikit-learn compatible wrappers.

The reconstruction estimators regress images on data: ``fit(data, images)``
learns from training pairs and ``predict(data)`` returns reconstructed images.
Each method is a linear (affine) map from data to images, exposed as
``coef_`` of shape ``(m, q)`` and ``intercept_`` of shape ``(m,)`` just like
:class:`sklearn.linear_model.LinearRegression` with multiple targets.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_rows, check_alpha
from .exceptions import DimensionMismatchError
from .linalg import DEFAULT_REL_TOL, pinv, pinv_tikhonov
from .operator_learning import learn_centered, learn_uncentered
from .solvers import SOLVER_REL_TOL, kn_pinv, map_estimate, method1, method3
from .training import CenteredModel, assemble, center_images, en_norm, sample_stats


def _check_rows(est, X, name):
    X = as_rows(X, name)
    if X.shape[1] != est.n_features_in_:
        raise DimensionMismatchError(
            f"{name} has {X.shape[1]} features, "
            f"{type(est).__name__} was fitted with {est.n_features_in_}"
        )
    return X


class OperatorLearner(RegressorMixin, BaseEstimator):
    """Learn the forward surrogate ``K_n`` from training pairs.

    Parameters
    ----------
    centered : bool
        Fit on mean-subtracted pairs; ``predict`` then applies the affine map
        ``y°_n + K_n (x - x°_n)``.
    rel_tol : float
        Relative singular-value cutoff for the image SVD.
    truncation_rank : int or None
        Keep only this many leading singular triplets (uncentered only).
    """

    def __init__(self, centered=False, rel_tol=DEFAULT_REL_TOL, truncation_rank=None):
        self.centered = centered
        self.rel_tol = rel_tol
        self.truncation_rank = truncation_rank

    def fit(self, images, data, delta=0.0):
        ts = assemble(images, data, delta)
        if self.centered:
            self.model_ = sample_stats(ts, self.rel_tol)
            self.operator_ = learn_centered(self.model_, ts)
        else:
            self.operator_ = learn_uncentered(ts, self.rel_tol, self.truncation_rank)
        self.coef_ = self.operator_.kn
        self.intercept_ = self.operator_.y_mean - self.coef_ @ self.operator_.x_mean
        self.n_features_in_ = ts.m
        return self

    def predict(self, images):
        check_is_fitted(self, "operator_")
        X = _check_rows(self, images, "images")
        op = self.operator_
        return ((X - op.x_mean) @ op.svd_of_images.left) @ op.zn.T + op.y_mean


class SampleGaussianPrior(TransformerMixin, BaseEstimator):
    """Empirical Gaussian ``N(x°_n, Γ_n)`` of a set of images.

    ``transform`` maps images to whitened coordinates ``J (x - x°_n)``, in
    which the Cameron-Martin norm is the Euclidean one. Components outside
    the Cameron-Martin space are discarded by ``transform``; use
    :meth:`cameron_martin_norm` to detect them.
    """

    def __init__(self, rel_tol=DEFAULT_REL_TOL):
        self.rel_tol = rel_tol

    def fit(self, images, y=None):
        X = as_rows(images, "images")
        mean, svd = center_images(X.T, self.rel_tol)
        self.model_ = CenteredModel(
            mean, np.zeros(0), svd.left, svd.singulars, svd.right, self.rel_tol
        )
        self.mean_ = mean
        self.components_ = svd.left.T
        self.singular_values_ = svd.singulars
        self.explained_variance_ = self.model_.covariance_eigenvalues
        self.n_components_ = svd.rank
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, images):
        check_is_fitted(self, "model_")
        X = _check_rows(self, images, "images")
        return np.array([self.model_.whiten(x - self.mean_) for x in X]).reshape(
            X.shape[0], self.n_components_
        )

    def inverse_transform(self, coords):
        check_is_fitted(self, "model_")
        coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
        return np.array([self.mean_ + self.model_.unwhiten(c) for c in coords])

    def cameron_martin_norm(self, images):
        """Per-row E_n-norm of ``x - x°_n``; ``inf`` off the affine prior support."""
        check_is_fitted(self, "model_")
        X = _check_rows(self, images, "images")
        return np.array([en_norm(self.model_, x - self.mean_) for x in X])


class _ProjectionSolver(RegressorMixin, BaseEstimator):
    def fit(self, data, images, delta=0.0):
        """Learn from training pairs; note the order: data first, images second."""
        ts = assemble(images, data, delta)
        self._fit_pairs(ts)
        self.n_features_in_ = ts.q
        return self

    def predict(self, data):
        check_is_fitted(self, "coef_")
        Y = _check_rows(self, data, "data")
        return Y @ self.coef_.T + self.intercept_


class LeastSquaresProjection(_ProjectionSolver):
    """Least-squares projection ``x = K_n^† y`` (Method I).

    Parameters
    ----------
    rel_tol : float
        Cutoff for the image SVD.
    solver_tol : float
        Cutoff for the pseudoinverse of ``K_n``.
    truncation_rank : int or None
        Truncated-SVD variant of ``K_n``.
    """

    def __init__(self, rel_tol=DEFAULT_REL_TOL, solver_tol=SOLVER_REL_TOL,
                 truncation_rank=None):
        self.rel_tol = rel_tol
        self.solver_tol = solver_tol
        self.truncation_rank = truncation_rank

    def _fit_pairs(self, ts):
        self.operator_ = learn_uncentered(ts, self.rel_tol, self.truncation_rank)
        self.coef_ = kn_pinv(self.operator_, self.solver_tol)
        self.intercept_ = np.zeros(ts.m)

    def reconstruct(self, y):
        """Full :class:`~projreg.solvers.Reconstruction` with diagnostics."""
        check_is_fitted(self, "operator_")
        return method1(self.operator_, y, self.solver_tol)


class BayesianProjection(_ProjectionSolver):
    """Minimal Cameron-Martin-norm projection (Method III).

    Never divides by the singular values of the images, so it stays stable
    for clustered training images.
    """

    def __init__(self, rel_tol=DEFAULT_REL_TOL, solver_tol=SOLVER_REL_TOL):
        self.rel_tol = rel_tol
        self.solver_tol = solver_tol

    def _fit_pairs(self, ts):
        self.model_ = sample_stats(ts, self.rel_tol)
        self.operator_ = learn_centered(self.model_, ts)
        self.coef_ = (self.model_.basis * self.model_.lambdas) @ pinv(
            self.operator_.ln, self.solver_tol
        )
        self.intercept_ = self.model_.x_mean - self.coef_ @ self.model_.y_mean

    def reconstruct(self, y):
        check_is_fitted(self, "operator_")
        return method3(self.model_, self.operator_, y, self.solver_tol)


class MAPEstimator(_ProjectionSolver):
    """MAP estimate under the empirical Gaussian prior of the training images."""

    def __init__(self, alpha=1.0, rel_tol=DEFAULT_REL_TOL):
        self.alpha = alpha
        self.rel_tol = rel_tol

    def _fit_pairs(self, ts):
        alpha = check_alpha(self.alpha)
        self.model_ = sample_stats(ts, self.rel_tol)
        self.operator_ = learn_centered(self.model_, ts)
        self.coef_ = (self.model_.basis * self.model_.lambdas) @ pinv_tikhonov(
            self.operator_.ln, alpha
        )
        self.intercept_ = self.model_.x_mean - self.coef_ @ self.model_.y_mean

    def reconstruct(self, y):
        check_is_fitted(self, "operator_")
        return map_estimate(self.model_, self.operator_, y, self.alpha)
