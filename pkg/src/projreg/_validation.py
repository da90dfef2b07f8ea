"""Input validation helpers shared by the functional API and the estimators."""

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    EmptySetError,
    NonFiniteError,
    NonPositiveAlphaError,
)


def check_finite(a, name="array"):
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return a


def as_dense_map(A, name="A"):
    """Return ``A`` as a finite float64 2-D array."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got ndim={A.ndim}")
    return check_finite(A, name)


def as_vector(v, dim=None, name="vector"):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 2 and 1 in v.shape:
        v = v.ravel()
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-D, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(
            f"{name} has length {v.shape[0]}, expected {dim}"
        )
    return check_finite(v, name)


def as_rows(vectors, name="vectors"):
    """Stack a list of equal-length vectors as the rows of a 2-D array."""
    if isinstance(vectors, np.ndarray):
        rows = vectors.astype(np.float64, copy=False)
        if rows.ndim == 1:
            rows = rows[None, :]
    else:
        vectors = list(vectors)
        if not vectors:
            raise EmptySetError(f"{name} is empty")
        lengths = {np.asarray(v).size for v in vectors}
        if len(lengths) != 1:
            raise DimensionMismatchError(
                f"{name} have inconsistent lengths {sorted(lengths)}"
            )
        rows = np.array([np.asarray(v, dtype=np.float64).ravel() for v in vectors])
    if rows.ndim != 2:
        raise DimensionMismatchError(f"{name} must be a list of vectors")
    if rows.shape[0] == 0:
        raise EmptySetError(f"{name} is empty")
    return check_finite(rows, name)


def check_alpha(alpha):
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha <= 0:
        raise NonPositiveAlphaError(f"alpha must be positive, got {alpha!r}")
    return alpha
