"""Dense linear-algebra kernel.

Linear maps are plain ``float64`` ndarrays of shape ``(rows, cols)``. The SVD
itself is delegated to LAPACK through :func:`numpy.linalg.svd`; everything
built on top of it (rank decisions, pseudoinverses, norms) lives here so that
every caller shares one truncation rule: a singular value is kept when it is
strictly larger than ``rel_tol * sigma_max``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_dense_map, check_alpha
from .exceptions import RankZeroError

DEFAULT_REL_TOL = 1e-12


@dataclass(frozen=True)
class ThinSVD:
    """Truncated factorization ``A = left @ diag(singulars) @ right.T``.

    ``left`` is ``(m, r)`` and ``right`` is ``(n, r)``, both with orthonormal
    columns; ``singulars`` is strictly positive and non-increasing.
    """

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray
    rank_tolerance_used: float

    @property
    def rank(self):
        return self.singulars.shape[0]

    @property
    def shape(self):
        return (self.left.shape[0], self.right.shape[0])

    def reconstruct(self):
        return (self.left * self.singulars) @ self.right.T

    def truncate(self, rank):
        """Keep only the ``rank`` leading singular triplets."""
        return ThinSVD(
            self.left[:, :rank],
            self.singulars[:rank],
            self.right[:, :rank],
            self.rank_tolerance_used,
        )


def thin_svd(A, rel_tol=DEFAULT_REL_TOL):
    """Thin SVD of ``A`` keeping the triplets with ``sigma > rel_tol * sigma_max``.

    Signs are normalized so that the entry of largest magnitude in each left
    singular vector is positive, which makes the factors reproducible.
    The zero map (or an empty one) yields rank 0 with empty factors.
    """
    A = as_dense_map(A)
    if rel_tol < 0:
        raise ValueError("rel_tol must be nonnegative")
    m, n = A.shape
    if A.size == 0:
        s = np.zeros(0)
        u = np.zeros((m, 0))
        vt = np.zeros((0, n))
    else:
        u, s, vt = np.linalg.svd(A, full_matrices=False)
    smax = s[0] if s.size else 0.0
    keep = int(np.count_nonzero(s > rel_tol * smax)) if smax > 0 else 0
    u = u[:, :keep].copy()
    v = vt[:keep].T.copy()
    s = s[:keep].copy()
    if keep:
        pivots = np.argmax(np.abs(u), axis=0)
        signs = np.sign(u[pivots, np.arange(keep)])
        signs[signs == 0] = 1.0
        u *= signs
        v *= signs
    return ThinSVD(u, s, v, float(rel_tol))


def matrix_rank(A, rel_tol=DEFAULT_REL_TOL):
    return thin_svd(A, rel_tol).rank


def pinv(A, rel_tol=DEFAULT_REL_TOL):
    """Moore-Penrose pseudoinverse from the truncated SVD."""
    A = as_dense_map(A)
    svd = thin_svd(A, rel_tol)
    return (svd.right / svd.singulars) @ svd.left.T


def pinv_tikhonov(A, alpha):
    """Return ``(A.T A + alpha I)^{-1} A.T`` evaluated through the SVD of ``A``."""
    alpha = check_alpha(alpha)
    A = as_dense_map(A)
    svd = thin_svd(A, 0.0)
    s = svd.singulars
    return (svd.right * (s / (s * s + alpha))) @ svd.left.T


def hs_norm(A):
    """Hilbert-Schmidt (Frobenius) norm."""
    A = as_dense_map(A)
    return float(np.sqrt(np.sum(A * A)))


def spectral_norm(A):
    svd = thin_svd(A, 0.0)
    return float(svd.singulars[0]) if svd.rank else 0.0


def smallest_singular(A, rel_tol=DEFAULT_REL_TOL):
    """Smallest singular value retained under ``rel_tol``."""
    svd = thin_svd(A, rel_tol)
    if svd.rank == 0:
        raise RankZeroError("smallest singular value of the zero map is undefined")
    return float(svd.singulars[-1])


def range_projector(A, rel_tol=DEFAULT_REL_TOL):
    """Orthogonal projector onto the (numerical) range of ``A``."""
    left = thin_svd(A, rel_tol).left
    return left @ left.T


def orthonormal_complement(Q):
    """Columns completing the orthonormal columns of ``Q`` to a basis of R^n."""
    Q = as_dense_map(Q)
    n, r = Q.shape
    if r == 0:
        return np.eye(n)
    full, _, _ = np.linalg.svd(Q, full_matrices=True)
    return full[:, r:]


def relative_close(a, b, atol=1e-12, rtol=1e-9):
    """Hybrid test ``|a - b| <= atol + rtol * |b|`` applied to scalars."""
    return abs(a - b) <= atol + rtol * abs(b)
