"""SPD matrices held by their lower Cholesky factor.

Every covariance in the package goes through :class:`SpdMatrix`; inverses
are never formed, quadratic forms use a forward triangular solve.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric

SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """Symmetric positive-definite matrix ``L @ L.T``.

    Build instances with :func:`cholesky`; the constructor trusts its input
    beyond a cheap diagonal check.
    """

    chol_lower: np.ndarray

    def __post_init__(self):
        L = np.array(self.chol_lower, dtype=np.float64)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise DimensionMismatch(f"Cholesky factor must be square, got shape {L.shape}")
        diag = np.diag(L)
        if not (np.all(np.isfinite(diag)) and np.all(diag > 0)):
            raise NotPositiveDefinite("Cholesky diagonal must be finite and > 0")
        L = np.tril(L)
        L.setflags(write=False)
        object.__setattr__(self, "chol_lower", L)

    @property
    def dim(self) -> int:
        return self.chol_lower.shape[0]

    def to_matrix(self) -> np.ndarray:
        """Reconstruct the full symmetric matrix."""
        L = self.chol_lower
        a = L @ L.T
        return 0.5 * (a + a.T)

    def scaled(self, factor: float) -> "SpdMatrix":
        """Return the SPD matrix ``factor * self`` (factor > 0)."""
        return SpdMatrix(self.chol_lower * np.sqrt(factor))

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim})"


def cholesky(a) -> SpdMatrix:
    """Factorize a symmetric matrix as ``L @ L.T``.

    The input is symmetrized as ``(a + a.T) / 2`` after the symmetry check.

    Raises
    ------
    NotSymmetric
        If ``|a - a.T|`` exceeds ``1e-10`` times the largest entry.
    NotPositiveDefinite
        If any pivot is non-positive or the input has non-finite entries.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_RTOL * scale:
        raise NotSymmetric("matrix is not symmetric within 1e-10 relative tolerance")
    a = 0.5 * (a + a.T)
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    diag = np.diag(L)
    if not (np.all(np.isfinite(diag)) and np.all(diag > 0)):
        raise NotPositiveDefinite("non-positive pivot")
    return SpdMatrix(L)


def log_det(s: SpdMatrix) -> float:
    return float(2.0 * np.sum(np.log(np.diag(s.chol_lower))))


def mahalanobis_sq(s: SpdMatrix, v) -> float:
    """``v^T S^{-1} v`` via a forward solve against the Cholesky factor."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (s.dim,):
        raise DimensionMismatch(f"vector of shape {v.shape} against dimension {s.dim}")
    return float(mahalanobis_sq_rows(s, v[None, :])[0])


def mahalanobis_sq_rows(s: SpdMatrix, diffs) -> np.ndarray:
    """Row-wise :func:`mahalanobis_sq` for an ``(n, d)`` array."""
    diffs = np.ascontiguousarray(diffs, dtype=np.float64)
    if diffs.ndim != 2 or diffs.shape[1] != s.dim:
        raise DimensionMismatch(f"rows of shape {diffs.shape} against dimension {s.dim}")
    return _kernels.mahalanobis_rows(s.chol_lower, diffs)
