"""Multivariate normal log-densities, computed in log space throughout."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonPositiveWeight
from .linalg import SpdMatrix, cholesky, log_det, mahalanobis_sq, mahalanobis_sq_rows

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class GaussianComponent:
    """One mixture component: a mean vector and an SPD covariance."""

    mean: np.ndarray
    cov: SpdMatrix

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(mean)):
            raise ValueError("component mean must be finite")
        if mean.shape[0] != self.cov.dim:
            raise DimensionMismatch(
                f"mean has length {mean.shape[0]} but covariance has dimension {self.cov.dim}"
            )
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)

    @classmethod
    def from_covariance(cls, mean, cov) -> "GaussianComponent":
        return cls(mean, cholesky(cov))

    @property
    def dim(self) -> int:
        return self.cov.dim

    def shifted(self, t) -> "GaussianComponent":
        return GaussianComponent(self.mean + np.asarray(t, dtype=np.float64), self.cov)


def log_density(c: GaussianComponent, x) -> float:
    """Log of the normal density of `c` evaluated at the point `x`."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (c.dim,):
        raise DimensionMismatch(f"point of shape {x.shape} against dimension {c.dim}")
    return -0.5 * (c.dim * LOG_2PI + log_det(c.cov) + mahalanobis_sq(c.cov, x - c.mean))


def log_density_rows(c: GaussianComponent, x) -> np.ndarray:
    """Vectorized :func:`log_density` over the rows of an ``(n, d)`` array."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != c.dim:
        raise DimensionMismatch(f"points of shape {x.shape} against dimension {c.dim}")
    q = mahalanobis_sq_rows(c.cov, x - c.mean)
    return -0.5 * (c.dim * LOG_2PI + log_det(c.cov) + q)


def log_weighted_density(weight: float, c: GaussianComponent, x) -> float:
    """``log(weight) + log_density(c, x)``, the log of ``weight * N(x; mean, cov)``."""
    if not weight > 0:
        raise NonPositiveWeight(f"component weight must be > 0, got {weight!r}")
    return math.log(weight) + log_density(c, x)
