"""Gaussian mixture models, data sets, log-likelihood and responsibilities.

Responsibilities are returned as plain ``(n, k)`` float arrays whose rows
lie on the probability simplex.
"""
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, EmptyInput
from .gaussian import GaussianComponent
from .linalg import cholesky

WEIGHT_FLOOR = 1e-10
WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DataSet:
    """``n`` observed samples of dimension ``dim``, stored row-wise."""

    samples: np.ndarray

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise EmptyInput(f"data set needs at least one sample, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("data set entries must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @classmethod
    def coerce(cls, data) -> "DataSet":
        return data if isinstance(data, DataSet) else cls(data)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class MixtureModel:
    """Mixing weights on the simplex plus ``k`` Gaussian components of one dimension."""

    weights: np.ndarray
    components: Sequence[GaussianComponent]
    weight_floor: float = field(default=WEIGHT_FLOOR, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        comps = tuple(self.components)
        if len(comps) == 0 or len(comps) != w.shape[0]:
            raise DimensionMismatch(f"{w.shape[0]} weights for {len(comps)} components")
        if not np.all(np.isfinite(w)) or abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got sum {w.sum()!r}")
        if np.any(w < self.weight_floor):
            raise ValueError(f"every weight must be >= {self.weight_floor:g}")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise DimensionMismatch(f"components have mixed dimensions {sorted(dims)}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)
        means = np.stack([c.mean for c in comps])
        chols = np.stack([c.cov.chol_lower for c in comps])
        object.__setattr__(self, "_means", means)
        object.__setattr__(self, "_chols", chols)
        object.__setattr__(self, "_log_weights", np.log(w))

    @classmethod
    def from_arrays(cls, weights, means, covariances, **kwargs) -> "MixtureModel":
        """Build a model from raw weight, mean and full covariance arrays."""
        means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        covs = np.asarray(covariances, dtype=np.float64)
        if covs.ndim == 1:
            covs = covs[:, None, None]
        comps = [GaussianComponent(m, cholesky(c)) for m, c in zip(means, covs)]
        return cls(weights, comps, **kwargs)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def means(self) -> np.ndarray:
        return self._means.copy()

    @property
    def chols(self) -> np.ndarray:
        return self._chols.copy()

    @property
    def covariances(self) -> np.ndarray:
        return np.stack([c.cov.to_matrix() for c in self.components])

    def permuted(self, order) -> "MixtureModel":
        order = list(order)
        return MixtureModel(
            self.weights[order], [self.components[j] for j in order], weight_floor=self.weight_floor
        )


def log_sum_exp(y) -> float:
    """Stable ``log(sum(exp(y)))``."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.size == 0:
        raise EmptyInput("log_sum_exp of an empty vector")
    m = y.max()
    if m == -np.inf:
        return -np.inf
    return float(m + np.log(np.sum(np.exp(y - m))))


def log_sum_exp_rows(g: np.ndarray) -> np.ndarray:
    """Row-wise :func:`log_sum_exp` of a 2-D array."""
    m = g.max(axis=1)
    safe = np.where(np.isfinite(m), m, 0.0)
    return safe + np.log(np.sum(np.exp(g - safe[:, None]), axis=1))


def _check(m: MixtureModel, data) -> DataSet:
    data = DataSet.coerce(data)
    if data.dim != m.dim:
        raise DimensionMismatch(f"data dimension {data.dim} does not match model dimension {m.dim}")
    return data


def log_weighted_densities(m: MixtureModel, data) -> np.ndarray:
    """The ``(n, k)`` matrix of ``log(pi_k) + log N(x_i; mu_k, Sigma_k)``."""
    data = _check(m, data)
    return _kernels.log_gauss_matrix(data.samples, m._means, m._chols, m._log_weights)


def sample_log_likelihoods(m: MixtureModel, data) -> np.ndarray:
    """Per-sample log mixture density."""
    return log_sum_exp_rows(log_weighted_densities(m, data))


def log_likelihood(m: MixtureModel, data) -> float:
    # np.sum uses a fixed pairwise reduction, so the total is reproducible.
    return float(np.sum(sample_log_likelihoods(m, data)))


def responsibilities_from_log(g: np.ndarray) -> np.ndarray:
    """Softmax of each row of a log-weighted-density matrix."""
    e = np.exp(g - g.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def responsibilities(m: MixtureModel, data) -> np.ndarray:
    """Posterior component probabilities, one simplex row per sample."""
    return responsibilities_from_log(log_weighted_densities(m, data))
