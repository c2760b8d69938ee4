"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``log_gauss_matrix``, ``weighted_scatter``,
``mahalanobis_rows``) point at the numba versions when ``_accel.USE_NUMBA``
is true and at the numpy versions otherwise. Both flavours are importable
directly so they can be compared against each other.
"""
import math

import numpy as np
from scipy.linalg import solve_triangular

from . import _accel
from ._accel import njit

LOG_2PI = math.log(2.0 * math.pi)


# --- numpy ---------------------------------------------------------------

def mahalanobis_rows_numpy(chol, diffs):
    """Squared Mahalanobis norms ``||L^{-1} r||^2`` for every row ``r`` of `diffs`."""
    z = solve_triangular(chol, diffs.T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", z, z)


def log_gauss_matrix_numpy(x, means, chols, log_weights):
    n, d = x.shape
    k = means.shape[0]
    out = np.empty((n, k))
    for j in range(k):
        logdet = 2.0 * np.sum(np.log(np.diag(chols[j])))
        q = mahalanobis_rows_numpy(chols[j], x - means[j])
        out[:, j] = log_weights[j] - 0.5 * (d * LOG_2PI + logdet + q)
    return out


def weighted_scatter_numpy(x, w, mean):
    """``sum_i w_i (x_i - mean)(x_i - mean)^T``."""
    diff = x - mean
    return (diff * w[:, None]).T @ diff


# --- numba ---------------------------------------------------------------

@njit(cache=True)
def _forward_sq_norm(chol, r, z):
    d = r.shape[0]
    acc = 0.0
    for a in range(d):
        s = r[a]
        for b in range(a):
            s -= chol[a, b] * z[b]
        z[a] = s / chol[a, a]
        acc += z[a] * z[a]
    return acc


@njit(cache=True)
def mahalanobis_rows_numba(chol, diffs):
    n, d = diffs.shape
    out = np.empty(n)
    z = np.empty(d)
    for i in range(n):
        out[i] = _forward_sq_norm(chol, diffs[i], z)
    return out


@njit(cache=True)
def log_gauss_matrix_numba(x, means, chols, log_weights):
    n, d = x.shape
    k = means.shape[0]
    out = np.empty((n, k))
    r = np.empty(d)
    z = np.empty(d)
    log_2pi = np.log(2.0 * np.pi)
    for j in range(k):
        logdet = 0.0
        for a in range(d):
            logdet += np.log(chols[j, a, a])
        logdet *= 2.0
        const = log_weights[j] - 0.5 * (d * log_2pi + logdet)
        for i in range(n):
            for a in range(d):
                r[a] = x[i, a] - means[j, a]
            out[i, j] = const - 0.5 * _forward_sq_norm(chols[j], r, z)
    return out


@njit(cache=True)
def weighted_scatter_numba(x, w, mean):
    n, d = x.shape
    out = np.zeros((d, d))
    r = np.empty(d)
    for i in range(n):
        wi = w[i]
        if wi == 0.0:
            continue
        for a in range(d):
            r[a] = x[i, a] - mean[a]
        for a in range(d):
            ra = wi * r[a]
            for b in range(a + 1):
                out[a, b] += ra * r[b]
    for a in range(d):
        for b in range(a):
            out[b, a] = out[a, b]
    return out


if _accel.USE_NUMBA:
    mahalanobis_rows = mahalanobis_rows_numba
    log_gauss_matrix = log_gauss_matrix_numba
    weighted_scatter = weighted_scatter_numba
else:
    mahalanobis_rows = mahalanobis_rows_numpy
    log_gauss_matrix = log_gauss_matrix_numpy
    weighted_scatter = weighted_scatter_numpy

BACKEND = "numba" if _accel.USE_NUMBA else "numpy"
