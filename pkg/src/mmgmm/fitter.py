"""Maximum-likelihood fitting by repeated maximization of a tangent lower bound.

At the current model the per-sample log-sum-exp is replaced by its
first-order expansion, whose gradient is the responsibility matrix. The
bound splits into a weights problem and a per-component mean/covariance
problem, each solved in closed form by :func:`update_weights`,
:func:`update_means` and :func:`update_covariances`.
"""
import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels
from .errors import DegenerateComponent, NotPositiveDefinite, TooFewSamples
from .gaussian import GaussianComponent
from .linalg import SpdMatrix, cholesky
from .mixture import (
    WEIGHT_FLOOR,
    DataSet,
    MixtureModel,
    log_sum_exp_rows,
    log_weighted_densities,
    responsibilities_from_log,
)
from .sampler import RandomSource

ASCENT_SLACK = 1e-9


class Init(str, enum.Enum):
    RANDOM_POINTS = "random"
    KMEANS_PLUS_PLUS = "kmeanspp"


class Termination(str, enum.Enum):
    TOLERANCE = "tolerance"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 500
    rel_tol: float = 1e-8
    cov_floor: float = 1e-6
    weight_floor: float = WEIGHT_FLOOR
    seed: int = 0
    init: Init = Init.KMEANS_PLUS_PLUS

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.cov_floor < 0:
            raise ValueError("cov_floor must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "init", Init(self.init))


@dataclass
class FitTrace:
    """Log-likelihood after every iteration, starting with the initial model.

    ``rescued[t]`` marks iterations in which an empty component was reseeded;
    those steps carry no ascent guarantee.
    """

    loglik: List[float] = field(default_factory=list)
    rescued: List[bool] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    termination_reason: Optional[Termination] = None

    def deltas(self) -> List[float]:
        return [0.0] + [b - a for a, b in zip(self.loglik, self.loglik[1:])]


def ascent_ok(prev: float, new: float) -> bool:
    return new >= prev - ASCENT_SLACK * (1.0 + abs(prev))


# --- closed-form updates -------------------------------------------------

def update_weights(w: np.ndarray, weight_floor: float = WEIGHT_FLOOR) -> np.ndarray:
    """Column means of the responsibilities, floored and renormalized."""
    w = np.asarray(w, dtype=np.float64)
    pi = w.sum(axis=0) / w.shape[0]
    for _ in range(2):
        pi = np.maximum(pi, weight_floor)
        pi = pi / pi.sum()
    return pi


def update_means(w: np.ndarray, data) -> np.ndarray:
    """Responsibility-weighted sample averages, one row per component."""
    x = DataSet.coerce(data).samples
    w = np.asarray(w, dtype=np.float64)
    mass = w.sum(axis=0)
    if np.any(~(mass > 0)):
        bad = np.flatnonzero(~(mass > 0)).tolist()
        raise DegenerateComponent(f"components {bad} have zero responsibility mass")
    return (w.T @ x) / mass[:, None]


def update_covariances(w: np.ndarray, data, means, cov_floor: float = 1e-6) -> List[SpdMatrix]:
    """Weighted scatter about the *updated* means, plus ``cov_floor`` on the diagonal."""
    x = np.ascontiguousarray(DataSet.coerce(data).samples)
    w = np.asarray(w, dtype=np.float64)
    means = np.atleast_2d(np.asarray(means, dtype=np.float64))
    d = x.shape[1]
    out = []
    for k in range(w.shape[1]):
        mass = w[:, k].sum()
        if not mass > 0:
            raise DegenerateComponent(f"component {k} has zero responsibility mass")
        col = np.ascontiguousarray(w[:, k])
        s = _kernels.weighted_scatter(x, col, np.ascontiguousarray(means[k])) / mass
        s = 0.5 * (s + s.T) + cov_floor * np.eye(d)
        try:
            out.append(cholesky(s))
        except NotPositiveDefinite as exc:
            raise DegenerateComponent(f"component {k}: {exc}") from None
    return out


# --- initialization ------------------------------------------------------

def global_covariance(x: np.ndarray) -> np.ndarray:
    diff = x - x.mean(axis=0)
    return diff.T @ diff / x.shape[0]


def _kmeanspp(x: np.ndarray, k: int, rng: RandomSource) -> np.ndarray:
    n = x.shape[0]
    chosen = [min(int(rng.random() * n), n - 1)]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        u = rng.random()
        if total > 0:
            cum = np.cumsum(d2)
            idx = int(np.searchsorted(cum, u * cum[-1], side="right"))
            idx = min(idx, n - 1)
        else:
            # every point coincides with a center already
            idx = next(i for i in range(n) if i not in chosen)
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return np.array(chosen)


def init_model(data, k: int, cfg: FitConfig = FitConfig()) -> MixtureModel:
    """Uniform weights, seeded mean selection, global covariance for every component."""
    data = DataSet.coerce(data)
    if k < 1:
        raise ValueError("k must be >= 1")
    if data.n < k:
        raise TooFewSamples(f"{data.n} samples cannot seed {k} components")
    x = data.samples
    rng = RandomSource(cfg.seed)
    if cfg.init is Init.RANDOM_POINTS:
        idx = rng.generator.choice(data.n, size=k, replace=False)
    else:
        idx = _kmeanspp(x, k, rng)
    cov = cholesky(global_covariance(x) + cfg.cov_floor * np.eye(data.dim))
    comps = [GaussianComponent(x[i], cov) for i in idx]
    return MixtureModel(np.full(k, 1.0 / k), comps, weight_floor=cfg.weight_floor)


# --- iteration -----------------------------------------------------------

def _rescue(w, sample_ll, x, cfg, pi, means, covs):
    n, k = w.shape
    empty = np.flatnonzero(w.sum(axis=0) < k * cfg.weight_floor * n)
    if empty.size == 0:
        return False
    # stable argsort: lowest index wins among equally unlikely samples
    worst = np.argsort(sample_ll, kind="stable")
    fallback = cholesky(global_covariance(x) + cfg.cov_floor * np.eye(x.shape[1]))
    for slot, j in enumerate(empty):
        means[j] = x[worst[slot % n]]
        covs[j] = fallback
        pi[j] = 1.0 / k
    pi /= pi.sum()
    return True


def _step(m: MixtureModel, data: DataSet, cfg: FitConfig, g: Optional[np.ndarray] = None):
    """One bound maximization. Returns ``(model, loglik, rescued, g_new)``."""
    x = data.samples
    if g is None:
        g = log_weighted_densities(m, data)
    w = responsibilities_from_log(g)
    n, k = w.shape
    mass = w.sum(axis=0)
    live = mass >= k * cfg.weight_floor * n
    pi = update_weights(w, cfg.weight_floor)
    means = m.means
    covs = [c.cov for c in m.components]
    if np.all(live):
        means = update_means(w, data)
        covs = update_covariances(w, data, means, cfg.cov_floor)
    else:
        lw = w[:, live]
        means[live] = update_means(lw, data)
        for j, s in zip(np.flatnonzero(live), update_covariances(lw, data, means[live], cfg.cov_floor)):
            covs[j] = s
    sample_ll = log_sum_exp_rows(g)
    rescued = _rescue(w, sample_ll, x, cfg, pi, means, covs)
    if rescued:
        pi = update_weights(pi[None, :], cfg.weight_floor)
    new, ll, g_new = _candidate(pi, means, covs, data, cfg)
    ll_old = float(np.sum(sample_ll))
    if not rescued and cfg.cov_floor > 0 and ll < ll_old - _FLOOR_GUARD * (1.0 + abs(ll_old)):
        alt = _unfloored_covariances(w, data, means, covs, live, cfg.cov_floor)
        if alt is not None:
            cand = _candidate(pi, means, alt, data, cfg)
            if cand[1] > ll:
                new, ll, g_new = cand
    return new, ll, rescued, g_new


# Below this the floored update is treated as flat, not as a decrease.
_FLOOR_GUARD = 1e-13


def _candidate(pi, means, covs, data, cfg):
    m = MixtureModel(
        pi, [GaussianComponent(mu, s) for mu, s in zip(means, covs)], weight_floor=cfg.weight_floor
    )
    g = log_weighted_densities(m, data)
    return m, float(np.sum(log_sum_exp_rows(g))), g


def _unfloored_covariances(w, data, means, covs, live, cov_floor):
    """Exact bound maximizers for components whose scatter already clears the floor.

    The additive floor moves each covariance off the maximizer of the bound,
    which near a tight component's fixed point can cost a little likelihood.
    Components whose scatter has an eigenvalue below ``cov_floor`` keep the
    floored update, so collapsing components stay regularized.
    """
    out = list(covs)
    changed = False
    for j in np.flatnonzero(live):
        try:
            (s,) = update_covariances(w[:, j : j + 1], data, means[j : j + 1], 0.0)
        except DegenerateComponent:
            continue
        if np.linalg.eigvalsh(s.to_matrix())[0] >= cov_floor:
            out[j] = s
            changed = True
    return out if changed else None


def mm_step(m: MixtureModel, data, cfg: FitConfig = FitConfig()) -> Tuple[MixtureModel, float]:
    """Responsibilities at `m`, then the weight, mean and covariance updates.

    Returns the new model and its log-likelihood on `data`.
    """
    data = DataSet.coerce(data)
    new, ll, _, _ = _step(m, data, cfg)
    return new, ll


def fit(data, k: int, cfg: FitConfig = FitConfig(), init: Optional[MixtureModel] = None):
    """Fit a `k`-component mixture to `data`.

    Iterates :func:`mm_step` until the relative log-likelihood change
    ``|l_new - l_old| / (1 + |l_old|)`` drops below ``cfg.rel_tol`` or
    ``cfg.max_iter`` steps have run.

    Returns
    -------
    model : MixtureModel
    trace : FitTrace
        ``trace.loglik[0]`` is the starting model's log-likelihood.
    """
    data = DataSet.coerce(data)
    m = init if init is not None else init_model(data, k, cfg)
    g = log_weighted_densities(m, data)
    ll = float(np.sum(log_sum_exp_rows(g)))
    trace = FitTrace(loglik=[ll], rescued=[False])
    for _ in range(cfg.max_iter):
        m, ll_new, rescued, g = _step(m, data, cfg, g)
        trace.loglik.append(ll_new)
        trace.rescued.append(rescued)
        trace.iterations += 1
        change = abs(ll_new - ll) / (1.0 + abs(ll))
        ll = ll_new
        if not rescued and change < cfg.rel_tol:
            trace.converged = True
            trace.termination_reason = Termination.TOLERANCE
            break
    else:
        trace.termination_reason = Termination.MAX_ITER
    if not math.isfinite(ll):
        raise DegenerateComponent("log-likelihood became non-finite")
    return m, trace
