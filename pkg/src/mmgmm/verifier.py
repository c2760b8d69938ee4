"""Numerical checks of the lower-bound machinery behind :mod:`mmgmm.fitter`.

The bound at a reference model ``theta_t`` is

    s(theta | theta_t) = sum_ik w_ik^t g_ik(theta) + alpha_t,
    alpha_t = l(theta_t) - sum_ik w_ik^t g_ik(theta_t),

with ``w^t`` the responsibilities and ``g_ik`` the log-weighted densities.
It must never exceed the log-likelihood and must touch it at ``theta_t``.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from .fitter import FitConfig, FitTrace, ascent_ok, update_covariances, update_means, update_weights
from .gaussian import GaussianComponent
from .mixture import (
    DataSet,
    MixtureModel,
    log_likelihood,
    log_weighted_densities,
    responsibilities,
)
from .errors import DimensionMismatch
from .sampler import RandomSource

VIOLATION_RTOL = 1e-8
TANGENCY_RTOL = 1e-10
EQUIVALENCE_TOL = 1e-12
MEAN_PERTURB_SCALE = 0.5
COV_SCALE_RANGE = (0.5, 2.0)


@dataclass
class SurrogateReport:
    theta_t_loglik: float
    surrogate_at_theta_t: float
    trial_points: int
    violations: int
    max_violation: float

    @property
    def tangency_gap(self) -> float:
        return abs(self.surrogate_at_theta_t - self.theta_t_loglik)

    @property
    def tangent(self) -> bool:
        return self.tangency_gap <= TANGENCY_RTOL * (1.0 + abs(self.theta_t_loglik))

    def summary(self) -> str:
        return (
            f"loglik(theta_t)      {self.theta_t_loglik:.17g}\n"
            f"surrogate(theta_t)   {self.surrogate_at_theta_t:.17g}\n"
            f"tangency gap         {self.tangency_gap:.3e}\n"
            f"trial points         {self.trial_points}\n"
            f"violations           {self.violations}\n"
            f"max violation        {self.max_violation:.3e}"
        )


def _same_shape(m: MixtureModel, m_t: MixtureModel, data: DataSet):
    if m.k != m_t.k or m.dim != m_t.dim or data.dim != m.dim:
        raise DimensionMismatch(
            f"models (k={m.k}, d={m.dim}) and (k={m_t.k}, d={m_t.dim}) on data of dimension {data.dim}"
        )


class Surrogate:
    """The bound at `m_t` with responsibilities and ``alpha_t`` cached."""

    def __init__(self, m_t: MixtureModel, data):
        self.m_t = m_t
        self.data = DataSet.coerce(data)
        g_t = log_weighted_densities(m_t, self.data)
        self.w = responsibilities(m_t, self.data)
        self.loglik_t = log_likelihood(m_t, self.data)
        self.alpha = self.loglik_t - float(np.sum(self.w * g_t))

    def __call__(self, m: MixtureModel) -> float:
        _same_shape(m, self.m_t, self.data)
        return float(np.sum(self.w * log_weighted_densities(m, self.data))) + self.alpha


def surrogate_value(m: MixtureModel, m_t: MixtureModel, data) -> float:
    data = DataSet.coerce(data)
    _same_shape(m, m_t, data)
    return Surrogate(m_t, data)(m)


def random_trial_model(m_t: MixtureModel, spread: np.ndarray, rng: RandomSource) -> MixtureModel:
    """Perturb means by ``0.5 * spread`` noise, rescale covariances, redraw weights."""
    gen = rng.generator
    lo, hi = np.log(COV_SCALE_RANGE[0]), np.log(COV_SCALE_RANGE[1])
    comps = []
    for c in m_t.components:
        mean = c.mean + MEAN_PERTURB_SCALE * spread * gen.standard_normal(c.dim)
        comps.append(GaussianComponent(mean, c.cov.scaled(math.exp(gen.uniform(lo, hi)))))
    w = gen.dirichlet(np.ones(m_t.k))
    w = update_weights(w[None, :], m_t.weight_floor)
    return MixtureModel(w, comps, weight_floor=m_t.weight_floor)


def check_minorization(
    m_t: MixtureModel, data, trials: int, seed: int = 0, include_base: bool = False
) -> SurrogateReport:
    """Evaluate bound minus log-likelihood at seeded random trial models.

    With ``include_base`` the reference model itself is the first trial.
    """
    data = DataSet.coerce(data)
    bound = Surrogate(m_t, data)
    report = SurrogateReport(
        theta_t_loglik=bound.loglik_t,
        surrogate_at_theta_t=bound(m_t),
        trial_points=0,
        violations=0,
        max_violation=-math.inf,
    )
    spread = data.samples.std(axis=0)
    spread = np.where(spread > 0, spread, 1.0)
    rng = RandomSource(seed)
    for t in range(trials):
        m = m_t if include_base and t == 0 else random_trial_model(m_t, spread, rng)
        ll = log_likelihood(m, data)
        gap = bound(m) - ll
        report.trial_points += 1
        report.max_violation = max(report.max_violation, gap)
        if gap > VIOLATION_RTOL * (1.0 + abs(ll)):
            report.violations += 1
    return report


def check_ascent(trace: FitTrace) -> bool:
    """True iff the trace never drops by more than the allowed slack, skipping rescued steps."""
    ll = trace.loglik
    rescued = trace.rescued or [False] * len(ll)
    return all(
        rescued[t + 1] or ascent_ok(ll[t], ll[t + 1]) for t in range(len(ll) - 1)
    )


def gamma_responsibilities(m: MixtureModel, data) -> np.ndarray:
    """Posterior ratios from linear-scale weighted densities.

    Uses dense inverses and determinants, deliberately independent of the
    Cholesky/log-space route in :func:`mmgmm.mixture.responsibilities`. Each
    row's exponents are shifted by that row's largest exponent before
    exponentiating, so the common factor cancels in the ratio.
    """
    data = DataSet.coerce(data)
    x = data.samples
    d = m.dim
    covs = m.covariances
    expo = np.empty((data.n, m.k))
    pref = np.empty(m.k)
    for k in range(m.k):
        inv = np.linalg.inv(covs[k])
        diff = x - m.components[k].mean
        expo[:, k] = -0.5 * np.einsum("ni,ij,nj->n", diff, inv, diff)
        pref[k] = m.weights[k] / math.sqrt((2.0 * math.pi) ** d * np.linalg.det(covs[k]))
    dens = pref * np.exp(expo - expo.max(axis=1, keepdims=True))
    return dens / dens.sum(axis=1, keepdims=True)


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    scale = np.max(np.abs(b))
    return float(np.max(np.abs(a - b)) / scale) if scale > 0 else float(np.max(np.abs(a - b)))


def update_equivalence_gaps(m_t: MixtureModel, data, cfg: FitConfig = FitConfig()) -> Dict[str, float]:
    """Largest differences between the two responsibility routes and their updates.

    ``resp`` is an absolute entrywise gap; the parameter gaps are relative
    to the largest entry of the log-space route's result.
    """
    data = DataSet.coerce(data)
    gam = gamma_responsibilities(m_t, data)
    w = responsibilities(m_t, data)
    gaps = {"resp": float(np.max(np.abs(gam - w)))}
    gaps["weights"] = _rel(update_weights(gam, cfg.weight_floor), update_weights(w, cfg.weight_floor))
    mu_g, mu_w = update_means(gam, data), update_means(w, data)
    gaps["means"] = _rel(mu_g, mu_w)
    cov_g = [s.to_matrix() for s in update_covariances(gam, data, mu_g, cfg.cov_floor)]
    cov_w = [s.to_matrix() for s in update_covariances(w, data, mu_w, cfg.cov_floor)]
    gaps["covariances"] = max(_rel(a, b) for a, b in zip(cov_g, cov_w))
    return gaps


def check_update_equivalence(m_t: MixtureModel, data, cfg: FitConfig = FitConfig()) -> bool:
    return all(v < EQUIVALENCE_TOL for v in update_equivalence_gaps(m_t, data, cfg).values())


def fd_mean_gradient(fn: Callable[[MixtureModel], float], m: MixtureModel, rel_step: float = 1e-5) -> np.ndarray:
    """Central finite differences of ``fn`` with respect to every mean coordinate.

    The step for coordinate value ``mu`` is ``rel_step * (1 + |mu|)``.
    """
    grad = np.zeros((m.k, m.dim))
    for k, c in enumerate(m.components):
        for a in range(m.dim):
            h = rel_step * (1.0 + abs(c.mean[a]))
            e = np.zeros(m.dim)
            e[a] = h
            comps_p = list(m.components)
            comps_m = list(m.components)
            comps_p[k] = c.shifted(e)
            comps_m[k] = c.shifted(-e)
            fp = fn(MixtureModel(m.weights, comps_p, weight_floor=m.weight_floor))
            fm = fn(MixtureModel(m.weights, comps_m, weight_floor=m.weight_floor))
            grad[k, a] = (fp - fm) / (2.0 * h)
    return grad


def loglik_mean_gradient(m: MixtureModel, data) -> np.ndarray:
    data = DataSet.coerce(data)
    return fd_mean_gradient(lambda mm: log_likelihood(mm, data), m)
