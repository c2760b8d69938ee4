"""Draw synthetic data from a mixture by first picking a component, then a point.

Random streams come from numpy's PCG64 bit generator seeded with a 64-bit
integer; standard normals use numpy's ziggurat transform
(``Generator.standard_normal``). Both are fixed for a given numpy release,
so a seed reproduces the same data set on a given build.
"""
from typing import Tuple, Union

import numpy as np

from .gaussian import GaussianComponent
from .mixture import DataSet, MixtureModel


class RandomSource:
    """Seeded PCG64 stream. Not thread-safe; use :meth:`substream` per worker."""

    def __init__(self, seed: int = 0, _spawn_key: tuple = ()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._spawn_key = tuple(_spawn_key)
        ss = np.random.SeedSequence(seed, spawn_key=self._spawn_key)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def substream(self, index: int) -> "RandomSource":
        """Independent stream determined by ``(seed, index)`` alone."""
        return RandomSource(self.seed, self._spawn_key + (int(index),))

    def random(self, size=None):
        return self.generator.random(size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream={self._spawn_key})"


RngLike = Union[RandomSource, int]


def as_random_source(rng: RngLike) -> RandomSource:
    return rng if isinstance(rng, RandomSource) else RandomSource(rng)


def _pick(cumulative: np.ndarray, u):
    # first index whose cumulative weight exceeds u; zero-weight slots are never chosen
    idx = np.searchsorted(cumulative, u, side="right")
    return np.minimum(idx, cumulative.shape[0] - 1)


def sample_component(weights, rng: RngLike) -> int:
    """Draw a component index with probability proportional to `weights`."""
    rng = as_random_source(rng)
    cumulative = np.cumsum(np.asarray(weights, dtype=np.float64))
    cumulative /= cumulative[-1]
    return int(_pick(cumulative, rng.random()))


def sample_gaussian(c: GaussianComponent, rng: RngLike) -> np.ndarray:
    rng = as_random_source(rng)
    u = rng.standard_normal(c.dim)
    return c.mean + c.cov.chol_lower @ u


def sample_dataset(m: MixtureModel, n: int, rng: RngLike) -> Tuple[DataSet, np.ndarray]:
    """Draw `n` iid points and their generating component labels.

    Labels are drawn first (one uniform per sample), then one block of
    standard normals of shape ``(n, d)``.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rng = as_random_source(rng)
    cumulative = np.cumsum(m.weights)
    cumulative /= cumulative[-1]
    labels = _pick(cumulative, rng.random(n)).astype(np.int64)
    u = rng.standard_normal((n, m.dim))
    x = m.means[labels] + np.einsum("nij,nj->ni", m.chols[labels], u)
    return DataSet(x), labels
