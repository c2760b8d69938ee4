import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import chi2

from mmgmm import GaussianComponent, MixtureModel, RandomSource
from mmgmm.mixture import sample_log_likelihoods
from mmgmm.sampler import sample_component, sample_dataset, sample_gaussian


def test_random_source_determinism():
    a, b = RandomSource(123), RandomSource(123)
    np.testing.assert_array_equal(a.standard_normal(10), b.standard_normal(10))
    assert not np.array_equal(RandomSource(1).random(5), RandomSource(2).random(5))


def test_substreams_are_independent_and_reproducible():
    root = RandomSource(9)
    s0, s1 = root.substream(0), root.substream(1)
    np.testing.assert_array_equal(s0.random(4), RandomSource(9).substream(0).random(4))
    assert not np.array_equal(RandomSource(9).substream(0).random(4), s1.random(4))


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_random_source_rejects_bad_seed(seed):
    with pytest.raises(ValueError):
        RandomSource(seed)


def test_degenerate_weights_always_first():
    rng = RandomSource(0)
    assert all(sample_component([1.0, 0.0], rng) == 0 for _ in range(1000))
    assert all(sample_component([1.0], rng) == 0 for _ in range(100))


def test_zero_weight_component_never_drawn():
    rng = RandomSource(4)
    assert all(sample_component([0.5, 0.0, 0.5], rng) != 1 for _ in range(5000))


def test_component_frequencies():
    rng = RandomSource(77)
    draws = [sample_component([0.5, 0.5], rng) for _ in range(100_000)]
    freq = draws.count(0) / len(draws)
    # 3 sigma binomial band is +-0.0047
    assert 0.49 <= freq <= 0.51


def test_gaussian_moments():
    c = GaussianComponent.from_covariance([0.0], [[1.0]])
    rng = RandomSource(5)
    x = np.array([sample_gaussian(c, rng)[0] for _ in range(100_000)])
    assert abs(x.mean()) < 0.01
    assert abs(x.var() - 1.0) < 0.02


def test_gaussian_collapsed_covariance():
    c = GaussianComponent.from_covariance([1.0, 2.0], 1e-6 * np.eye(2))
    np.testing.assert_allclose(sample_gaussian(c, RandomSource(1)), [1.0, 2.0], atol=1e-2)


def test_gaussian_determinism():
    c = GaussianComponent.from_covariance([1.0, 2.0], [[2.0, 0.5], [0.5, 1.0]])
    np.testing.assert_array_equal(sample_gaussian(c, RandomSource(3)), sample_gaussian(c, RandomSource(3)))


def test_dataset_single_component_labels():
    m = MixtureModel.from_arrays([1.0], [[0.0, 0.0]], [np.eye(2)])
    data, labels = sample_dataset(m, 50, RandomSource(0))
    assert data.n == 50 and data.dim == 2
    assert np.all(labels == 0)


def test_dataset_label_conditional_means(two_cluster_1d):
    _, data, labels = two_cluster_1d
    x = data.samples[:, 0]
    assert abs(x[labels == 0].mean() + 10) < 0.2
    assert abs(x[labels == 1].mean() - 10) < 0.2


def test_dataset_determinism():
    m = MixtureModel.from_arrays([0.3, 0.7], [[-1.0], [2.0]], [[[1.0]], [[0.5]]])
    a, la = sample_dataset(m, 200, RandomSource(99))
    b, lb = sample_dataset(m, 200, 99)
    np.testing.assert_array_equal(a.samples, b.samples)
    np.testing.assert_array_equal(la, lb)


def test_dataset_rejects_zero_count():
    m = MixtureModel.from_arrays([1.0], [[0.0]], [[[1.0]]])
    with pytest.raises(ValueError):
        sample_dataset(m, 0, RandomSource(0))


def test_histogram_matches_model_density():
    m = MixtureModel.from_arrays([0.35, 0.65], [[-3.0], [4.0]], [[[1.0]], [[4.0]]])
    n = 100_000
    data, _ = sample_dataset(m, n, RandomSource(2025))
    edges = np.linspace(-8.0, 12.0, 21)
    counts, _ = np.histogram(data.samples[:, 0], bins=edges)
    probs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        grid = np.linspace(lo, hi, 401)
        probs.append(trapezoid(np.exp(sample_log_likelihoods(m, grid[:, None])), grid))
    probs = np.array(probs)
    expected = n * probs
    stat = np.sum((counts - expected) ** 2 / expected)
    assert stat < chi2.ppf(0.999, df=19)
