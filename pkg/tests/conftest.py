import numpy as np
import pytest

from mmgmm import MixtureModel, RandomSource, sample_dataset


def random_spd(gen, d, ridge=None):
    m = gen.normal(size=(d, d))
    return m.T @ m + (d if ridge is None else ridge) * np.eye(d)


def random_model(gen, k, d, spread=3.0):
    covs = [random_spd(gen, d, ridge=0.3) / d for _ in range(k)]
    return MixtureModel.from_arrays(gen.dirichlet(2.0 * np.ones(k)), gen.normal(0, spread, (k, d)), covs)


def random_instance(seed, k, d, n):
    """A random model plus data drawn from a *different* random model of the same shape."""
    gen = RandomSource(seed).generator
    truth = random_model(gen, k, d)
    data, _ = sample_dataset(truth, n, RandomSource(seed + 7919))
    return random_model(gen, k, d), data


@pytest.fixture
def gen():
    return np.random.default_rng(20240601)


@pytest.fixture
def two_cluster_1d():
    """Clusters at -10 and +10, unit variance, 500 samples each."""
    truth = MixtureModel.from_arrays([0.5, 0.5], [[-10.0], [10.0]], [[[1.0]], [[1.0]]])
    data, labels = sample_dataset(truth, 1000, RandomSource(11))
    return truth, data, labels


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1].split("[")[0]
        prev = _ACCEPTANCE.get(name, "PASS")
        _ACCEPTANCE[name] = "PASS" if prev == "PASS" and report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]}  {name}")
