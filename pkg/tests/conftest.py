import time

import pytest

from kljn.harness import ExperimentConfig, monte_carlo

BILATERAL = ExperimentConfig(trials=1000, bep_samples=2000, attack_mode="bilateral")
UNILATERAL = ExperimentConfig(trials=500, bep_samples=10_000, attack_mode="unilateral")


def _timed(cfg):
    t0 = time.perf_counter()
    exp = monte_carlo(cfg)
    return exp, time.perf_counter() - t0


@pytest.fixture(scope="session")
def bilateral_run():
    return _timed(BILATERAL)


@pytest.fixture(scope="session")
def bilateral_experiment(bilateral_run):
    return bilateral_run[0]


@pytest.fixture(scope="session")
def unilateral_experiment():
    return monte_carlo(UNILATERAL)
