"""
Integration tests for the accuracy experiment.
"""

import pytest

from src.rankstat_mpc.simulation import SimConfig, run_accuracy_experiment
from src.rankstat_mpc.simulation.mirror import mean_absolute_error

pytestmark = pytest.mark.integration


def test_plaintext_sweep():
    cfg = SimConfig(data="gaussian", users=101, high=200, mu=100, full_crypto=False)
    rows = run_accuracy_experiment(cfg, (25.0, 50.0, 75.0), (10.0, 20.0), trials=20)
    assert [(row.percentile, row.sigma) for row in rows] == [
        (25.0, 10.0), (50.0, 10.0), (75.0, 10.0),
        (25.0, 20.0), (50.0, 20.0), (75.0, 20.0),
    ]
    assert all(row.mae <= 1 for row in rows)


def test_mean_absolute_error():
    assert mean_absolute_error([3, 5], [3, 4]) == 0.5
    with pytest.raises(ValueError):
        mean_absolute_error([], [])


@pytest.mark.slow
@pytest.mark.crypto
def test_crypto_sweep():
    cfg = SimConfig(data="gaussian", users=7, high=200, mu=100, bits=512)
    rows = run_accuracy_experiment(cfg, (50.0,), (20.0,), trials=2)
    assert rows[0].trials == 2
    assert rows[0].mae <= 3


@pytest.mark.slow
def test_large_plaintext_sweep():
    cfg = SimConfig(data="gaussian", users=1001, high=200, mu=100, full_crypto=False)
    rows = run_accuracy_experiment(cfg, (10.0, 50.0, 90.0), (10.0, 30.0, 50.0), trials=100)
    assert all(row.mae <= 1 for row in rows)
