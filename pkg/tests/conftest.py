"""Shared fixtures: one 512-bit threshold key for the whole session."""

import random
from pathlib import Path

import pytest

from src.rankstat_mpc.committee import WorkerCommittee
from src.rankstat_mpc.simulation.harness import cached_keys
from src.rankstat_mpc.transport import MessageBus

TEST_BITS = 512
TEST_WORKERS = 3
FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def keys():
    return cached_keys(TEST_BITS, TEST_WORKERS, 0)


@pytest.fixture(scope="session")
def params(keys):
    return keys[0]


@pytest.fixture(scope="session")
def shares(keys):
    return list(keys[1])


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def committee(params, shares):
    return WorkerCommittee(params, shares, MessageBus(), seed=0)


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR
