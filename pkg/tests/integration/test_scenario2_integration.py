"""
Integration tests for users holding several inputs each.
"""

import pytest

from src.rankstat_mpc.simulation import AdversaryScript, SimConfig, run_scenario

pytestmark = [pytest.mark.integration, pytest.mark.crypto]


@pytest.fixture
def scenario2(fixtures_dir):
    return SimConfig.load_from_file(fixtures_dir / "scenario2_example.txt")


def test_same_result_as_single_inputs(scenario2):
    report = run_scenario(scenario2)
    single = run_scenario(SimConfig(values=(1, 2, 3, 4, 5), high=8))
    assert report.N == 5
    assert report.result == single.result == 3
    assert report.z_history == single.z_history


def test_frames_come_from_owners(scenario2):
    report = run_scenario(scenario2)
    senders = {actor for actor in report.ledger.bytes_out if actor.startswith("user-")}
    assert senders == {"user-1", "user-2", "user-3"}


def test_abort_blames_owner(scenario2):
    report = run_scenario(scenario2, [AdversaryScript("user-4", "inconsistent_sign", round=1)])
    assert report.result is None
    assert report.abort_info["culprit"] == "user-3"
    assert report.abort_info["input"] == "user-4"
