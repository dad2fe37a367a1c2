"""
Integration tests: measured communication and operation counts against the
closed-form cost model.
"""

from dataclasses import replace

import pytest

from src.rankstat_mpc.simulation import SimConfig, account_costs, run_scenario
from src.rankstat_mpc.simulation.costs import (
    PD_NOTE,
    CostRow,
    expected_ops,
    kb_to_bytes,
    nirank_wire_allowance,
)

pytestmark = [pytest.mark.integration, pytest.mark.crypto]

EXAMPLE = SimConfig(values=(1, 2, 3, 4, 5), high=8, bits=512)


def test_formulas():
    assert kb_to_bytes(6.25, 512) == 1600
    assert kb_to_bytes(15, 2048) == 15360
    assert expected_ops("irank", 5) == {"enc": 0, "dec": 1, "mul": 0, "add": 4}
    assert expected_ops("nirank", 5) == {"enc": 5, "dec": 6, "mul": 10, "add": 4}


@pytest.mark.parametrize("protocol", ["irank", "nirank"])
def test_costs_match(protocol):
    cfg = replace(EXAMPLE, protocol=protocol)
    report = run_scenario(cfg)
    rows = account_costs(report, cfg)
    assert [row.to_dict() for row in rows if row.ok is False] == []
    checks = {row.check for row in rows}
    assert "round 1 dec count" in checks
    if protocol == "irank":
        assert "user outbound (registration + submissions)" in checks
    else:
        assert "worker outbound round 1" in checks


def test_irank_user_bytes():
    report = run_scenario(EXAMPLE)
    for user in ("user-1", "user-5"):
        assert report.ledger.payload_out(user) == 1600 + 3840 * report.rounds_used


def test_speculation_skips_bandwidth_formula():
    cfg = replace(EXAMPLE, optimizations=("speculate:1",))
    rows = account_costs(run_scenario(cfg), cfg)
    assert not any(row.check.startswith("user outbound") for row in rows)


def test_plaintext_report_has_no_ledger():
    cfg = replace(EXAMPLE, full_crypto=False)
    with pytest.raises(ValueError):
        account_costs(run_scenario(cfg), cfg)


def test_wire_allowance():
    # 7B+32 per user plus one closing decryption (share 2B, zkpPD 6B+32)
    assert nirank_wire_allowance(512, 5, announcer=False) == 5 * 480 + 544
    assert nirank_wire_allowance(512, 5, announcer=True) == 5 * 480 + 544 + 64
    assert nirank_wire_allowance(2048, 1, announcer=False) == 1824 + 2080


def test_nirank_worker_rows_compare_payload_bytes():
    cfg = replace(EXAMPLE, protocol="nirank")
    report = run_scenario(cfg)
    rows = [row for row in account_costs(report, cfg) if row.check.startswith("worker outbound")]
    assert len(rows) == report.rounds_used * 3
    for row in rows:
        assert row.expected == kb_to_bytes(5.75 * 5, 512)
        assert row.measured == report.ledger.round_payload_out[int(row.check.rsplit(" ", 1)[1])][row.actor]
        assert row.difference == row.allowance > 0
        assert row.note == PD_NOTE
        assert row.to_dict()["note"] == PD_NOTE
    announcers = {row.actor for row in rows if row.allowance > rows[-1].allowance}
    assert announcers <= {"worker-1"}


def test_unexplained_worker_bytes_fail():
    row = CostRow("worker outbound round 1", "worker-2", 1000, 1301, allowance=300)
    assert row.difference == 301
    assert row.ok is False
    assert CostRow("worker outbound round 1", "worker-2", 1000, 1300, allowance=300).ok is True


def test_split_verification_skips_worker_rows():
    cfg = replace(EXAMPLE, protocol="nirank", optimizations=("split",))
    rows = account_costs(run_scenario(cfg), cfg)
    assert not any(row.check.startswith("worker outbound") for row in rows)
