"""
Integration tests: full interactive runs over 512-bit keys, honest and
adversarial, checked against the plaintext mirror.
"""

from dataclasses import replace
import random

import pytest

from src.rankstat_mpc.audit import AuditEventType, ProtocolAuditLogger
from src.rankstat_mpc.simulation import (
    AdversaryScript,
    ScenarioError,
    SimConfig,
    load_adversary_file,
    mirror_search,
    run_scenario,
)
from src.rankstat_mpc.zkp import ProofKind

pytestmark = [pytest.mark.integration, pytest.mark.crypto]

EXAMPLE = SimConfig(users=5, workers=3, low=0, high=8, bits=512, data="list", values=(1, 2, 3, 4, 5))


class TestHonestRuns:
    def test_example(self):
        report = run_scenario(EXAMPLE)
        assert report.result == 3
        assert report.true_value == 3
        assert report.z_history == [-3, 1]
        assert [float(g) for g in report.guesses] == [4.5, 2.5]
        assert report.rounds_used == 2
        assert report.communication_rounds == 2
        assert report.abort_info is None
        assert not report.degraded

    def test_scenario_file(self, fixtures_dir):
        report = run_scenario(SimConfig.load_from_file(fixtures_dir / "scenario_example.txt"))
        assert report.result == 3

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_matches_mirror(self, seed):
        rng = random.Random(seed)
        values = tuple(rng.randint(0, 30) for _ in range(2 * rng.randint(1, 3) + 1))
        cfg = replace(EXAMPLE, high=30, values=values, users=len(values))
        report = run_scenario(cfg)
        mirror = mirror_search(values, 0, 30)
        assert report.result == mirror.result
        assert report.z_history == mirror.z_history

    def test_early_stop(self):
        report = run_scenario(replace(EXAMPLE, optimizations=("early_stop",)))
        assert report.result == 3

    def test_speculation_saves_round_trips(self):
        report = run_scenario(replace(EXAMPLE, optimizations=("speculate:1",)))
        assert report.result == 3
        assert report.rounds_used == 2
        assert report.communication_rounds == 1

    def test_moments_initialisation(self):
        report = run_scenario(replace(EXAMPLE, optimizations=("moments",)))
        assert report.moments is not None
        assert report.moments.mu == 3
        assert report.moments.variance == 2
        assert report.result is not None
        assert abs(report.result - 3) <= 1

    def test_percentile(self):
        report = run_scenario(replace(EXAMPLE, percentile=80.0))
        assert report.true_value == 4
        assert report.result == mirror_search(EXAMPLE.values, 0, 8, k=4).result

    def test_early_quit_degrades(self):
        scripts = [AdversaryScript("user-5", "early_quit", round=2)]
        report = run_scenario(EXAMPLE, scripts)
        assert report.degraded
        assert report.abort_info is None
        assert report.result == 3

    def test_plaintext_path_rejects_scripts(self):
        with pytest.raises(ScenarioError):
            run_scenario(
                replace(EXAMPLE, full_crypto=False), [AdversaryScript("user-1", "early_quit")]
            )


class TestAborts:
    def test_inconsistent_sign(self, fixtures_dir):
        scripts = load_adversary_file(fixtures_dir / "adversary" / "inconsistent_sign.txt")
        report = run_scenario(EXAMPLE, scripts)
        assert report.result is None
        assert report.abort_info["culprit"] == "user-2"

    def test_invalid_nonzero_proof(self):
        scripts = [AdversaryScript("user-3", "invalid_proof", ProofKind.NZ, 1)]
        report = run_scenario(EXAMPLE, scripts)
        assert report.abort_info["culprit"] == "user-3"
        assert "zkpNZ" in report.abort_info["reason"]

    def test_out_of_range_input(self):
        report = run_scenario(EXAMPLE, [AdversaryScript("user-1", "out_of_range_input", round=0)])
        assert report.abort_info["culprit"] == "user-1"
        assert report.rounds_used == 0

    def test_invalid_registration_proof(self):
        report = run_scenario(EXAMPLE, [AdversaryScript("user-4", "invalid_proof", ProofKind.RG, 0)])
        assert report.abort_info["culprit"] == "user-4"

    def test_forged_partial_decryption(self, fixtures_dir):
        scripts = load_adversary_file(fixtures_dir / "adversary" / "forged_partial_decryption.txt")
        report = run_scenario(EXAMPLE, scripts)
        assert report.result is None
        assert report.abort_info["culprit"] == "worker-2"

    def test_too_many_corrupted_users(self):
        scripts = [AdversaryScript(f"user-{i}", "early_quit", round=2) for i in (1, 2, 3)]
        with pytest.raises(ScenarioError):
            run_scenario(EXAMPLE, scripts)


class TestSplitVerification:
    def test_honest(self):
        report = run_scenario(replace(EXAMPLE, optimizations=("split",)))
        assert report.result == 3
        assert report.cross_check == []

    def test_lazy_worker_is_named_after_the_run(self, fixtures_dir):
        scripts = load_adversary_file(fixtures_dir / "adversary" / "lazy_worker.txt")
        report = run_scenario(replace(EXAMPLE, optimizations=("split",)), scripts)
        assert report.result is None
        assert report.abort_info["culprit"] == "worker-2"
        assert report.cross_check[0]["worker"] == "worker-2"

    def test_invalid_user_is_caught_by_its_verifier(self):
        scripts = [AdversaryScript("user-2", "invalid_proof", ProofKind.MBS, 1)]
        report = run_scenario(replace(EXAMPLE, optimizations=("split",)), scripts)
        assert report.abort_info["culprit"] == "user-2"


class TestTranscripts:
    def test_runs_are_deterministic(self):
        first = run_scenario(EXAMPLE)
        second = run_scenario(EXAMPLE)
        assert first.run_id == second.run_id
        assert first.transcript_digest == second.transcript_digest
        assert first.to_dict() == second.to_dict()

    def test_seed_changes_transcript(self):
        assert run_scenario(EXAMPLE).transcript_digest != run_scenario(
            replace(EXAMPLE, seed=9)
        ).transcript_digest

    def test_audit_database_replays_transcript(self, tmp_path):
        db_path = tmp_path / "audit.db"
        report = run_scenario(EXAMPLE, audit_db=db_path)
        audit = ProtocolAuditLogger(db_path, report.run_id)
        assert audit.transcript_digest() == report.transcript_digest
        assert len(audit.get_events(event_type=AuditEventType.RUN_START)) == 1
        assert len(audit.get_events(event_type=AuditEventType.RUN_END)) == 1

    def test_abort_is_audited(self, tmp_path, fixtures_dir):
        db_path = tmp_path / "audit.db"
        scripts = load_adversary_file(fixtures_dir / "adversary" / "inconsistent_sign.txt")
        report = run_scenario(EXAMPLE, scripts, audit_db=db_path)
        aborts = ProtocolAuditLogger(db_path, report.run_id).get_events(
            event_type=AuditEventType.ABORT
        )
        assert [event["actor"] for event in aborts] == ["user-2"]
