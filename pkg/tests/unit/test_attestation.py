"""
Unit tests for split verification and the post-run cross-check.
"""

import random

import pytest

from src.rankstat_mpc.committee import ProtocolAbort, WorkerBehaviour, WorkerCommittee
from src.rankstat_mpc.rank_core import make_registration, make_submission, new_search
from src.rankstat_mpc.simulation.attestation import (
    SplitRound,
    assigned_indices,
    cross_check,
    verification_split,
    worker_signing_key,
)
from src.rankstat_mpc.transport import MessageBus
from src.rankstat_mpc.zkp import ProofKind

pytestmark = [pytest.mark.unit, pytest.mark.crypto]

RUN_ID = "run-attest"


@pytest.fixture(scope="module")
def round_inputs(params):
    rng = random.Random(21)
    state = new_search(0, 8, 5)
    enc_xs, honest, corrupted = {}, [], []
    for i, x in enumerate([1, 2, 3, 4, 5], start=1):
        uid = f"user-{i}"
        reg, r_x = make_registration(params, uid, x, 0, 8, rng)
        enc_xs[uid] = reg.enc_x
        sub = make_submission(params, uid, x, r_x, state, 2, rng)
        honest.append(sub)
        if uid == "user-2":
            sub = make_submission(params, uid, x, r_x, state, 2, rng, corrupt=ProofKind.MBS)
        corrupted.append(sub)
    return state, enc_xs, honest, corrupted


def test_assigned_indices():
    assert assigned_indices(5, 1, 3) == (0, 3)
    assert assigned_indices(5, 2, 3) == (1, 4)
    assert assigned_indices(5, 3, 3) == (2,)


def test_signing_keys_are_deterministic():
    first = worker_signing_key(7, 1).public_key().public_bytes_raw()
    assert first == worker_signing_key(7, 1).public_key().public_bytes_raw()
    assert first != worker_signing_key(7, 2).public_key().public_bytes_raw()


def test_honest_split(params, shares, round_inputs):
    state, enc_xs, honest, _ = round_inputs
    committee = WorkerCommittee(params, shares, MessageBus(), seed=0)
    attestations = verification_split(params, honest, enc_xs, state, 2, committee, RUN_ID)
    assert [a.indices for a in attestations] == [(0, 3), (1, 4), (2,)]
    rounds = [SplitRound(state, tuple(honest), tuple(attestations))]
    assert cross_check(params, rounds, enc_xs, 2, 0, RUN_ID) == []


def test_invalid_submission_aborts(params, shares, round_inputs):
    state, enc_xs, _, corrupted = round_inputs
    committee = WorkerCommittee(params, shares, MessageBus(), seed=0)
    with pytest.raises(ProtocolAbort) as excinfo:
        verification_split(params, corrupted, enc_xs, state, 2, committee, RUN_ID)
    assert excinfo.value.culprit == "user-2"


def test_lazy_worker_is_named(params, shares, round_inputs):
    state, enc_xs, _, corrupted = round_inputs
    committee = WorkerCommittee(
        params, shares, MessageBus(), seed=0,
        behaviours={2: WorkerBehaviour(skip_verification=True)},
    )
    attestations = verification_split(params, corrupted, enc_xs, state, 2, committee, RUN_ID)
    rounds = [SplitRound(state, tuple(corrupted), tuple(attestations))]
    findings = cross_check(params, rounds, enc_xs, 2, 0, RUN_ID)
    assert [f.worker for f in findings] == ["worker-2"]
    assert "user-2" in findings[0].reason


def test_tampered_attestation(params, shares, round_inputs):
    state, enc_xs, honest, _ = round_inputs
    committee = WorkerCommittee(params, shares, MessageBus(), seed=0)
    attestations = verification_split(params, honest, enc_xs, state, 2, committee, RUN_ID)
    rounds = [SplitRound(state, tuple(honest), tuple(attestations))]
    findings = cross_check(params, rounds, enc_xs, 2, 0, "run-other")
    assert {f.reason for f in findings} == {"invalid attestation signature"}
    assert len(findings) == 3
