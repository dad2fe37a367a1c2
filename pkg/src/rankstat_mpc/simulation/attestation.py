"""
Split verification with signed batch attestations.

Worker j checks only the submissions with index mod J == j - 1 and signs
its verdicts with an Ed25519 key. After the run every batch is re-checked;
a worker whose signed batch passed an invalid submission is named.
"""

import hashlib
import logging
from collections.abc import Sequence
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric import ed25519

from ..committee import ProtocolAbort, WorkerCommittee
from ..rank_core import L1_KINDS, SearchState, SignSubmission, verify_submission
from ..threshold_paillier import Ciphertext, PublicParams, ScaleFactor
from ..utils.seeding import derive_seed_bytes
from ..wire import ByteWriter, MessageKind, worker_actor

logger = logging.getLogger(__name__)


def worker_signing_key(seed: int, index: int) -> ed25519.Ed25519PrivateKey:
    """Deterministic attestation key of worker `index` for a seeded run."""
    return ed25519.Ed25519PrivateKey.from_private_bytes(
        derive_seed_bytes(seed, f"attest:{worker_actor(index)}")
    )


@dataclass(frozen=True)
class BatchAttestation:
    """Worker's signed verdicts over its share of one round's submissions."""

    worker: int
    round: int
    indices: tuple[int, ...]
    verdicts: tuple[bool, ...]
    digest: bytes
    signature: bytes = b""

    def message(self, run_id: str) -> bytes:
        writer = (
            ByteWriter()
            .write_bytes(run_id.encode())
            .write_int(self.worker, 1)
            .write_int(self.round, 4)
            .write_int(len(self.indices), 4)
        )
        for index, verdict in zip(self.indices, self.verdicts, strict=True):
            writer.write_int(index, 4).write_int(int(verdict), 1)
        return writer.write_bytes(self.digest).getvalue()

    def encode(self, run_id: str) -> bytes:
        return self.message(run_id) + self.signature


def _batch_digest(subs: Sequence[SignSubmission], bits: int) -> bytes:
    digest = hashlib.sha256()
    for sub in subs:
        digest.update(sub.encode(bits))
    return digest.digest()


def assigned_indices(count: int, worker: int, J: int) -> tuple[int, ...]:
    return tuple(i for i in range(count) if i % J == worker - 1)


def verification_split(
    params: PublicParams,
    subs: Sequence[SignSubmission],
    enc_xs: dict[str, Ciphertext],
    state: SearchState,
    eta: ScaleFactor | int,
    committee: WorkerCommittee,
    run_id: str,
) -> list[BatchAttestation]:
    """
    Verify a round's submissions split across the workers.

    Returns:
        One signed attestation per worker

    Raises:
        ProtocolAbort: a worker's assigned submission failed verification
    """
    attestations = []
    for j in committee.indices:
        indices = assigned_indices(len(subs), j, committee.J)
        batch = [subs[i] for i in indices]
        if committee.behaviour(j).skip_verification:
            verdicts = tuple(True for _ in indices)
        else:
            verdicts = tuple(
                not verify_submission(params, subs[i], enc_xs[subs[i].user_id], state, eta)
                for i in indices
            )
            committee.ledger.count_proofs(
                state.round, [kind.name for _ in indices for kind in L1_KINDS], verified=True
            )
        digest = _batch_digest(batch, params.bits)
        unsigned = BatchAttestation(j, state.round, indices, verdicts, digest)
        signature = worker_signing_key(committee.seed, j).sign(unsigned.message(run_id))
        attestation = BatchAttestation(j, state.round, indices, verdicts, digest, signature)
        committee.broadcast(j, MessageKind.ATTESTATION, state.round, attestation.encode(run_id))
        attestations.append(attestation)

    for attestation in attestations:
        for index, ok in zip(attestation.indices, attestation.verdicts, strict=True):
            if not ok:
                culprit = subs[index].user_id
                logger.warning(
                    f"{worker_actor(attestation.worker)} rejected the submission of {culprit}"
                )
                raise ProtocolAbort(culprit, "submission rejected in split verification")
    return attestations


@dataclass(frozen=True)
class SplitRound:
    """What the cross-check needs from one communication round."""

    state: SearchState
    subs: tuple[SignSubmission, ...]
    attestations: tuple[BatchAttestation, ...]


@dataclass(frozen=True)
class CrossCheckFinding:
    worker: str
    round: int
    reason: str


def cross_check(
    params: PublicParams,
    rounds: Sequence[SplitRound],
    enc_xs: dict[str, Ciphertext],
    eta: ScaleFactor | int,
    seed: int,
    run_id: str,
) -> list[CrossCheckFinding]:
    """
    Re-verify every signed batch of a run.

    A batch is blamed when its signature is invalid, its digest does not
    cover the submissions, or it marks an invalid submission as valid.
    """
    findings = []
    for entry in rounds:
        state, subs = entry.state, entry.subs
        for attestation in entry.attestations:
            worker = worker_actor(attestation.worker)
            public_key = worker_signing_key(seed, attestation.worker).public_key()
            try:
                public_key.verify(attestation.signature, attestation.message(run_id))
            except InvalidSignature:
                findings.append(
                    CrossCheckFinding(worker, state.round, "invalid attestation signature")
                )
                continue
            batch = [subs[i] for i in attestation.indices]
            if _batch_digest(batch, params.bits) != attestation.digest:
                findings.append(
                    CrossCheckFinding(worker, state.round, "attestation digest mismatch")
                )
                continue
            for index, verdict in zip(attestation.indices, attestation.verdicts, strict=True):
                sub = subs[index]
                reasons = verify_submission(params, sub, enc_xs[sub.user_id], state, eta)
                if verdict and reasons:
                    findings.append(
                        CrossCheckFinding(
                            worker,
                            state.round,
                            f"signed batch passed an invalid submission of {sub.user_id}",
                        )
                    )
                    break
    for finding in findings:
        logger.warning(f"Cross-check: {finding.worker} in round {finding.round}: {finding.reason}")
    return findings