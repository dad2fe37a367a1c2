"""
Worker Committee

The J workers holding key shares: distributed decryption with zkpPD checks,
frame broadcasting, and the identifiable-abort rule shared by the online and
offline protocols.
"""

import logging
import random
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TypeVar

from .config import CryptoConfig, get_crypto_config
from .threshold_paillier import (
    Ciphertext,
    PartialDecryption,
    PublicParams,
    SecretKeyShare,
    combine,
    partial_decrypt,
)
from .transport import CostLedger, MessageBus
from .utils.seeding import derive_rng
from .wire import ByteWriter, Frame, MessageKind, worker_actor
from .zkp import ProofKind, encode_proof_body, table_iv_size, verify_pd

logger = logging.getLogger(__name__)

T = TypeVar("T")


class ProtocolAbort(Exception):
    """Identifiable abort naming the actor whose message failed verification."""

    def __init__(self, culprit: str, reason: str) -> None:
        super().__init__(f"protocol aborted by {culprit}: {reason}")
        self.culprit = culprit
        self.reason = reason


@dataclass(frozen=True)
class WorkerBehaviour:
    """Scripted deviations of one worker."""

    forge_partial_decryption: bool = False
    corrupt_kinds: frozenset[ProofKind] = frozenset()
    skip_verification: bool = False


@dataclass
class WorkerCommittee:
    """Key-share holders of a run, indexed 1..J."""

    params: PublicParams
    shares: list[SecretKeyShare]
    bus: MessageBus = field(default_factory=MessageBus)
    seed: int = 0
    behaviours: dict[int, WorkerBehaviour] = field(default_factory=dict)
    config: CryptoConfig | None = None

    def __post_init__(self) -> None:
        if len(self.shares) != self.params.J:
            raise ValueError(f"committee needs {self.params.J} key shares, got {len(self.shares)}")
        self.config = self.config or get_crypto_config()
        self.rngs: dict[int, random.Random] = {
            share.index: derive_rng(self.seed, worker_actor(share.index)) for share in self.shares
        }

    @property
    def J(self) -> int:
        return self.params.J

    @property
    def indices(self) -> list[int]:
        return [share.index for share in self.shares]

    @property
    def actors(self) -> list[str]:
        return [worker_actor(j) for j in self.indices]

    @property
    def ledger(self) -> CostLedger:
        return self.bus.ledger

    def behaviour(self, index: int) -> WorkerBehaviour:
        return self.behaviours.get(index, WorkerBehaviour())

    def rng(self, index: int) -> random.Random:
        return self.rngs[index]

    def others(self, index: int) -> tuple[str, ...]:
        return tuple(worker_actor(j) for j in self.indices if j != index)

    def broadcast(
        self,
        index: int,
        kind: MessageKind,
        round_no: int,
        payload: bytes,
        table_bytes: int | None = None,
        extra_receivers: Sequence[str] = (),
    ) -> Frame:
        """Send a frame from worker `index` to every other worker (and extras)."""
        frame = Frame(
            kind=kind,
            sender=worker_actor(index),
            receivers=self.others(index) + tuple(extra_receivers),
            round=round_no,
            payload=payload,
        )
        return self.bus.send(frame, table_bytes)

    def check_all(self, checks: Sequence[Callable[[], T]]) -> list[T]:
        """Run independent verifications, in a thread pool when configured."""
        max_workers = self.config.max_workers if self.config else 1
        if max_workers <= 1 or len(checks) <= 1:
            return [check() for check in checks]
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(lambda check: check(), checks))

    def ddec(
        self,
        c: Ciphertext,
        round_no: int,
        count_op: bool = True,
        announce_to: Sequence[str] = (),
    ) -> int:
        """
        Distributed decryption.

        Every worker broadcasts its partial decryption with a zkpPD; all
        proofs are checked before combining.

        Args:
            c: Ciphertext to decrypt
            round_no: Round the frames belong to
            count_op: Record one decryption in the round's operation counts
            announce_to: Actors that receive the plaintext from worker 1

        Returns:
            The signed plaintext

        Raises:
            ProtocolAbort: a worker's zkpPD does not verify
        """
        bits = self.params.bits
        parts: list[PartialDecryption] = []
        proofs = []
        for share in self.shares:
            part, proof = partial_decrypt(self.params, share, c, self.rng(share.index))
            behaviour = self.behaviour(share.index)
            if behaviour.forge_partial_decryption:
                forged = self.params.random_unit(self.rng(share.index))
                part = PartialDecryption(share.index, forged * forged % self.params.n_sq)
            if ProofKind.PD in behaviour.corrupt_kinds:
                proof = proof.corrupted()
            payload = (
                ByteWriter()
                .write_int(part.share, self.params.squared_width)
                .write_bytes(encode_proof_body(proof, bits))
                .getvalue()
            )
            self.broadcast(
                share.index,
                MessageKind.PARTIAL_DECRYPTION,
                round_no,
                payload,
                table_bytes=table_iv_size(ProofKind.PD, bits),
            )
            parts.append(part)
            proofs.append(proof)
        self.ledger.count_proofs(round_no, ["PD"] * len(parts))

        verdicts = self.check_all(
            [
                (lambda part=part, proof=proof: verify_pd(self.params, c, part, proof))
                for part, proof in zip(parts, proofs, strict=True)
            ]
        )
        self.ledger.count_proofs(round_no, ["PD"] * len(parts), verified=True)
        for part, ok in zip(parts, verdicts, strict=True):
            if not ok:
                culprit = worker_actor(part.index)
                logger.warning(f"zkpPD from {culprit} rejected in round {round_no}")
                raise ProtocolAbort(culprit, "invalid zkpPD")

        value = combine(self.params, parts).value
        if count_op:
            self.ledger.count_op(round_no, "dec")
        if announce_to:
            result = ByteWriter().write_int(value % self.params.n, self.params.base_width).getvalue()
            self.bus.send(
                Frame(
                    kind=MessageKind.PLAINTEXT,
                    sender=worker_actor(self.indices[0]),
                    receivers=tuple(announce_to),
                    round=round_no,
                    payload=result,
                ),
                table_bytes=0,
            )
        return value
