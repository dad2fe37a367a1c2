"""
In-process message bus and cost ledger.

Every frame is encoded with the wire codec before delivery, so the byte
counts in the ledger are the sizes of real serialized messages.
"""

import hashlib
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from .wire import FRAME_HEADER_BYTES, Frame

if TYPE_CHECKING:
    from .audit import ProtocolAuditLogger

logger = logging.getLogger(__name__)

OPS = ("enc", "dec", "mul", "add")


@dataclass
class CostLedger:
    """Per-actor byte counters and per-round operation counts."""

    bytes_out: Counter = field(default_factory=Counter)
    bytes_in: Counter = field(default_factory=Counter)
    header_bytes_out: Counter = field(default_factory=Counter)
    table_bytes_out: Counter = field(default_factory=Counter)
    messages_out: Counter = field(default_factory=Counter)
    round_payload_out: dict[int, Counter] = field(default_factory=lambda: defaultdict(Counter))
    round_table_out: dict[int, Counter] = field(default_factory=lambda: defaultdict(Counter))
    round_ops: dict[int, Counter] = field(default_factory=lambda: defaultdict(Counter))
    proofs_generated: dict[int, Counter] = field(default_factory=lambda: defaultdict(Counter))
    proofs_verified: dict[int, Counter] = field(default_factory=lambda: defaultdict(Counter))

    def record_frame(self, frame: Frame, table_bytes: int | None = None) -> None:
        size = frame.size
        self.bytes_out[frame.sender] += size
        self.header_bytes_out[frame.sender] += FRAME_HEADER_BYTES
        self.messages_out[frame.sender] += 1
        table = len(frame.payload) if table_bytes is None else table_bytes
        self.table_bytes_out[frame.sender] += table
        self.round_payload_out[frame.round][frame.sender] += len(frame.payload)
        self.round_table_out[frame.round][frame.sender] += table
        for receiver in frame.receivers:
            self.bytes_in[receiver] += size

    def count_op(self, round_no: int, op: str, amount: int = 1) -> None:
        if op not in OPS:
            raise ValueError(f"unknown operation {op!r}")
        self.round_ops[round_no][op] += amount

    def count_proofs(self, round_no: int, kinds: list[str], verified: bool = False) -> None:
        target = self.proofs_verified if verified else self.proofs_generated
        for kind in kinds:
            target[round_no][kind] += 1

    def payload_out(self, actor: str) -> int:
        return self.bytes_out[actor] - self.header_bytes_out[actor]

    def ops_for_round(self, round_no: int) -> dict[str, int]:
        counts = self.round_ops.get(round_no, Counter())
        return {op: counts.get(op, 0) for op in OPS}

    def to_dict(self) -> dict[str, Any]:
        """Stable-ordered summary."""
        return {
            "bytes_out": dict(sorted(self.bytes_out.items())),
            "bytes_in": dict(sorted(self.bytes_in.items())),
            "header_bytes_out": dict(sorted(self.header_bytes_out.items())),
            "table_bytes_out": dict(sorted(self.table_bytes_out.items())),
            "messages_out": dict(sorted(self.messages_out.items())),
            "round_ops": {
                str(r): self.ops_for_round(r) for r in sorted(self.round_ops)
            },
            "proofs_generated": {
                str(r): dict(sorted(c.items())) for r, c in sorted(self.proofs_generated.items())
            },
            "proofs_verified": {
                str(r): dict(sorted(c.items())) for r, c in sorted(self.proofs_verified.items())
            },
        }


class MessageBus:
    """
    Deterministic in-process bus.

    Frames are delivered in send order; the encoded bytes form the run
    transcript, optionally persisted through the audit logger.
    """

    def __init__(
        self,
        ledger: CostLedger | None = None,
        audit: "ProtocolAuditLogger | None" = None,
    ) -> None:
        self.ledger = ledger or CostLedger()
        self.audit = audit
        self.frames: list[Frame] = []
        self._inboxes: dict[str, list[Frame]] = defaultdict(list)
        self._transcript = hashlib.sha256()

    def send(self, frame: Frame, table_bytes: int | None = None) -> Frame:
        encoded = frame.encode()
        self._transcript.update(encoded)
        self.frames.append(frame)
        self.ledger.record_frame(frame, table_bytes)
        for receiver in frame.receivers:
            self._inboxes[receiver].append(frame)
        if self.audit is not None:
            self.audit.log_frame(frame)
        return frame

    def drain(self, actor: str) -> list[Frame]:
        """Remove and return the actor's pending frames."""
        frames = self._inboxes.pop(actor, [])
        return frames

    def transcript_bytes(self) -> bytes:
        return b"".join(frame.encode() for frame in self.frames)

    def transcript_digest(self) -> str:
        return self._transcript.hexdigest()
