"""
Fiat-Shamir Transcripts

Domain-separated SHA-256 transcripts turning the Sigma-protocols into
non-interactive proofs.
"""

import hashlib
from dataclasses import dataclass, field

DOMAIN_PREFIX = b"rankstat-fs/v1"
_EXTRA_BITS = 128


@dataclass
class FsTranscript:
    """Ordered list of byte strings absorbed under a per-kind tag."""

    domain_tag: str
    absorbed: list[bytes] = field(default_factory=list)

    def absorb(self, data: bytes) -> "FsTranscript":
        self.absorbed.append(bytes(data))
        return self

    def absorb_int(self, value: int, width: int) -> "FsTranscript":
        return self.absorb(int(value).to_bytes(width, "big"))

    def absorb_ints(self, values: tuple[int, ...] | list[int], width: int) -> "FsTranscript":
        for value in values:
            self.absorb_int(value, width)
        return self

    def seed(self) -> bytes:
        tag = self.domain_tag.encode("ascii")
        digest = hashlib.sha256(DOMAIN_PREFIX)
        digest.update(len(tag).to_bytes(2, "big"))
        digest.update(tag)
        for item in self.absorbed:
            digest.update(len(item).to_bytes(4, "big"))
            digest.update(item)
        return digest.digest()


def _expand(seed: bytes, length: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < length:
        out += hashlib.sha256(seed + counter.to_bytes(4, "big")).digest()
        counter += 1
    return bytes(out[:length])


def fiat_shamir_challenge(transcript: FsTranscript, bound: int) -> int:
    """
    Derive a challenge in [0, bound) from the transcript.

    The hash stream is expanded to 128 bits beyond the bound so the modular
    reduction is statistically close to uniform.
    """
    if bound < 2:
        raise ValueError(f"challenge bound must be >= 2, got {bound}")
    length = (bound.bit_length() + _EXTRA_BITS + 7) // 8
    return int.from_bytes(_expand(transcript.seed(), length), "big") % bound


def transcript_digest(transcript: FsTranscript) -> int:
    """256-bit digest of a transcript as an integer (the zkpRG hash value)."""
    return int.from_bytes(transcript.seed(), "big")
