"""
Proof serialization.

A proof body is its fixed-width fields in the order commitments,
challenge-or-hash, responses, masks. A standalone proof prefixes the body
with its kind byte; bundles carry bodies only, since the position in the
bundle fixes the kind.
"""

from ..wire import (
    ByteReader,
    ByteWriter,
    WireFormatError,
    base_width,
    squared_width,
    wide_width,
)
from .proofs import LAYOUTS, ProofKind, SigmaProof


def _response_width(kind: ProofKind, bits: int) -> int:
    return wide_width(bits) if LAYOUTS[kind].wide_response else base_width(bits)


def proof_size(kind: ProofKind, bits: int) -> int:
    """Serialized body size in bytes (no kind byte)."""
    layout = LAYOUTS[kind]
    size = layout.squared_elements * squared_width(bits)
    size += layout.responses * _response_width(kind, bits)
    if layout.has_digest:
        size += base_width(bits)
    return size


def table_iv_size(kind: ProofKind, bits: int) -> int:
    """Size with every response counted as one element of Z_n."""
    layout = LAYOUTS[kind]
    return layout.base_elements * base_width(bits) + layout.squared_elements * squared_width(bits)


def encode_proof_body(proof: SigmaProof, bits: int) -> bytes:
    layout = LAYOUTS[proof.kind]
    if (
        len(proof.commitments) != layout.commitments
        or len(proof.responses) != layout.responses
        or len(proof.masks) != layout.masks
    ):
        raise WireFormatError(f"{proof.kind.name} proof does not match its layout")
    sq, base = squared_width(bits), base_width(bits)
    writer = ByteWriter()
    for value in proof.commitments:
        writer.write_int(value, sq)
    if layout.has_digest:
        if proof.challenge_or_hash is None:
            raise WireFormatError(f"{proof.kind.name} proof is missing its hash")
        writer.write_int(proof.challenge_or_hash, base)
    for value in proof.responses:
        writer.write_int(value, _response_width(proof.kind, bits))
    for value in proof.masks:
        writer.write_int(value, sq)
    return writer.getvalue()


def read_proof_body(reader: ByteReader, kind: ProofKind, bits: int) -> SigmaProof:
    """Read one proof body of a known kind from a reader."""
    layout = LAYOUTS[kind]
    sq, base = squared_width(bits), base_width(bits)
    commitments = tuple(reader.read_int(sq) for _ in range(layout.commitments))
    digest = reader.read_int(base) if layout.has_digest else None
    responses = tuple(
        reader.read_int(_response_width(kind, bits)) for _ in range(layout.responses)
    )
    masks = tuple(reader.read_int(sq) for _ in range(layout.masks))
    return SigmaProof(kind, commitments, responses, masks, digest)


def decode_proof_body(data: bytes, kind: ProofKind, bits: int) -> SigmaProof:
    reader = ByteReader(data)
    proof = read_proof_body(reader, kind, bits)
    reader.ensure_consumed()
    return proof


def encode_proof(proof: SigmaProof, bits: int) -> bytes:
    """Kind byte followed by the proof body."""
    return bytes([int(proof.kind)]) + encode_proof_body(proof, bits)


def decode_proof(data: bytes, bits: int) -> SigmaProof:
    if not data:
        raise WireFormatError("empty proof encoding")
    try:
        kind = ProofKind(data[0])
    except ValueError as e:
        raise WireFormatError(f"unknown proof kind byte {data[0]}") from e
    return decode_proof_body(data[1:], kind, bits)
