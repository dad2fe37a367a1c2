"""
Zero-knowledge proofs over Paillier ciphertexts.
"""

from .codec import (
    decode_proof,
    decode_proof_body,
    encode_proof,
    encode_proof_body,
    proof_size,
    read_proof_body,
    table_iv_size,
)
from .proofs import (
    LAYOUTS,
    MbsRequest,
    MtpRequest,
    NzRequest,
    PdRequest,
    ProofError,
    ProofKind,
    RgRequest,
    SigmaProof,
    Statement,
    encrypted_product,
    mbs_statement,
    mtp_statement,
    nz_statement,
    pd_statement,
    prove,
    prove_bundle,
    prove_mbs,
    prove_mtp,
    prove_nz,
    prove_pd,
    prove_rg,
    rg_statement,
    verify,
    verify_bundle,
    verify_mbs,
    verify_mtp,
    verify_nz,
    verify_pd,
    verify_rg,
)
from .three_squares import ThreeSquares, decompose_three_squares, range_target
from .transcript import FsTranscript, fiat_shamir_challenge, transcript_digest

__all__ = [
    "LAYOUTS",
    "FsTranscript",
    "MbsRequest",
    "MtpRequest",
    "NzRequest",
    "PdRequest",
    "ProofError",
    "ProofKind",
    "RgRequest",
    "SigmaProof",
    "Statement",
    "ThreeSquares",
    "decode_proof",
    "decode_proof_body",
    "decompose_three_squares",
    "encode_proof",
    "encode_proof_body",
    "encrypted_product",
    "fiat_shamir_challenge",
    "mbs_statement",
    "mtp_statement",
    "nz_statement",
    "pd_statement",
    "proof_size",
    "prove",
    "prove_bundle",
    "prove_mbs",
    "prove_mtp",
    "prove_nz",
    "prove_pd",
    "prove_rg",
    "range_target",
    "read_proof_body",
    "rg_statement",
    "table_iv_size",
    "transcript_digest",
    "verify",
    "verify_bundle",
    "verify_mbs",
    "verify_mtp",
    "verify_nz",
    "verify_pd",
    "verify_rg",
]
