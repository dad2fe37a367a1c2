"""
Paillier Sigma-Protocols

Non-interactive zero-knowledge proofs over Paillier ciphertexts:

- MTP: E(z) encrypts the product of the plaintexts of E(x) and E(y)
- MBS: E(x) encrypts -1 or 1
- RG:  E(x) encrypts a value in [lower, upper] (three-squares range proof)
- NZ:  E(x) encrypts a nonzero value
- PD:  a partial decryption share matches the worker's verification key

Every proof is a commit/respond pair. Single proofs derive their challenge
from their own transcript; bundles derive one challenge over all members.
"""

import logging
import math
import random
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import IntEnum

from ..config import CryptoConfig, get_crypto_config
from ..threshold_paillier import (
    Ciphertext,
    PartialDecryption,
    PublicParams,
    invert,
    powmod,
)
from ..wire import wide_width
from .three_squares import decompose_three_squares, range_target
from .transcript import FsTranscript, fiat_shamir_challenge, transcript_digest

logger = logging.getLogger(__name__)

MAX_PROVER_ATTEMPTS = 16


class ProofError(Exception):
    """Exception raised when a prover's witness violates the statement."""
    pass


class ProofKind(IntEnum):
    MTP = 1
    MBS = 2
    RG = 3
    NZ = 4
    PD = 5


@dataclass(frozen=True)
class ProofLayout:
    """Field counts of a serialized proof."""

    commitments: int
    has_digest: bool
    responses: int
    masks: int
    wide_response: bool = False

    @property
    def base_elements(self) -> int:
        return self.responses + int(self.has_digest)

    @property
    def squared_elements(self) -> int:
        return self.commitments + self.masks


LAYOUTS: dict[ProofKind, ProofLayout] = {
    ProofKind.MTP: ProofLayout(commitments=2, has_digest=False, responses=1, masks=2),
    ProofKind.MBS: ProofLayout(commitments=3, has_digest=False, responses=1, masks=2),
    ProofKind.RG: ProofLayout(commitments=4, has_digest=True, responses=4, masks=5),
    ProofKind.NZ: ProofLayout(commitments=3, has_digest=False, responses=1, masks=2),
    ProofKind.PD: ProofLayout(
        commitments=2, has_digest=False, responses=1, masks=0, wide_response=True
    ),
}


@dataclass(frozen=True)
class SigmaProof:
    """
    A non-interactive proof transcript.

    commitments and masks are elements of Z_{n^2}; responses are integers;
    challenge_or_hash carries the zkpRG digest and is None for other kinds.
    """

    kind: ProofKind
    commitments: tuple[int, ...]
    responses: tuple[int, ...]
    masks: tuple[int, ...] = ()
    challenge_or_hash: int | None = None

    def replace_field(self, field_name: str, position: int, value: int) -> "SigmaProof":
        """Copy of the proof with one field element replaced."""
        if field_name == "challenge_or_hash":
            return SigmaProof(self.kind, self.commitments, self.responses, self.masks, value)
        items = list(getattr(self, field_name))
        items[position] = value
        fields = {
            "commitments": self.commitments,
            "responses": self.responses,
            "masks": self.masks,
        }
        fields[field_name] = tuple(items)
        return SigmaProof(self.kind, challenge_or_hash=self.challenge_or_hash, **fields)

    def corrupted(self) -> "SigmaProof":
        """The proof with its first response incremented."""
        return self.replace_field("responses", 0, self.responses[0] + 1)

    def field_positions(self) -> list[tuple[str, int]]:
        """Every (field, index) slot, for mutation testing."""
        slots = [("commitments", i) for i in range(len(self.commitments))]
        if self.challenge_or_hash is not None:
            slots.append(("challenge_or_hash", 0))
        slots += [("responses", i) for i in range(len(self.responses))]
        slots += [("masks", i) for i in range(len(self.masks))]
        return slots

    def get_field(self, field_name: str, position: int) -> int:
        if field_name == "challenge_or_hash":
            return int(self.challenge_or_hash or 0)
        return int(getattr(self, field_name)[position])


@dataclass(frozen=True)
class Statement:
    """Public inputs of a proof: ciphertext-like elements and signed scalars."""

    kind: ProofKind
    elements: tuple[int, ...]
    scalars: tuple[int, ...] = ()

    def absorb_into(self, transcript: FsTranscript, params: PublicParams) -> None:
        transcript.absorb_int(self.kind, 1)
        transcript.absorb_ints(self.elements, params.squared_width)
        transcript.absorb_ints([s % params.n for s in self.scalars], params.base_width)


def mtp_statement(enc_x: Ciphertext, enc_y: Ciphertext, enc_z: Ciphertext) -> Statement:
    return Statement(ProofKind.MTP, (enc_x.value, enc_y.value, enc_z.value))


def mbs_statement(enc_x: Ciphertext) -> Statement:
    return Statement(ProofKind.MBS, (enc_x.value,))


def rg_statement(enc_x: Ciphertext, upper: int, lower: int = 0) -> Statement:
    return Statement(ProofKind.RG, (enc_x.value,), (lower, upper))


def nz_statement(enc_x: Ciphertext) -> Statement:
    return Statement(ProofKind.NZ, (enc_x.value,))


def pd_statement(params: PublicParams, c: Ciphertext, part: PartialDecryption) -> Statement:
    return Statement(
        ProofKind.PD,
        (c.value, part.share, params.verification_keys[part.index - 1]),
        (part.index,),
    )


@dataclass
class _Pending:
    """A committed proof waiting for its challenge."""

    statement: Statement
    commitments: tuple[int, ...]
    finish: Callable[[int], SigmaProof | None]
    digest: int | None = None

    def absorb_into(self, transcript: FsTranscript, params: PublicParams) -> None:
        self.statement.absorb_into(transcript, params)
        transcript.absorb_ints(self.commitments, params.squared_width)
        if self.digest is not None:
            transcript.absorb_int(self.digest, params.base_width)


def _enc(params: PublicParams, plaintext: int, r: int) -> int:
    return params.g_pow(plaintext) * powmod(r, params.n, params.n_sq) % params.n_sq


def _mask(params: PublicParams, r: int) -> int:
    return powmod(r, params.n, params.n_sq)


# ---------------------------------------------------------------------------
# Committers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MtpRequest:
    """Prove E(z) = E(x)^y * nu^n where E(y) = g^y * gamma^n."""

    enc_x: Ciphertext
    y: int
    gamma: int
    nu: int

    def commit(self, params: PublicParams, rng: random.Random, cfg: CryptoConfig) -> _Pending:
        n, n_sq = params.n, params.n_sq
        y = self.y % n
        enc_x = self.enc_x.value
        enc_y = _enc(params, y, self.gamma)
        enc_z = powmod(enc_x, y, n_sq) * _mask(params, self.nu) % n_sq
        m = rng.randrange(n)
        theta = params.random_unit(rng)
        lam = params.random_unit(rng)
        com_m = _enc(params, m, theta)
        com_xm = powmod(enc_x, m, n_sq) * _mask(params, lam) % n_sq

        def finish(e: int) -> SigmaProof:
            total = m + e * y
            p, t = total % n, total // n
            w = theta * powmod(self.gamma, e, n) % n
            u = lam * powmod(enc_x, t, n) * powmod(self.nu, e, n) % n
            return SigmaProof(ProofKind.MTP, (com_m, com_xm), (p,), (w, u))

        statement = Statement(ProofKind.MTP, (enc_x, enc_y, enc_z))
        return _Pending(statement, (com_m, com_xm), finish)


@dataclass(frozen=True)
class MbsRequest:
    """Prove E(x) = g^x * gamma^n encrypts -1 or 1."""

    x: int
    gamma: int
    strict: bool = True

    def commit(self, params: PublicParams, rng: random.Random, cfg: CryptoConfig) -> _Pending:
        if self.strict and self.x not in (-1, 1):
            raise ProofError(f"zkpMBS witness must be -1 or 1, got {self.x}")
        n, n_sq = params.n, params.n_sq
        x = self.x % n
        enc_x = _enc(params, x, self.gamma)
        m = rng.randrange(n)
        lam = params.random_unit(rng)
        theta = params.random_unit(rng)
        nu = params.random_unit(rng)
        com_m = _enc(params, m, lam)
        com_2mx = _enc(params, 2 * m * x, theta)
        com_m2 = _enc(params, m * m, nu)

        def finish(e: int) -> SigmaProof:
            p = (m + e * x) % n
            w = lam * powmod(self.gamma, e, n) % n
            u = nu * powmod(theta, e, n) % n
            return SigmaProof(ProofKind.MBS, (com_m, com_2mx, com_m2), (p,), (w, u))

        return _Pending(Statement(ProofKind.MBS, (enc_x,)), (com_m, com_2mx, com_m2), finish)


@dataclass(frozen=True)
class RgRequest:
    """Prove E(x) = g^x * r^n with lower <= x <= upper."""

    x: int
    r: int
    upper: int
    lower: int = 0

    def commit(self, params: PublicParams, rng: random.Random, cfg: CryptoConfig) -> _Pending:
        bound = self.upper - self.lower
        shifted = self.x - self.lower
        if bound < 1:
            raise ProofError(f"empty range [{self.lower}, {self.upper}]")
        if not 0 <= shifted <= bound:
            raise ProofError(f"zkpRG witness outside [{self.lower}, {self.upper}]")
        n, n_sq = params.n, params.n_sq
        enc_x = _enc(params, self.x, self.r)
        enc_shift = _enc(params, shifted, self.r)
        squares = decompose_three_squares(range_target(shifted, bound), rng).as_tuple()
        values = (bound - shifted, *squares)
        randoms = [invert(self.r, n_sq)] + [params.random_unit(rng) for _ in range(3)]
        enc_values = [_enc(params, values[i], randoms[i]) for i in range(1, 4)]

        m_bound = bound * cfg.challenge_bound * cfg.masking_bound
        response_bound = bound * cfg.challenge_bound * (cfg.masking_bound + 1)
        ms = [rng.randrange(1, m_bound + 1) for _ in range(4)]
        ss = [params.random_unit(rng) for _ in range(4)]
        com_ms = [_enc(params, ms[i], ss[i]) for i in range(4)]
        rho = params.random_unit(rng)
        d = powmod(enc_shift, 4 * ms[0], n_sq) * _mask(params, rho) % n_sq
        for i in range(1, 4):
            d = d * powmod(enc_values[i - 1], -ms[i], n_sq) % n_sq
        delta = transcript_digest(
            FsTranscript("RG-DELTA").absorb_ints([*com_ms, d], params.squared_width)
        )

        def finish(e: int) -> SigmaProof | None:
            ps = tuple(ms[i] + e * values[i] for i in range(4))
            if any(p > response_bound for p in ps):
                return None
            ws = tuple(ss[i] * powmod(randoms[i], e, n) % n for i in range(4))
            tau = rho * powmod(self.r, -4 * e * values[0], n) % n
            for i in range(1, 4):
                tau = tau * powmod(randoms[i], e * values[i], n) % n
            return SigmaProof(
                ProofKind.RG,
                (*enc_values, d),
                ps,
                (*ws, tau),
                challenge_or_hash=delta,
            )

        statement = Statement(ProofKind.RG, (enc_x,), (self.lower, self.upper))
        return _Pending(statement, (*enc_values, d), finish, digest=delta)


@dataclass(frozen=True)
class NzRequest:
    """Prove E(x) = g^x * r_x^n encrypts a value with an inverse mod n."""

    x: int
    r_x: int

    def commit(self, params: PublicParams, rng: random.Random, cfg: CryptoConfig) -> _Pending:
        n, n_sq = params.n, params.n_sq
        x = self.x % n
        if x == 0:
            raise ProofError("zkpNZ witness 0 has no inverse")
        try:
            y = invert(x, n)
        except ZeroDivisionError as e:
            raise ProofError("zkpNZ witness has no inverse mod n") from e
        enc_x = _enc(params, x, self.r_x)
        r_y = params.random_unit(rng)
        r_m = params.random_unit(rng)
        v = params.random_unit(rng)
        m = rng.randrange(n)
        com_y = _enc(params, y, r_y)
        com_m = _enc(params, m, r_m)
        com_xm = powmod(enc_x, m, n_sq) * _mask(params, v) % n_sq

        def finish(e: int) -> SigmaProof:
            total = m + e * y
            p, t = total % n, total // n
            w = r_m * powmod(r_y, e, n) % n
            u = powmod(self.r_x, t * n - e * y, n) * v % n
            return SigmaProof(ProofKind.NZ, (com_y, com_m, com_xm), (p,), (w, u))

        return _Pending(Statement(ProofKind.NZ, (enc_x,)), (com_y, com_m, com_xm), finish)


@dataclass(frozen=True)
class PdRequest:
    """Prove share = c^(2 * delta * sk) for the worker's verification key."""

    index: int
    sk: int
    c: Ciphertext

    def commit(self, params: PublicParams, rng: random.Random, cfg: CryptoConfig) -> _Pending:
        n_sq = params.n_sq
        c = self.c.value
        share = powmod(c, 2 * params.delta * self.sk, n_sq)
        r_bits = (
            n_sq.bit_length()
            + params.delta.bit_length()
            + cfg.challenge_bits
            + cfg.statistical_bits
        )
        r = rng.getrandbits(r_bits)
        com_c = powmod(c, 4 * r, n_sq)
        com_v = powmod(params.v, r, n_sq)

        def finish(e: int) -> SigmaProof:
            p = r + e * params.delta * self.sk
            return SigmaProof(ProofKind.PD, (com_c, com_v), (p,))

        statement = pd_statement(params, self.c, PartialDecryption(self.index, share))
        return _Pending(statement, (com_c, com_v), finish)


ProofRequest = MtpRequest | MbsRequest | RgRequest | NzRequest | PdRequest


# ---------------------------------------------------------------------------
# Checkers
# ---------------------------------------------------------------------------


def _well_formed(params: PublicParams, statement: Statement, proof: SigmaProof) -> bool:
    layout = LAYOUTS[statement.kind]
    if proof.kind != statement.kind:
        return False
    if (
        len(proof.commitments) != layout.commitments
        or len(proof.responses) != layout.responses
        or len(proof.masks) != layout.masks
        or (proof.challenge_or_hash is not None) != layout.has_digest
    ):
        return False
    if not all(params.is_unit(value) for value in proof.commitments):
        return False
    # mask^n mod n^2 only depends on mask mod n, so masks must be reduced
    if not all(0 < value < params.n and math.gcd(value, params.n) == 1 for value in proof.masks):
        return False
    if not all(params.is_unit(value) for value in statement.elements):
        return False
    if layout.wide_response:
        limit = 1 << (8 * wide_width(params.bits))
    elif statement.kind == ProofKind.RG:
        limit = 1 << (8 * params.base_width)
    else:
        limit = params.n
    return all(0 <= value < limit for value in proof.responses)


def _check_mtp(params: PublicParams, statement: Statement, proof: SigmaProof, e: int) -> bool:
    n, n_sq = params.n, params.n_sq
    enc_x, enc_y, enc_z = statement.elements
    com_m, com_xm = proof.commitments
    (p,) = proof.responses
    w, u = proof.masks
    lhs1 = params.g_pow(p) * _mask(params, w) % n_sq
    rhs1 = com_m * powmod(enc_y, e, n_sq) % n_sq
    lhs2 = powmod(enc_x, p, n_sq) * _mask(params, u) % n_sq
    rhs2 = com_xm * powmod(enc_z, e, n_sq) % n_sq
    return lhs1 == rhs1 and lhs2 == rhs2 and p < n


def _check_mbs(params: PublicParams, statement: Statement, proof: SigmaProof, e: int) -> bool:
    n_sq = params.n_sq
    (enc_x,) = statement.elements
    com_m, com_2mx, com_m2 = proof.commitments
    (p,) = proof.responses
    w, u = proof.masks
    lhs1 = params.g_pow(p) * _mask(params, w) % n_sq
    rhs1 = com_m * powmod(enc_x, e, n_sq) % n_sq
    lhs2 = params.g_pow(p * p - e * e) * _mask(params, u) % n_sq
    rhs2 = com_m2 * powmod(com_2mx, e, n_sq) % n_sq
    return lhs1 == rhs1 and lhs2 == rhs2


def _check_rg(
    params: PublicParams,
    statement: Statement,
    proof: SigmaProof,
    e: int,
    cfg: CryptoConfig,
) -> bool:
    n_sq = params.n_sq
    (enc_x,) = statement.elements
    lower, upper = statement.scalars
    bound = upper - lower
    if bound < 1:
        return False
    response_bound = bound * cfg.challenge_bound * (cfg.masking_bound + 1)
    if not all(0 <= p <= response_bound for p in proof.responses):
        return False
    enc_shift = enc_x * params.g_pow(-lower) % n_sq
    enc_x0 = params.g_pow(bound) * invert(enc_shift, n_sq) % n_sq
    enc_values = [enc_x0, *proof.commitments[:3]]
    d = proof.commitments[3]
    ws = proof.masks[:4]
    tau = proof.masks[4]
    fs = [
        params.g_pow(proof.responses[i])
        * _mask(params, ws[i])
        * powmod(enc_values[i], -e, n_sq)
        % n_sq
        for i in range(4)
    ]
    f = _mask(params, tau) * params.g_pow(e) * powmod(enc_shift, 4 * proof.responses[0], n_sq) % n_sq
    for i in range(1, 4):
        f = f * powmod(enc_values[i], -proof.responses[i], n_sq) % n_sq
    if f != d:
        return False
    delta = transcript_digest(
        FsTranscript("RG-DELTA").absorb_ints([*fs, f], params.squared_width)
    )
    return delta == proof.challenge_or_hash


def _check_nz(params: PublicParams, statement: Statement, proof: SigmaProof, e: int) -> bool:
    n_sq = params.n_sq
    (enc_x,) = statement.elements
    com_y, com_m, com_xm = proof.commitments
    (p,) = proof.responses
    w, u = proof.masks
    lhs1 = params.g_pow(p) * _mask(params, w) % n_sq
    rhs1 = com_m * powmod(com_y, e, n_sq) % n_sq
    lhs2 = powmod(enc_x, p, n_sq) * _mask(params, u) % n_sq
    rhs2 = com_xm * params.g_pow(e) % n_sq
    return lhs1 == rhs1 and lhs2 == rhs2


def _check_pd(params: PublicParams, statement: Statement, proof: SigmaProof, e: int) -> bool:
    n_sq = params.n_sq
    c, share, vk = statement.elements
    com_c, com_v = proof.commitments
    (p,) = proof.responses
    lhs1 = powmod(c, 4 * p, n_sq)
    rhs1 = com_c * powmod(share, 2 * e, n_sq) % n_sq
    lhs2 = powmod(params.v, p, n_sq)
    rhs2 = com_v * powmod(vk, e, n_sq) % n_sq
    return lhs1 == rhs1 and lhs2 == rhs2


def _check(
    params: PublicParams,
    statement: Statement,
    proof: SigmaProof,
    e: int,
    cfg: CryptoConfig,
) -> bool:
    if not _well_formed(params, statement, proof):
        return False
    kind = statement.kind
    if kind == ProofKind.MTP:
        return _check_mtp(params, statement, proof, e)
    if kind == ProofKind.MBS:
        return _check_mbs(params, statement, proof, e)
    if kind == ProofKind.RG:
        return _check_rg(params, statement, proof, e, cfg)
    if kind == ProofKind.NZ:
        return _check_nz(params, statement, proof, e)
    return _check_pd(params, statement, proof, e)


# ---------------------------------------------------------------------------
# Challenges and drivers
# ---------------------------------------------------------------------------


def _single_bound(params: PublicParams, kind: ProofKind, cfg: CryptoConfig) -> int:
    if kind in (ProofKind.RG, ProofKind.PD):
        return cfg.challenge_bound
    return params.n


def _single_challenge(
    params: PublicParams,
    statement: Statement,
    commitments: tuple[int, ...],
    digest: int | None,
    cfg: CryptoConfig,
) -> int:
    transcript = FsTranscript(statement.kind.name)
    transcript.absorb_int(params.n, params.base_width)
    statement.absorb_into(transcript, params)
    transcript.absorb_ints(commitments, params.squared_width)
    if digest is not None:
        transcript.absorb_int(digest, params.base_width)
    return fiat_shamir_challenge(transcript, _single_bound(params, statement.kind, cfg))


def _bundle_challenge(
    params: PublicParams,
    tag: str,
    members: Sequence[tuple[Statement, tuple[int, ...], int | None]],
    cfg: CryptoConfig,
) -> int:
    transcript = FsTranscript(f"BUNDLE:{tag}")
    transcript.absorb_int(params.n, params.base_width)
    for statement, commitments, digest in members:
        statement.absorb_into(transcript, params)
        transcript.absorb_ints(commitments, params.squared_width)
        if digest is not None:
            transcript.absorb_int(digest, params.base_width)
    return fiat_shamir_challenge(transcript, cfg.challenge_bound)


def prove(
    params: PublicParams,
    request: ProofRequest,
    rng: random.Random,
    config: CryptoConfig | None = None,
) -> SigmaProof:
    """Run a single prover, retrying when a masked response leaves its interval."""
    cfg = config or get_crypto_config()
    for _ in range(MAX_PROVER_ATTEMPTS):
        pending = request.commit(params, rng, cfg)
        e = _single_challenge(params, pending.statement, pending.commitments, pending.digest, cfg)
        proof = pending.finish(e)
        if proof is not None:
            return proof
        logger.debug(f"{pending.statement.kind.name} response out of interval, retrying")
    raise ProofError("prover exceeded its retry budget")


def verify(
    params: PublicParams,
    statement: Statement,
    proof: SigmaProof,
    config: CryptoConfig | None = None,
) -> bool:
    """Verify a single proof against its statement. Never raises on bad input."""
    cfg = config or get_crypto_config()
    try:
        if not _well_formed(params, statement, proof):
            return False
        e = _single_challenge(params, statement, proof.commitments, proof.challenge_or_hash, cfg)
        return _check(params, statement, proof, e, cfg)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        logger.debug(f"{statement.kind.name} verification failed on malformed input: {e}")
        return False


def prove_bundle(
    params: PublicParams,
    requests: Sequence[ProofRequest],
    rng: random.Random,
    tag: str,
    config: CryptoConfig | None = None,
) -> list[SigmaProof]:
    """Prove several statements under one shared challenge."""
    cfg = config or get_crypto_config()
    for _ in range(MAX_PROVER_ATTEMPTS):
        pendings = [request.commit(params, rng, cfg) for request in requests]
        members = [(p.statement, p.commitments, p.digest) for p in pendings]
        e = _bundle_challenge(params, tag, members, cfg)
        proofs = [pending.finish(e) for pending in pendings]
        if all(proof is not None for proof in proofs):
            return [proof for proof in proofs if proof is not None]
        logger.debug(f"bundle {tag} response out of interval, retrying")
    raise ProofError(f"bundle {tag} exceeded its retry budget")


def verify_bundle(
    params: PublicParams,
    statements: Sequence[Statement],
    proofs: Sequence[SigmaProof],
    tag: str,
    config: CryptoConfig | None = None,
) -> list[ProofKind]:
    """
    Verify a bundle proved under one shared challenge.

    Returns:
        Kinds of the members that fail; empty when the bundle verifies
    """
    cfg = config or get_crypto_config()
    if len(statements) != len(proofs):
        return [s.kind for s in statements] or [ProofKind.MTP]
    try:
        if not all(_well_formed(params, s, p) for s, p in zip(statements, proofs, strict=True)):
            return [
                s.kind
                for s, p in zip(statements, proofs, strict=True)
                if not _well_formed(params, s, p)
            ]
        members = [(s, p.commitments, p.challenge_or_hash) for s, p in zip(statements, proofs, strict=True)]
        e = _bundle_challenge(params, tag, members, cfg)
        return [
            s.kind
            for s, p in zip(statements, proofs, strict=True)
            if not _check(params, s, p, e, cfg)
        ]
    except (ValueError, ZeroDivisionError, TypeError) as e:
        logger.debug(f"bundle {tag} verification failed on malformed input: {e}")
        return [s.kind for s in statements]


# ---------------------------------------------------------------------------
# Per-kind convenience API
# ---------------------------------------------------------------------------


def encrypted_product(
    params: PublicParams, enc_x: Ciphertext, y: int, rng: random.Random
) -> tuple[Ciphertext, int]:
    """E(x)^y * nu^n with fresh nu, returned with nu."""
    nu = params.random_unit(rng)
    value = powmod(enc_x.value, y % params.n, params.n_sq) * _mask(params, nu) % params.n_sq
    return Ciphertext(value), nu


def prove_mtp(
    params: PublicParams,
    enc_x: Ciphertext,
    y: int,
    gamma: int,
    nu: int,
    rng: random.Random,
) -> SigmaProof:
    return prove(params, MtpRequest(enc_x, y, gamma, nu), rng)


def verify_mtp(
    params: PublicParams,
    enc_x: Ciphertext,
    enc_y: Ciphertext,
    enc_z: Ciphertext,
    proof: SigmaProof,
) -> bool:
    return verify(params, mtp_statement(enc_x, enc_y, enc_z), proof)


def prove_mbs(
    params: PublicParams,
    x: int,
    gamma: int,
    rng: random.Random,
    strict: bool = True,
) -> SigmaProof:
    return prove(params, MbsRequest(x, gamma, strict), rng)


def verify_mbs(params: PublicParams, enc_x: Ciphertext, proof: SigmaProof) -> bool:
    return verify(params, mbs_statement(enc_x), proof)


def prove_rg(
    params: PublicParams,
    x: int,
    r: int,
    upper: int,
    rng: random.Random,
    lower: int = 0,
) -> SigmaProof:
    return prove(params, RgRequest(x, r, upper, lower), rng)


def verify_rg(
    params: PublicParams,
    enc_x: Ciphertext,
    upper: int,
    proof: SigmaProof,
    lower: int = 0,
) -> bool:
    return verify(params, rg_statement(enc_x, upper, lower), proof)


def prove_nz(params: PublicParams, x: int, r_x: int, rng: random.Random) -> SigmaProof:
    return prove(params, NzRequest(x, r_x), rng)


def verify_nz(params: PublicParams, enc_x: Ciphertext, proof: SigmaProof) -> bool:
    return verify(params, nz_statement(enc_x), proof)


def prove_pd(
    params: PublicParams,
    share_index: int,
    sk: int,
    c: Ciphertext,
    rng: random.Random,
) -> SigmaProof:
    return prove(params, PdRequest(share_index, sk, c), rng)


def verify_pd(
    params: PublicParams,
    c: Ciphertext,
    part: PartialDecryption,
    proof: SigmaProof,
) -> bool:
    if not 1 <= part.index <= params.J:
        return False
    return verify(params, pd_statement(params, c, part), proof)
