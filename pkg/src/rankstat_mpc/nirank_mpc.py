"""
Non-Interactive Rank Protocol

Offline, the workers build masking triples: a chain in which each worker
multiplies its own signed random factor into E(r) and its sign into
E(phi(r)), proving every step (the L2 bundle), after which both ciphertexts
are reshared as additive plaintext shares. Online, the workers mask each
user's E(q) with a triple, decrypt y = q * r, re-encrypt phi(y) and unmask
the sign with E(phi(r)) before aggregating as in the interactive protocol.
"""

import hashlib
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .committee import ProtocolAbort, WorkerCommittee
from .masking import MaskingConfig, PartyRandomness, phi, sample_party_randomness
from .rank_core import SearchState, aggregate_signs, compute_enc_q
from .threshold_paillier import (
    Ciphertext,
    PublicParams,
    ScaleFactor,
    encrypt,
    encrypt_with_randomness,
    hom_sub,
    hom_sum,
    invert,
    powmod,
)
from .wire import (
    ByteReader,
    ByteWriter,
    MessageKind,
    WireFormatError,
    squared_width,
    worker_actor,
)
from .zkp import (
    MbsRequest,
    MtpRequest,
    NzRequest,
    ProofKind,
    RgRequest,
    SigmaProof,
    Statement,
    encode_proof_body,
    encrypted_product,
    mbs_statement,
    mtp_statement,
    nz_statement,
    prove,
    prove_bundle,
    rg_statement,
    table_iv_size,
    verify,
    verify_bundle,
)

logger = logging.getLogger(__name__)

BANK_MAGIC = b"RSTB"
BANK_VERSION = 1


class TripleBankError(Exception):
    """Exception raised for exhausted, reused or malformed triple banks."""
    pass


@dataclass(frozen=True)
class ReshareOutput:
    """Worker j's additive share x_j (mod n) of a ciphertext and E(x_j)."""

    party_index: int
    plain_share: int
    enc_share: Ciphertext
    randomness: int


def reconstruct(params: PublicParams, shares: Sequence[ReshareOutput]) -> int:
    """Signed sum of plaintext shares."""
    return params.decode(sum(s.plain_share for s in shares) % params.n)


def reshare(
    params: PublicParams,
    c: Ciphertext,
    committee: WorkerCommittee,
    round_no: int = 0,
) -> list[ReshareOutput]:
    """
    Split E(x) into additive shares held by the workers.

    Each worker j publishes E(v_j); the committee decrypts E(x) * prod E(v_j)
    to x + v; worker 1 keeps x_1 = x + v - v_1 and the others x_j = -v_j,
    with E(x_1) = g^(x+v) / E(v_1) and E(x_j) = E(v_j)^-1.
    """
    n, n_sq = params.n, params.n_sq
    masks: dict[int, tuple[int, Ciphertext, int]] = {}
    for j in committee.indices:
        rng = committee.rng(j)
        v = rng.randrange(n)
        enc_v, r = encrypt_with_randomness(params, params.decode(v), rng)
        masks[j] = (v, enc_v, r)
        committee.broadcast(
            j,
            MessageKind.RESHARE_MASK,
            round_no,
            ByteWriter().write_int(enc_v.value, params.squared_width).getvalue(),
        )

    masked = hom_sum(params, [c] + [enc_v for _, enc_v, _ in masks.values()])
    opened = committee.ddec(masked, round_no, count_op=False) % n

    outputs = []
    first = committee.indices[0]
    for j in committee.indices:
        v, enc_v, r = masks[j]
        r_inv = invert(r, n_sq)
        if j == first:
            share = (opened - v) % n
            enc_share = hom_sub(params, encrypt(params, params.decode(opened), randomness=1), enc_v)
        else:
            share = -v % n
            enc_share = Ciphertext(invert(enc_v.value, n_sq))
        outputs.append(ReshareOutput(j, share, enc_share, r_inv))
    return outputs


def shared_mul(
    params: PublicParams,
    enc_theta: Ciphertext,
    shares_delta: Sequence[ReshareOutput],
    committee: WorkerCommittee,
    round_no: int,
    count_op: bool = True,
) -> Ciphertext:
    """
    E(theta * delta) from E(theta) and a resharing of E(delta).

    Worker j publishes E(theta * delta_j) with a zkpMTP; the product of all
    of them encrypts theta * sum(delta_j) = theta * delta.

    Raises:
        ProtocolAbort: a worker's zkpMTP does not verify
    """
    products: list[tuple[ReshareOutput, Ciphertext, SigmaProof]] = []
    for share in shares_delta:
        j = share.party_index
        rng = committee.rng(j)
        product, nu = encrypted_product(params, enc_theta, share.plain_share, rng)
        proof = prove(params, MtpRequest(enc_theta, share.plain_share, share.randomness, nu), rng)
        if ProofKind.MTP in committee.behaviour(j).corrupt_kinds:
            proof = proof.corrupted()
        payload = (
            ByteWriter()
            .write_int(product.value, params.squared_width)
            .write_bytes(encode_proof_body(proof, params.bits))
            .getvalue()
        )
        committee.broadcast(
            j,
            MessageKind.MASKED_PRODUCT,
            round_no,
            payload,
            table_bytes=table_iv_size(ProofKind.MTP, params.bits),
        )
        products.append((share, product, proof))
    committee.ledger.count_proofs(round_no, ["MTP"] * len(products))

    verdicts = committee.check_all(
        [
            (
                lambda share=share, product=product, proof=proof: verify(
                    params, mtp_statement(enc_theta, share.enc_share, product), proof
                )
            )
            for share, product, proof in products
        ]
    )
    committee.ledger.count_proofs(round_no, ["MTP"] * len(products), verified=True)
    for (share, _, _), ok in zip(products, verdicts, strict=True):
        if not ok:
            culprit = worker_actor(share.party_index)
            logger.warning(f"zkpMTP from {culprit} rejected in round {round_no}")
            raise ProtocolAbort(culprit, "invalid zkpMTP in shared multiplication")
    if count_op:
        committee.ledger.count_op(round_no, "mul")
    return hom_sum(params, [product for _, product, _ in products])


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainStep:
    """One worker's published contribution to a triple."""

    worker: int
    enc_r: Ciphertext
    enc_sign: Ciphertext
    enc_abs: Ciphertext
    running_r: Ciphertext
    running_sign: Ciphertext
    proofs: tuple[SigmaProof, ...]


@dataclass
class PrepTriple:
    """Encrypted masking factor r, its sign, and both resharings."""

    enc_r: Ciphertext
    enc_sign_r: Ciphertext
    shares_r: list[ReshareOutput]
    shares_sign: list[ReshareOutput]
    audit: list[ChainStep] = field(default_factory=list)


def _step_tag(triple_index: int, worker: int) -> str:
    return f"L2:{triple_index}:{worker}"


def _step_statements(
    step: ChainStep,
    previous: tuple[Ciphertext, Ciphertext] | None,
    gamma_bound: int,
) -> list[Statement]:
    statements = [
        rg_statement(step.enc_r, gamma_bound, -gamma_bound),
        nz_statement(step.enc_r),
        mbs_statement(step.enc_sign),
        mtp_statement(step.enc_r, step.enc_sign, step.enc_abs),
        rg_statement(step.enc_abs, gamma_bound),
    ]
    if previous is not None:
        statements.append(mtp_statement(previous[0], step.enc_r, step.running_r))
        statements.append(mtp_statement(previous[1], step.enc_sign, step.running_sign))
    return statements


def _chain_step(
    params: PublicParams,
    committee: WorkerCommittee,
    j: int,
    draw: PartyRandomness,
    previous: tuple[Ciphertext, Ciphertext] | None,
    gamma_bound: int,
    tag: str,
) -> ChainStep:
    rng = committee.rng(j)
    n_sq = params.n_sq
    r_j, sign_j = draw.r, draw.sign
    enc_r, rho = encrypt_with_randomness(params, r_j, rng)
    enc_sign, gamma = encrypt_with_randomness(params, sign_j, rng)
    enc_abs, nu = encrypted_product(params, enc_r, sign_j, rng)
    r_abs = powmod(rho, sign_j % params.n, n_sq) * nu % n_sq

    requests = [
        RgRequest(r_j, rho, gamma_bound, -gamma_bound),
        NzRequest(r_j, rho),
        MbsRequest(sign_j, gamma),
        MtpRequest(enc_r, sign_j, gamma, nu),
        RgRequest(abs(r_j), r_abs, gamma_bound),
    ]
    if previous is None:
        running_r, running_sign = enc_r, enc_sign
    else:
        running_r, nu_r = encrypted_product(params, previous[0], r_j, rng)
        running_sign, nu_s = encrypted_product(params, previous[1], sign_j, rng)
        requests.append(MtpRequest(previous[0], r_j, rho, nu_r))
        requests.append(MtpRequest(previous[1], sign_j, gamma, nu_s))

    proofs = prove_bundle(params, requests, rng, tag)
    for kind in committee.behaviour(j).corrupt_kinds:
        positions = [i for i, proof in enumerate(proofs) if proof.kind == kind]
        if positions:
            # the chaining proof when there is one
            proofs[positions[-1]] = proofs[positions[-1]].corrupted()
    return ChainStep(j, enc_r, enc_sign, enc_abs, running_r, running_sign, tuple(proofs))


def _encode_step(step: ChainStep, bits: int) -> bytes:
    width = squared_width(bits)
    writer = ByteWriter()
    for c in (step.enc_r, step.enc_sign, step.enc_abs, step.running_r, step.running_sign):
        writer.write_int(c.value, width)
    for proof in step.proofs:
        writer.write_bytes(encode_proof_body(proof, bits))
    return writer.getvalue()


def gamma_bound(masking: MaskingConfig, J: int) -> int:
    return masking.per_party_bound(J)


def prep_chain(
    params: PublicParams,
    masking: MaskingConfig,
    committee: WorkerCommittee,
    count: int,
    round_no: int = 0,
) -> list[PrepTriple]:
    """
    Generate `count` masking triples.

    Workers contribute in index order. Every other worker verifies each step's
    L2 bundle; a failing step aborts naming the worker at that position.
    """
    bound = gamma_bound(masking, committee.J)
    triples = []
    for t in range(count):
        previous: tuple[Ciphertext, Ciphertext] | None = None
        steps = []
        for j in committee.indices:
            draw = sample_party_randomness(masking, bound, committee.rng(j), party_index=j)
            tag = _step_tag(t, j)
            step = _chain_step(params, committee, j, draw, previous, bound, tag)
            committee.broadcast(j, MessageKind.PREP_STEP, round_no, _encode_step(step, params.bits))
            committee.ledger.count_proofs(round_no, [p.kind.name for p in step.proofs])

            failing = verify_bundle(
                params, _step_statements(step, previous, bound), list(step.proofs), tag
            )
            committee.ledger.count_proofs(
                round_no, [p.kind.name for p in step.proofs], verified=True
            )
            if failing:
                culprit = worker_actor(j)
                names = ", ".join(f"zkp{kind.name}" for kind in failing)
                logger.warning(f"L2 bundle of {culprit} rejected at triple {t}: {names}")
                raise ProtocolAbort(culprit, f"invalid L2 proof at chain position {j}: {names}")
            previous = (step.running_r, step.running_sign)
            steps.append(step)

        assert previous is not None
        enc_r, enc_sign_r = previous
        triples.append(
            PrepTriple(
                enc_r=enc_r,
                enc_sign_r=enc_sign_r,
                shares_r=reshare(params, enc_r, committee, round_no),
                shares_sign=reshare(params, enc_sign_r, committee, round_no),
                audit=steps,
            )
        )
    logger.info(f"Prepared {count} masking triples with {committee.J} workers")
    return triples


def validate_triple(
    params: PublicParams,
    triple: PrepTriple,
    committee: WorkerCommittee,
    masking: MaskingConfig,
) -> bool:
    """Decrypt a triple and check phi(r), |r| and both resharings."""
    r = committee.ddec(triple.enc_r, 0, count_op=False)
    sign = committee.ddec(triple.enc_sign_r, 0, count_op=False)
    return (
        r != 0
        and abs(r) <= masking.randomness_bound
        and sign == phi(r)
        and reconstruct(params, triple.shares_r) == r
        and reconstruct(params, triple.shares_sign) == sign
    )


# ---------------------------------------------------------------------------
# Triple bank
# ---------------------------------------------------------------------------


class TripleBank:
    """Triples consumed once each, in (round, user) order."""

    def __init__(self, triples: Sequence[PrepTriple]) -> None:
        self._triples = list(triples)
        self._next = 0
        self._assigned: dict[tuple[int, str], int] = {}

    def __len__(self) -> int:
        return len(self._triples)

    @property
    def remaining(self) -> int:
        return len(self._triples) - self._next

    @property
    def triples(self) -> list[PrepTriple]:
        return list(self._triples)

    def consume(self, user_id: str, round_no: int) -> PrepTriple:
        key = (round_no, user_id)
        if key in self._assigned:
            raise TripleBankError(f"triple already consumed for {user_id} in round {round_no}")
        if self._next >= len(self._triples):
            raise TripleBankError("triple bank exhausted")
        self._assigned[key] = self._next
        triple = self._triples[self._next]
        self._next += 1
        return triple

    def save(self, path: str | Path, params: PublicParams) -> None:
        path = Path(path)
        path.write_bytes(encode_bank(self._triples, params))
        logger.info(f"Wrote {len(self._triples)} triples to {path}")

    @classmethod
    def load(cls, path: str | Path, params: PublicParams) -> "TripleBank":
        return cls(decode_bank(Path(path).read_bytes(), params))


def _write_shares(writer: ByteWriter, shares: Sequence[ReshareOutput], params: PublicParams) -> None:
    for share in shares:
        writer.write_int(share.plain_share, params.base_width)
        writer.write_int(share.enc_share.value, params.squared_width)
        writer.write_int(share.randomness, params.squared_width)


def _read_shares(reader: ByteReader, params: PublicParams) -> list[ReshareOutput]:
    return [
        ReshareOutput(
            party_index=j,
            plain_share=reader.read_int(params.base_width),
            enc_share=Ciphertext(reader.read_int(params.squared_width)),
            randomness=reader.read_int(params.squared_width),
        )
        for j in range(1, params.J + 1)
    ]


def encode_bank(triples: Sequence[PrepTriple], params: PublicParams) -> bytes:
    """Header (magic, version, bits, J, count, SHA-256 of n) then fixed-width triples."""
    writer = (
        ByteWriter()
        .write_bytes(BANK_MAGIC)
        .write_int(BANK_VERSION, 1)
        .write_int(params.bits, 2)
        .write_int(params.J, 1)
        .write_int(len(triples), 4)
        .write_bytes(params.fingerprint())
    )
    for triple in triples:
        writer.write_int(triple.enc_r.value, params.squared_width)
        writer.write_int(triple.enc_sign_r.value, params.squared_width)
        _write_shares(writer, triple.shares_r, params)
        _write_shares(writer, triple.shares_sign, params)
    return writer.getvalue()


def decode_bank(data: bytes, params: PublicParams) -> list[PrepTriple]:
    reader = ByteReader(data)
    try:
        if reader.read_bytes(4) != BANK_MAGIC:
            raise TripleBankError("not a triple bank file")
        version = reader.read_int(1)
        if version != BANK_VERSION:
            raise TripleBankError(f"unsupported triple bank version {version}")
        bits, J, count = reader.read_int(2), reader.read_int(1), reader.read_int(4)
        fingerprint = reader.read_bytes(hashlib.sha256().digest_size)
        if (bits, J) != (params.bits, params.J) or fingerprint != params.fingerprint():
            raise TripleBankError("triple bank was prepared under a different key")
        triples = []
        for _ in range(count):
            enc_r = Ciphertext(reader.read_int(params.squared_width))
            enc_sign_r = Ciphertext(reader.read_int(params.squared_width))
            shares_r = _read_shares(reader, params)
            shares_sign = _read_shares(reader, params)
            triples.append(PrepTriple(enc_r, enc_sign_r, shares_r, shares_sign))
        reader.ensure_consumed()
        return triples
    except WireFormatError as e:
        raise TripleBankError(f"malformed triple bank: {e}") from e


# ---------------------------------------------------------------------------
# Online round
# ---------------------------------------------------------------------------


def mask_and_sign(
    params: PublicParams,
    enc_q: Ciphertext,
    triple: PrepTriple,
    committee: WorkerCommittee,
    round_no: int,
    user_id: str = "",
) -> Ciphertext:
    """E(phi(q)) from E(q) and one triple."""
    enc_y = shared_mul(params, enc_q, triple.shares_r, committee, round_no)
    y = committee.ddec(enc_y, round_no)
    if y == 0:
        raise ProtocolAbort(user_id or "triple", "masked value is zero; malformed triple")
    enc_phi_y = encrypt(params, phi(y), randomness=1)
    committee.ledger.count_op(round_no, "enc")
    return shared_mul(params, enc_phi_y, triple.shares_sign, committee, round_no)


def nirank_round(
    params: PublicParams,
    enc_xs: dict[str, Ciphertext],
    bank: TripleBank,
    state: SearchState,
    eta: ScaleFactor | int,
    committee: WorkerCommittee,
    announce_to: Sequence[str] = (),
) -> int:
    """
    One online round: mask every user's E(q), recover E(phi(q)) and aggregate.

    Users are processed in sorted id order, each consuming a fresh triple.
    """
    round_no = state.round
    enc_signs = []
    for user_id in sorted(enc_xs, key=_user_order):
        enc_q = compute_enc_q(params, enc_xs[user_id], state.guess, eta)
        triple = bank.consume(user_id, round_no)
        enc_signs.append(mask_and_sign(params, enc_q, triple, committee, round_no, user_id))
    return aggregate_signs(params, enc_signs, state, committee, announce_to=announce_to)


def _user_order(user_id: str) -> tuple[int, str]:
    _, _, index = user_id.partition("-")
    return (int(index), user_id) if index.isdigit() else (0, user_id)
