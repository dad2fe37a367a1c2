"""
Rank Search Core

Binary search for the k-th element over encrypted inputs. Each round the
workers publish a half-integer guess m; every user submits an encryption of
phi(x - m) proved consistent with its registered input; the workers decrypt
z = sum(phi) + 2k - N and narrow [alpha, beta] until the range is at most 2
wide or |z| is within the tolerance.

Also covers the registration proof, speculative guesses, and the moments
sub-protocol used to seed the search range.
"""

import logging
import math
import random
from collections.abc import Sequence
from dataclasses import dataclass, replace
from fractions import Fraction

from .committee import ProtocolAbort, WorkerCommittee
from .masking import phi
from .threshold_paillier import (
    Ciphertext,
    PublicParams,
    ScaleFactor,
    encrypt,
    encrypt_with_randomness,
    hom_add,
    hom_scalar_mul,
    hom_sub,
    hom_sum,
    powmod,
    scale_encode,
)
from .wire import ByteReader, ByteWriter, WireFormatError, squared_width
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
    read_proof_body,
    rg_statement,
    verify,
    verify_bundle,
)

logger = logging.getLogger(__name__)

L1_KINDS = (ProofKind.MBS, ProofKind.MTP, ProofKind.RG, ProofKind.NZ)


def round_half_up(value: Fraction | int) -> int:
    return math.floor(Fraction(value) + Fraction(1, 2))


def percentile_to_rank(percentile: float, N: int) -> int:
    """Rank k = ceil(p * N / 100), clamped to [1, N]."""
    if not 0 < percentile < 100:
        raise ValueError(f"percentile must lie in (0, 100), got {percentile}")
    k = math.ceil(Fraction(str(percentile)) * N / 100)
    return min(max(k, 1), N)


def round_bound(low: int, high: int) -> int:
    """ceil(log2(range size)) - 1 rounds, at least one."""
    size = high - low + 1
    return max(1, math.ceil(math.log2(size)) - 1)


# ---------------------------------------------------------------------------
# Search state machine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchState:
    """
    Binary-search state.

    k is the target rank; the plain median uses k = N/2, which may be a
    half-integer. guess is the half-integer m of the current round.
    """

    low: int
    high: int
    alpha: int
    beta: int
    round: int
    k: Fraction
    N: int
    tolerance: int = 0
    guess: Fraction = Fraction(0)
    first_guess: Fraction | None = None

    @property
    def offset(self) -> int:
        """2k - N, the public term added to the sign sum."""
        value = 2 * self.k - self.N
        if value.denominator != 1:
            raise ValueError(f"2k - N is not an integer for k={self.k}")
        return value.numerator

    def with_population(self, N: int) -> "SearchState":
        """State for a round where only N users submitted."""
        if N == self.N:
            return self
        k = self.k * N / self.N
        if (2 * k).denominator != 1:
            k = Fraction(round_half_up(k))
        return replace(self, N=N, k=k)


@dataclass(frozen=True)
class Continue:
    state: SearchState


@dataclass(frozen=True)
class Done:
    result: int
    state: SearchState


def _clamp_guess(guess: Fraction, alpha: int, beta: int) -> Fraction:
    lower = Fraction(2 * alpha + 1, 2)
    upper = Fraction(2 * beta - 1, 2)
    return min(max(guess, lower), upper)


def guess_next(state: SearchState) -> Fraction:
    """
    Guess for the state's round.

    Round 1 uses the rank formula floor((high - low) * k / N + low) + 1/2
    (or the moments-derived first guess); later rounds the midpoint
    floor((alpha + beta) / 2) + 1/2. Guesses stay within [alpha + 1/2, beta - 1/2].
    """
    half = Fraction(1, 2)
    if state.round == 1:
        if state.first_guess is not None:
            guess = state.first_guess
        else:
            position = Fraction(state.beta - state.alpha) * state.k / state.N + state.alpha
            guess = math.floor(position) + half
    else:
        guess = Fraction((state.alpha + state.beta) // 2) + half
    return _clamp_guess(guess, state.alpha, state.beta)


def new_search(
    low: int,
    high: int,
    N: int,
    k: Fraction | int | None = None,
    tolerance: int = 0,
    alpha: int | None = None,
    beta: int | None = None,
    first_guess: Fraction | None = None,
) -> SearchState:
    """
    Initial search state over [low, high].

    Args:
        low, high: Public input range
        N: Number of inputs
        k: Target rank; None for the plain median (k = N/2)
        tolerance: Early-stop tolerance on |z|
        alpha, beta: Narrower starting range, e.g. from the moments protocol
        first_guess: Round-1 guess overriding the rank formula
    """
    if low >= high:
        raise ValueError(f"empty range [{low}, {high}]")
    if N < 1:
        raise ValueError("need at least one input")
    rank = Fraction(N, 2) if k is None else Fraction(k)
    if not 0 < rank <= N:
        raise ValueError(f"rank {rank} outside (0, {N}]")
    start = SearchState(
        low=low,
        high=high,
        alpha=low if alpha is None else alpha,
        beta=high if beta is None else beta,
        round=1,
        k=rank,
        N=N,
        tolerance=tolerance,
        first_guess=first_guess,
    )
    if not low <= start.alpha < start.beta <= high:
        raise ValueError(f"invalid starting range [{start.alpha}, {start.beta}]")
    return replace(start, guess=guess_next(start))


def update_state(state: SearchState, z: int) -> Continue | Done:
    m = state.guess
    if abs(z) <= state.tolerance:
        return Done(round_half_up(m), state)
    alpha, beta = state.alpha, state.beta
    if z > 0:
        alpha = math.floor(m)
    else:
        beta = math.floor(m)
    if beta - alpha <= 2:
        narrowed = replace(state, alpha=alpha, beta=beta)
        return Done(round_half_up(Fraction(alpha + beta, 2)), narrowed)
    following = replace(state, alpha=alpha, beta=beta, round=state.round + 1, first_guess=None)
    return Continue(replace(following, guess=guess_next(following)))


@dataclass(frozen=True)
class SpeculativeNode:
    """A guess reachable from the current state; path holds '-'/'+' per z sign."""

    path: str
    state: SearchState

    @property
    def guess(self) -> Fraction:
        return self.state.guess


def speculative_tree(state: SearchState, depth: int) -> list[SpeculativeNode]:
    """Current node plus the nodes of the next `depth` levels, breadth first."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    nodes = [SpeculativeNode("", state)]
    frontier = [nodes[0]]
    for _ in range(depth):
        following = []
        for node in frontier:
            for sign, z in (("-", -(node.state.tolerance + 1)), ("+", node.state.tolerance + 1)):
                outcome = update_state(node.state, z)
                if isinstance(outcome, Continue):
                    following.append(SpeculativeNode(node.path + sign, outcome.state))
        nodes.extend(following)
        frontier = following
    return nodes


def speculative_guesses(state: SearchState, depth: int) -> list[Fraction]:
    return [node.guess for node in speculative_tree(state, depth)]


def worst_case_rounds(state: SearchState) -> int:
    """Longest run of rounds the search can still take from `state`."""
    memo: dict[tuple[int, int], int] = {}

    def depth(current: SearchState) -> int:
        key = (current.alpha, current.beta)
        if current.round > 1 and key in memo:
            return memo[key]
        deepest = 1
        for z in (-(current.tolerance + 1), current.tolerance + 1):
            outcome = update_state(current, z)
            if isinstance(outcome, Continue):
                deepest = max(deepest, 1 + depth(outcome.state))
        if current.round > 1:
            memo[key] = deepest
        return deepest

    return depth(state)


# ---------------------------------------------------------------------------
# Registration and sign submissions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Registration:
    """E(x) with a zkpRG that x lies in the public range."""

    user_id: str
    enc_x: Ciphertext
    proof: SigmaProof

    def encode(self, bits: int) -> bytes:
        width = squared_width(bits)
        return ByteWriter().write_int(self.enc_x.value, width).write_bytes(
            encode_proof_body(self.proof, bits)
        ).getvalue()

    @classmethod
    def decode(cls, data: bytes, bits: int, user_id: str) -> "Registration":
        reader = ByteReader(data)
        enc_x = Ciphertext(reader.read_int(squared_width(bits)))
        proof = read_proof_body(reader, ProofKind.RG, bits)
        reader.ensure_consumed()
        return cls(user_id, enc_x, proof)


def make_registration(
    params: PublicParams,
    user_id: str,
    x: int,
    low: int,
    high: int,
    rng: random.Random,
    claimed: int | None = None,
) -> tuple[Registration, int]:
    """
    Encrypt x and prove it lies in [low, high].

    `claimed` lets a cheating user prove a different in-range value while
    shipping E(x); the registration then fails verification.

    Returns:
        The registration and the randomness r_x of E(x)
    """
    enc_x, r_x = encrypt_with_randomness(params, x, rng)
    witness = x if claimed is None else claimed
    proof = prove(params, RgRequest(witness, r_x, high, low), rng)
    return Registration(user_id, enc_x, proof), r_x


def verify_registration(params: PublicParams, reg: Registration, low: int, high: int) -> bool:
    return verify(params, rg_statement(reg.enc_x, high, low), reg.proof)


def compute_enc_q(
    params: PublicParams,
    enc_x: Ciphertext,
    m_l: Fraction,
    eta: ScaleFactor | int,
) -> Ciphertext:
    """E(eta * (x - m_l)) from E(x), with E(eta * m_l) under public randomness 1."""
    factor = eta if isinstance(eta, ScaleFactor) else ScaleFactor(int(eta))
    scaled_guess = scale_encode(m_l, factor, params).value
    return hom_sub(
        params,
        hom_scalar_mul(params, enc_x, factor.eta),
        encrypt(params, scaled_guess, randomness=1),
    )


def abs_bound(low: int, high: int, eta: ScaleFactor | int) -> int:
    """Upper end of the zkpRG range on phi(q) * q."""
    factor = eta if isinstance(eta, ScaleFactor) else ScaleFactor(int(eta))
    return factor.eta * (high - low)


@dataclass(frozen=True)
class SignSubmission:
    """A user's round message: E(q), E(phi(q)), E(|q|) and the L1 proof bundle."""

    user_id: str
    round: int
    enc_q: Ciphertext
    enc_sign: Ciphertext
    enc_abs: Ciphertext
    proofs: tuple[SigmaProof, ...]

    def encode(self, bits: int) -> bytes:
        width = squared_width(bits)
        writer = ByteWriter()
        for c in (self.enc_q, self.enc_sign, self.enc_abs):
            writer.write_int(c.value, width)
        for proof in self.proofs:
            writer.write_bytes(encode_proof_body(proof, bits))
        return writer.getvalue()

    @classmethod
    def decode(cls, data: bytes, bits: int, user_id: str, round_no: int) -> "SignSubmission":
        reader = ByteReader(data)
        width = squared_width(bits)
        enc_q, enc_sign, enc_abs = (Ciphertext(reader.read_int(width)) for _ in range(3))
        proofs = tuple(read_proof_body(reader, kind, bits) for kind in L1_KINDS)
        reader.ensure_consumed()
        return cls(user_id, round_no, enc_q, enc_sign, enc_abs, proofs)


def bundle_tag(user_id: str, round_no: int) -> str:
    return f"L1:{user_id}:{round_no}"


def submission_statements(
    sub: SignSubmission, low: int, high: int, eta: ScaleFactor | int
) -> list[Statement]:
    return [
        mbs_statement(sub.enc_sign),
        mtp_statement(sub.enc_sign, sub.enc_q, sub.enc_abs),
        rg_statement(sub.enc_abs, abs_bound(low, high, eta)),
        nz_statement(sub.enc_abs),
    ]


def make_submission(
    params: PublicParams,
    user_id: str,
    x: int,
    r_x: int,
    state: SearchState,
    eta: ScaleFactor | int,
    rng: random.Random,
    guess: Fraction | None = None,
    flip_sign: bool = False,
    corrupt: ProofKind | None = None,
) -> SignSubmission:
    """
    Build the L1 submission for one guess.

    Args:
        params: Public parameters
        user_id: Submitting user
        x: The user's registered input
        r_x: Randomness of the registered E(x)
        state: Search state of the round
        eta: Scaling factor
        rng: The user's randomness
        guess: Guess to answer (speculative rounds), defaults to state.guess
        flip_sign: Submit E(-phi(q)) and prove the honest values anyway
        corrupt: Proof kind whose response is tampered with
    """
    factor = eta if isinstance(eta, ScaleFactor) else ScaleFactor(int(eta))
    m_l = state.guess if guess is None else guess
    n_sq = params.n_sq
    enc_x = encrypt(params, x, randomness=r_x)
    enc_q = compute_enc_q(params, enc_x, m_l, factor)
    q = scale_encode(Fraction(x) - m_l, factor, params).value
    sign = phi(q)
    gamma_q = powmod(r_x, factor.eta, n_sq)

    shipped_sign = -sign if flip_sign else sign
    enc_sign, gamma_s = encrypt_with_randomness(params, shipped_sign, rng)
    enc_abs, nu = encrypted_product(params, enc_sign, q, rng)
    r_abs = powmod(gamma_s, q % params.n, n_sq) * nu % n_sq

    requests = [
        MbsRequest(shipped_sign, gamma_s),
        MtpRequest(enc_sign, q, gamma_q, nu),
        RgRequest(abs(q), r_abs, abs_bound(state.low, state.high, factor)),
        NzRequest(abs(q), r_abs),
    ]
    proofs = prove_bundle(params, requests, rng, bundle_tag(user_id, state.round))
    if corrupt is not None:
        position = L1_KINDS.index(corrupt)
        proofs[position] = proofs[position].corrupted()
    return SignSubmission(user_id, state.round, enc_q, enc_sign, enc_abs, tuple(proofs))


def verify_submission(
    params: PublicParams,
    sub: SignSubmission,
    enc_x: Ciphertext,
    state: SearchState,
    eta: ScaleFactor | int,
    guess: Fraction | None = None,
) -> list[str]:
    """
    Check a submission against the user's registered E(x).

    Returns:
        Failure reasons; empty when the submission is valid
    """
    m_l = state.guess if guess is None else guess
    reasons = []
    if compute_enc_q(params, enc_x, m_l, eta) != sub.enc_q:
        reasons.append("enc_q does not match the registered input")
    if len(sub.proofs) != len(L1_KINDS):
        return reasons + ["incomplete proof bundle"]
    failing = verify_bundle(
        params,
        submission_statements(sub, state.low, state.high, eta),
        list(sub.proofs),
        bundle_tag(sub.user_id, sub.round),
    )
    reasons.extend(f"zkp{kind.name} rejected" for kind in failing)
    return reasons


def aggregate_signs(
    params: PublicParams,
    enc_signs: Sequence[Ciphertext],
    state: SearchState,
    committee: WorkerCommittee,
    round_no: int | None = None,
    announce_to: Sequence[str] = (),
) -> int:
    """z = sum of the encrypted signs + (2k - N), decrypted by the committee."""
    round_no = state.round if round_no is None else round_no
    if not enc_signs:
        raise ValueError("no sign submissions to aggregate")
    total = hom_sum(params, list(enc_signs))
    committee.ledger.count_op(round_no, "add", len(enc_signs) - 1)
    total = hom_add(params, total, encrypt(params, state.offset, randomness=1))
    z = committee.ddec(total, round_no, announce_to=announce_to)
    logger.info(f"Round {round_no}: guess {float(state.guess)} gives z = {z}")
    return z


def verify_round_submissions(
    params: PublicParams,
    subs: Sequence[SignSubmission],
    enc_xs: dict[str, Ciphertext],
    state: SearchState,
    eta: ScaleFactor | int,
    committee: WorkerCommittee,
    guess: Fraction | None = None,
) -> None:
    """Verify every submission, aborting on the first invalid one."""
    verdicts = committee.check_all(
        [
            (lambda sub=sub: verify_submission(params, sub, enc_xs[sub.user_id], state, eta, guess))
            for sub in subs
        ]
    )
    committee.ledger.count_proofs(
        state.round, [kind.name for _ in subs for kind in L1_KINDS], verified=True
    )
    for sub, reasons in zip(subs, verdicts, strict=True):
        if reasons:
            logger.warning(f"Submission of {sub.user_id} rejected: {'; '.join(reasons)}")
            raise ProtocolAbort(sub.user_id, "; ".join(reasons))


def aggregate_round(
    params: PublicParams,
    subs: Sequence[SignSubmission],
    state: SearchState,
    committee: WorkerCommittee,
    enc_xs: dict[str, Ciphertext],
    eta: ScaleFactor | int,
    verify_proofs: bool = True,
    announce_to: Sequence[str] = (),
) -> int:
    """Verify the round's submissions and return z."""
    if verify_proofs:
        verify_round_submissions(params, subs, enc_xs, state, eta, committee)
    return aggregate_signs(
        params, [sub.enc_sign for sub in subs], state, committee, announce_to=announce_to
    )


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentsSubmission:
    """E(x^2), E(x^3), E(x^4) chained to the registered E(x) by three zkpMTPs."""

    user_id: str
    powers: tuple[Ciphertext, Ciphertext, Ciphertext]
    proofs: tuple[SigmaProof, ...]

    def encode(self, bits: int) -> bytes:
        width = squared_width(bits)
        writer = ByteWriter()
        for c in self.powers:
            writer.write_int(c.value, width)
        for proof in self.proofs:
            writer.write_bytes(encode_proof_body(proof, bits))
        return writer.getvalue()

    @classmethod
    def decode(cls, data: bytes, bits: int, user_id: str) -> "MomentsSubmission":
        reader = ByteReader(data)
        width = squared_width(bits)
        powers = tuple(Ciphertext(reader.read_int(width)) for _ in range(3))
        proofs = tuple(read_proof_body(reader, ProofKind.MTP, bits) for _ in range(3))
        reader.ensure_consumed()
        if len(powers) != 3:
            raise WireFormatError("moments submission needs three powers")
        return cls(user_id, (powers[0], powers[1], powers[2]), proofs)


def _moments_tag(user_id: str) -> str:
    return f"MOMENTS:{user_id}"


def _moments_statements(enc_x: Ciphertext, sub: MomentsSubmission) -> list[Statement]:
    chain = [enc_x, *sub.powers]
    return [mtp_statement(chain[i], enc_x, chain[i + 1]) for i in range(3)]


def make_moments_submission(
    params: PublicParams,
    user_id: str,
    x: int,
    r_x: int,
    rng: random.Random,
    corrupt: bool = False,
) -> MomentsSubmission:
    enc_x = encrypt(params, x, randomness=r_x)
    chain = [enc_x]
    requests = []
    for _ in range(3):
        product, nu = encrypted_product(params, chain[-1], x, rng)
        requests.append(MtpRequest(chain[-1], x, r_x, nu))
        chain.append(product)
    proofs = prove_bundle(params, requests, rng, _moments_tag(user_id))
    if corrupt:
        proofs[0] = proofs[0].corrupted()
    return MomentsSubmission(user_id, (chain[1], chain[2], chain[3]), tuple(proofs))


def verify_moments_submission(
    params: PublicParams, sub: MomentsSubmission, enc_x: Ciphertext
) -> bool:
    if len(sub.proofs) != 3:
        return False
    failing = verify_bundle(
        params, _moments_statements(enc_x, sub), list(sub.proofs), _moments_tag(sub.user_id)
    )
    return not failing


@dataclass(frozen=True)
class MomentsReport:
    """Exact moments from the decrypted power sums S_x .. S_{x^4}."""

    N: int
    sums: tuple[int, int, int, int]

    @property
    def raw(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(s, self.N) for s in self.sums)

    @property
    def mu(self) -> Fraction:
        return self.raw[0]

    @property
    def variance(self) -> Fraction:
        m1, m2, _, _ = self.raw
        return m2 - m1 * m1

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    @property
    def central3(self) -> Fraction:
        m1, m2, m3, _ = self.raw
        return m3 - 3 * m1 * m2 + 2 * m1**3

    @property
    def central4(self) -> Fraction:
        m1, m2, m3, m4 = self.raw
        return m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1**4

    @property
    def gamma(self) -> float | None:
        """Skewness; None when sigma is 0."""
        if self.variance == 0:
            return None
        return float(self.central3) / self.sigma**3

    @property
    def kappa(self) -> Fraction | None:
        """Kurtosis; None when sigma is 0."""
        if self.variance == 0:
            return None
        return self.central4 / self.variance**2

    def to_dict(self) -> dict[str, float | None]:
        return {
            "mu": float(self.mu),
            "sigma": self.sigma,
            "gamma": self.gamma,
            "kappa": None if self.kappa is None else float(self.kappa),
        }


def moments_from_values(values: Sequence[int]) -> MomentsReport:
    """Plaintext reference for the moments protocol."""
    sums = tuple(sum(v**p for v in values) for p in range(1, 5))
    return MomentsReport(len(values), (sums[0], sums[1], sums[2], sums[3]))


def moments_protocol(
    params: PublicParams,
    enc_xs: dict[str, Ciphertext],
    subs: Sequence[MomentsSubmission],
    committee: WorkerCommittee,
    round_no: int = 0,
) -> MomentsReport:
    """
    Verify the power chains, aggregate each power and decrypt the four sums.

    Raises:
        ProtocolAbort: a user's zkpMTP chain does not verify
    """
    if not subs:
        raise ValueError("moments protocol needs at least one submission")
    for sub in subs:
        if not verify_moments_submission(params, sub, enc_xs[sub.user_id]):
            logger.warning(f"Moments submission of {sub.user_id} rejected")
            raise ProtocolAbort(sub.user_id, "zkpMTP chain rejected")
    committee.ledger.count_proofs(round_no, ["MTP"] * (3 * len(subs)), verified=True)
    columns = [
        [enc_xs[sub.user_id] for sub in subs],
        *[[sub.powers[i] for sub in subs] for i in range(3)],
    ]
    sums = tuple(
        committee.ddec(hom_sum(params, column), round_no, count_op=False) for column in columns
    )
    report = MomentsReport(len(subs), (sums[0], sums[1], sums[2], sums[3]))
    logger.info(f"Moments: mu={float(report.mu):.3f} sigma={report.sigma:.3f}")
    return report


def init_range_from_moments(mu: float, sigma: float, low: int, high: int) -> tuple[int, int]:
    """
    Starting range [floor(mu - sigma), ceil(mu + sigma)], clamped to [low, high]
    and at least 1 wide.
    """
    alpha = max(low, math.floor(mu - sigma))
    beta = min(high, math.ceil(mu + sigma))
    return _widen(alpha, beta, low, high)


def _widen(alpha: int, beta: int, low: int, high: int) -> tuple[int, int]:
    alpha, beta = min(alpha, high), max(beta, low)
    if beta - alpha < 1:
        if alpha < high:
            beta = alpha + 1
        else:
            alpha = beta - 1
    return alpha, beta


def init_range_from_report(report: MomentsReport, low: int, high: int) -> tuple[int, int]:
    """Exact version of init_range_from_moments using the rational variance."""
    mu, var = report.mu, report.variance
    alpha = math.floor(float(mu) - report.sigma)
    # largest a with (mu - a) >= sqrt(var)
    while mu - alpha < 0 or (mu - alpha) ** 2 < var:
        alpha -= 1
    while mu - (alpha + 1) >= 0 and (mu - (alpha + 1)) ** 2 >= var:
        alpha += 1
    beta = math.ceil(float(mu) + report.sigma)
    # smallest b with (b - mu) >= sqrt(var)
    while beta - mu < 0 or (beta - mu) ** 2 < var:
        beta += 1
    while beta - 1 - mu >= 0 and (beta - 1 - mu) ** 2 >= var:
        beta -= 1
    return _widen(max(low, alpha), min(high, beta), low, high)


def moments_first_guess(mu: Fraction | float, alpha: int, beta: int) -> Fraction:
    """mu rounded down to a half-integer, kept inside the starting range."""
    return _clamp_guess(Fraction(math.floor(mu)) + Fraction(1, 2), alpha, beta)
