"""
Threshold Paillier Cryptosystem

Trusted-dealer threshold Paillier with J-of-J decryption in the style of
Damgard-Jurik/Shoup: safe-prime modulus, dealer polynomial shares of
d = m * (m^-1 mod n), verification keys v^(delta * sk_i), and signed
plaintexts shifted into [-(n-1)/2, (n-1)/2].
"""

import hashlib
import logging
import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Union

import gmpy2

from .config import SUPPORTED_MODULUS_BITS, CryptoConfig, get_crypto_config
from .wire import base_width, squared_width

if TYPE_CHECKING:
    from .zkp.proofs import SigmaProof

logger = logging.getLogger(__name__)

MAX_WORKERS = 16


class ThresholdPaillierError(Exception):
    """Base exception for cryptosystem failures."""
    pass


class KeySetupError(ThresholdPaillierError):
    """Exception raised when the trusted dealer cannot produce keys."""
    pass


class PlaintextRangeError(ThresholdPaillierError):
    """Exception raised when a plaintext leaves the signed range."""
    pass


class InvalidPartialDecryption(ThresholdPaillierError):
    """Exception raised when a partial decryption fails its zkpPD."""

    def __init__(self, index: int, reason: str = "zkpPD rejected") -> None:
        super().__init__(f"partial decryption from worker {index}: {reason}")
        self.index = index
        self.reason = reason


def powmod(base: int, exponent: int, modulus: int) -> int:
    """Modular exponentiation accepting negative exponents via the inverse."""
    if exponent < 0:
        base = gmpy2.invert(base, modulus)
        exponent = -exponent
    return int(gmpy2.powmod(base, exponent, modulus))


def invert(value: int, modulus: int) -> int:
    return int(gmpy2.invert(value, modulus))


@dataclass(frozen=True)
class PublicParams:
    """Public key material shared by every actor."""

    n: int
    n_sq: int
    g: int
    bits: int
    J: int
    delta: int
    v: int
    verification_keys: tuple[int, ...]
    combine_constant: int

    @property
    def half(self) -> int:
        """Largest magnitude of a signed plaintext, (n-1)/2."""
        return (self.n - 1) // 2

    @property
    def base_width(self) -> int:
        return base_width(self.bits)

    @property
    def squared_width(self) -> int:
        return squared_width(self.bits)

    def fingerprint(self) -> bytes:
        return hashlib.sha256(self.n.to_bytes(self.base_width, "big")).digest()

    def random_unit(self, rng: random.Random) -> int:
        """Uniform r in [1, n) with gcd(r, n) = 1."""
        while True:
            r = rng.randrange(1, self.n)
            if math.gcd(r, self.n) == 1:
                return r

    def encode(self, value: int) -> int:
        """Shift a signed plaintext into [0, n)."""
        value = int(value)
        if not -self.half <= value <= self.half:
            raise PlaintextRangeError(
                f"plaintext of {value.bit_length()} bits outside the signed range"
            )
        return value % self.n

    def decode(self, residue: int) -> int:
        """Map a residue in [0, n) back to the signed range."""
        residue = int(residue) % self.n
        return residue - self.n if residue > self.half else residue

    def g_pow(self, exponent: int) -> int:
        """g^exponent mod n^2, using g = n + 1."""
        return (1 + (int(exponent) % self.n) * self.n) % self.n_sq

    def is_unit(self, value: int) -> bool:
        return 0 < value < self.n_sq and math.gcd(value, self.n) == 1


@dataclass(frozen=True)
class SecretKeyShare:
    """A worker's evaluation f(index) of the dealer polynomial mod n*m."""

    index: int
    sk_share: int


@dataclass(frozen=True)
class Ciphertext:
    """An element of Z*_{n^2} carrying an encrypted signed integer."""

    value: int


@dataclass(frozen=True)
class SignedPlaintext:
    value: int


@dataclass(frozen=True)
class ScaleFactor:
    """Even multiplier embedding half-integer guesses into integers."""

    eta: int = 2

    def __post_init__(self) -> None:
        if self.eta < 2 or self.eta % 2:
            raise ValueError(f"eta must be an even integer >= 2, got {self.eta}")


@dataclass(frozen=True)
class PartialDecryption:
    index: int
    share: int


PlaintextLike = Union[int, SignedPlaintext]


def _plain(m: PlaintextLike) -> int:
    return m.value if isinstance(m, SignedPlaintext) else int(m)


def _safe_prime(bits: int, rng: random.Random, rounds: int, deadline: float) -> tuple[int, int]:
    """Return (p', p) with p = 2p' + 1, both prime, p of exactly `bits` bits."""
    sub_bits = bits - 1
    while True:
        candidate = rng.getrandbits(sub_bits) | (3 << (sub_bits - 2))
        prime_ = gmpy2.next_prime(candidate)
        while prime_.bit_length() == sub_bits:
            if time.monotonic() > deadline:
                raise KeySetupError(f"safe prime search for {bits} bits timed out")
            if prime_ % 3 != 1:
                prime = 2 * prime_ + 1
                if gmpy2.is_prime(prime, rounds) and gmpy2.is_prime(prime_, rounds):
                    return int(prime_), int(prime)
            prime_ = gmpy2.next_prime(prime_)


def keygen(
    bits: int,
    J: int,
    rng: random.Random,
    config: CryptoConfig | None = None,
) -> tuple[PublicParams, list[SecretKeyShare]]:
    """
    Trusted-dealer key generation for J-of-J threshold decryption.

    Args:
        bits: Modulus bit length, one of 512, 1024, 1536, 2048
        J: Number of workers holding key shares
        rng: Seeded randomness source
        config: Crypto parameters (global config when omitted)

    Returns:
        Public parameters and the J secret key shares, indexed 1..J
    """
    cfg = config or get_crypto_config()
    if bits not in SUPPORTED_MODULUS_BITS:
        raise KeySetupError(f"unsupported modulus size {bits}")
    if not 2 <= J <= MAX_WORKERS:
        raise KeySetupError(f"worker count must be in [2, {MAX_WORKERS}], got {J}")

    started = time.monotonic()
    deadline = started + cfg.keygen_timeout_seconds
    half_bits = bits // 2
    p_, p = _safe_prime(half_bits, rng, cfg.miller_rabin_rounds, deadline)
    while True:
        q_, q = _safe_prime(half_bits, rng, cfg.miller_rabin_rounds, deadline)
        if q != p and (p * q).bit_length() == bits:
            break

    n = p * q
    m = p_ * q_
    nm = n * m
    n_sq = n * n
    d = m * invert(m, n)

    coefficients = [d] + [rng.randrange(nm) for _ in range(J - 1)]
    shares = []
    for index in range(1, J + 1):
        value = 0
        for coefficient in reversed(coefficients):
            value = value * index + coefficient
        shares.append(SecretKeyShare(index=index, sk_share=value % nm))

    delta = math.factorial(J)
    h = 0
    while math.gcd(h, n) != 1:
        h = rng.randrange(2, n_sq)
    v = h * h % n_sq
    verification_keys = tuple(powmod(v, delta * s.sk_share, n_sq) for s in shares)

    params = PublicParams(
        n=n,
        n_sq=n_sq,
        g=n + 1,
        bits=bits,
        J=J,
        delta=delta,
        v=v,
        verification_keys=verification_keys,
        combine_constant=invert(4 * delta * delta % n, n),
    )
    logger.info(
        f"Generated {bits}-bit threshold key for {J} workers in "
        f"{time.monotonic() - started:.2f}s"
    )
    return params, shares


def encrypt_with_randomness(
    params: PublicParams,
    m: PlaintextLike,
    rng: random.Random | None = None,
    randomness: int | None = None,
) -> tuple[Ciphertext, int]:
    """
    Encrypt a signed plaintext and return the randomness used.

    Args:
        params: Public parameters
        m: Signed plaintext
        rng: Randomness source, required when `randomness` is not given
        randomness: Explicit r, e.g. 1 for publicly recomputable encryptions

    Returns:
        (ciphertext, r) with ciphertext = g^m * r^n mod n^2
    """
    encoded = params.encode(_plain(m))
    if randomness is None:
        if rng is None:
            raise ThresholdPaillierError("encrypt needs either rng or explicit randomness")
        randomness = params.random_unit(rng)
    elif math.gcd(randomness, params.n) != 1:
        raise ThresholdPaillierError("encryption randomness must be a unit mod n")
    value = params.g_pow(encoded) * powmod(randomness, params.n, params.n_sq) % params.n_sq
    return Ciphertext(value), randomness


def encrypt(
    params: PublicParams,
    m: PlaintextLike,
    rng: random.Random | None = None,
    randomness: int | None = None,
) -> Ciphertext:
    return encrypt_with_randomness(params, m, rng, randomness)[0]


def check_ciphertext(params: PublicParams, c: Ciphertext) -> Ciphertext:
    if not params.is_unit(c.value):
        raise ThresholdPaillierError("ciphertext is not a unit of Z_{n^2}")
    return c


def hom_add(params: PublicParams, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    return Ciphertext(c1.value * c2.value % params.n_sq)


def hom_sub(params: PublicParams, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    return Ciphertext(c1.value * invert(c2.value, params.n_sq) % params.n_sq)


def hom_scalar_mul(params: PublicParams, c: Ciphertext, k: int) -> Ciphertext:
    return Ciphertext(powmod(c.value, int(k), params.n_sq))


def hom_sum(params: PublicParams, ciphertexts: list[Ciphertext]) -> Ciphertext:
    acc = 1
    for c in ciphertexts:
        acc = acc * c.value % params.n_sq
    return Ciphertext(acc)


def partial_decrypt(
    params: PublicParams,
    share: SecretKeyShare,
    c: Ciphertext,
    rng: random.Random,
) -> tuple[PartialDecryption, "SigmaProof"]:
    """Compute c^(2 * delta * sk) and its zkpPD."""
    from .zkp.proofs import prove_pd

    check_ciphertext(params, c)
    value = powmod(c.value, 2 * params.delta * share.sk_share, params.n_sq)
    part = PartialDecryption(index=share.index, share=value)
    return part, prove_pd(params, share.index, share.sk_share, c, rng)


def lagrange_coefficient(index: int, indices: list[int], delta: int) -> int:
    """delta * prod_{j != index} j / (j - index), an integer for indices in 1..J."""
    numerator = delta
    denominator = 1
    for j in indices:
        if j != index:
            numerator *= j
            denominator *= j - index
    coefficient = Fraction(numerator, denominator)
    if coefficient.denominator != 1:
        raise ThresholdPaillierError(f"non-integral Lagrange coefficient for index {index}")
    return coefficient.numerator


def combine(
    params: PublicParams,
    parts: list[PartialDecryption],
    ciphertext: Ciphertext | None = None,
    proofs: list["SigmaProof"] | None = None,
    require_all: bool = True,
) -> SignedPlaintext:
    """
    Combine partial decryptions into the signed plaintext.

    Args:
        params: Public parameters
        parts: Partial decryptions, one per worker
        ciphertext: The decrypted ciphertext, needed to check proofs
        proofs: zkpPD per part, in the same order; checked when given
        require_all: Demand exactly the J indices 1..J

    Returns:
        The signed plaintext

    Raises:
        ThresholdPaillierError: missing or duplicate indices
        InvalidPartialDecryption: a part whose zkpPD does not verify
    """
    indices = [part.index for part in parts]
    if len(set(indices)) != len(indices):
        raise ThresholdPaillierError(f"duplicate partial decryption indices {indices}")
    if any(not 1 <= i <= params.J for i in indices):
        raise ThresholdPaillierError(f"partial decryption index out of range in {indices}")
    if require_all and sorted(indices) != list(range(1, params.J + 1)):
        raise ThresholdPaillierError(
            f"need partial decryptions from all {params.J} workers, got {sorted(indices)}"
        )

    if proofs is not None:
        from .zkp.proofs import verify_pd

        if ciphertext is None or len(proofs) != len(parts):
            raise ThresholdPaillierError("proof checking needs the ciphertext and one proof per part")
        for part, proof in zip(parts, proofs, strict=True):
            if not verify_pd(params, ciphertext, part, proof):
                raise InvalidPartialDecryption(part.index)

    acc = 1
    for part in parts:
        exponent = 2 * lagrange_coefficient(part.index, indices, params.delta)
        acc = acc * powmod(part.share, exponent, params.n_sq) % params.n_sq
    residue = (acc - 1) // params.n * params.combine_constant % params.n
    return SignedPlaintext(params.decode(residue))


def threshold_decrypt(
    params: PublicParams,
    shares: list[SecretKeyShare],
    c: Ciphertext,
    rng: random.Random,
) -> SignedPlaintext:
    """Decrypt with all key shares, checking every zkpPD."""
    results = [partial_decrypt(params, share, c, rng) for share in shares]
    parts = [part for part, _ in results]
    proofs = [proof for _, proof in results]
    return combine(params, parts, c, proofs)


def scale_encode(
    x: Fraction | int,
    eta: ScaleFactor | int,
    params: PublicParams | None = None,
) -> SignedPlaintext:
    """
    Multiply a half-integer by the scaling factor.

    Args:
        x: Rational with denominator dividing 2
        eta: Scaling factor
        params: When given, the result is checked against the signed range
    """
    factor = eta if isinstance(eta, ScaleFactor) else ScaleFactor(int(eta))
    scaled = Fraction(x) * factor.eta
    if scaled.denominator != 1:
        raise PlaintextRangeError(f"{x} * {factor.eta} is not an integer")
    value = scaled.numerator
    if params is not None:
        params.encode(value)
    return SignedPlaintext(value)
