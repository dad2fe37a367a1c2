"""
Distributed Masking

Each party contributes a random nonzero factor r_j built as a signed product
of primes from the plaintext space; the combined r = prod r_j multiplies a
nonzero secret q so that neither |q| nor its sign survives in y = q * r.
The sign of q is recovered from phi(y) * phi(r).
"""

import logging
import math
import random
from dataclasses import dataclass, field
from functools import cached_property

import gmpy2

logger = logging.getLogger(__name__)

DEFAULT_MAX_FREQUENCY = 3
SAMPLER_FAMILIES = ("uniform", "geometric")


class MaskingError(Exception):
    """Exception raised for invalid masking configurations or inputs."""
    pass


def phi(value: int) -> int:
    """Sign of a nonzero integer."""
    if value == 0:
        raise MaskingError("sign of zero is undefined")
    return 1 if value > 0 else -1


@dataclass(frozen=True)
class FrequencyDistribution:
    """
    Per-party frequency sampler.

    Each prime gets frequency 0 with probability zero_probability; otherwise
    a frequency in [1, max_frequency] drawn from the family.
    """

    family: str = "uniform"
    max_frequency: int = DEFAULT_MAX_FREQUENCY
    zero_probability: float = 0.5

    def __post_init__(self) -> None:
        if self.family not in SAMPLER_FAMILIES:
            raise MaskingError(f"unknown frequency family {self.family!r}")
        if self.max_frequency < 1:
            raise MaskingError("max_frequency must be at least 1")
        if not 0.0 <= self.zero_probability <= 1.0:
            raise MaskingError("zero_probability must lie in [0, 1]")

    def sample(self, rng: random.Random) -> int:
        if rng.random() < self.zero_probability:
            return 0
        if self.family == "uniform":
            return rng.randint(1, self.max_frequency)
        frequency = 1
        while frequency < self.max_frequency and rng.random() < 0.5:
            frequency += 1
        return frequency


@dataclass(frozen=True)
class MaskingConfig:
    """Plaintext space X = [low, high] \\ {0} and the masking magnitude bound."""

    low: int
    high: int
    randomness_bound: int
    distributions: tuple[FrequencyDistribution, ...] = ()
    default_distribution: FrequencyDistribution = field(default_factory=FrequencyDistribution)

    def __post_init__(self) -> None:
        if self.low >= self.high:
            raise MaskingError(f"empty plaintext space [{self.low}, {self.high}]")
        if self.randomness_bound < 1:
            raise MaskingError("randomness bound must be positive")

    @classmethod
    def for_modulus(
        cls,
        n: int,
        low: int,
        high: int,
        distribution: FrequencyDistribution | None = None,
    ) -> "MaskingConfig":
        """Configuration whose bound keeps eta * (high - low) * r inside the signed range."""
        return cls(
            low=low,
            high=high,
            randomness_bound=(n - 1) // (16 * (high - low)),
            default_distribution=distribution or FrequencyDistribution(),
        )

    @cached_property
    def primes(self) -> tuple[int, ...]:
        """Primes p with p or -p in X, ascending."""
        top = max(abs(self.low), abs(self.high))
        found = []
        p = 2
        while p <= top:
            if self.low <= p <= self.high or self.low <= -p <= self.high:
                found.append(p)
            p = int(gmpy2.next_prime(p))
        return tuple(found)

    def distribution_for(self, party_index: int) -> FrequencyDistribution:
        """Sampler of the 1-based party index."""
        if 1 <= party_index <= len(self.distributions):
            return self.distributions[party_index - 1]
        return self.default_distribution

    def per_party_bound(self, parties: int) -> int:
        """Floor of the parties-th root of the randomness bound."""
        if parties < 1:
            raise MaskingError("need at least one party")
        root, _ = gmpy2.iroot(self.randomness_bound, parties)
        return int(root)


@dataclass(frozen=True)
class PartyRandomness:
    """r_j = (-1)^sign_flip_count * prod(factors)."""

    r: int
    sign_flip_count: int
    factors: tuple[int, ...]

    @property
    def sign(self) -> int:
        return phi(self.r)

    def frequencies(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for factor in self.factors:
            counts[factor] = counts.get(factor, 0) + 1
        return counts


def sample_party_randomness(
    cfg: MaskingConfig,
    per_party_bound: int,
    rng: random.Random,
    party_index: int = 1,
) -> PartyRandomness:
    """
    Draw one party's masking factor.

    Prime frequencies are drawn from the party's distribution and applied
    greedily in random prime order, each reduced until the running product
    stays within per_party_bound.
    """
    primes = cfg.primes
    if not primes:
        raise MaskingError(f"plaintext space [{cfg.low}, {cfg.high}] contains no primes")
    if per_party_bound < primes[0]:
        raise MaskingError(
            f"per-party bound {per_party_bound} cannot fit the factor {primes[0]}"
        )
    distribution = cfg.distribution_for(party_index)
    order = list(primes)
    rng.shuffle(order)

    product = 1
    factors: list[int] = []
    for prime in order:
        frequency = distribution.sample(rng)
        while frequency and product * prime**frequency > per_party_bound:
            frequency -= 1
        product *= prime**frequency
        factors.extend([prime] * frequency)

    flips = rng.randint(0, distribution.max_frequency)
    r = -product if flips % 2 else product
    return PartyRandomness(r=r, sign_flip_count=flips, factors=tuple(sorted(factors)))


def mask(q: int, r: int, limit: int | None = None) -> int:
    """y = q * r, checked against the signed plaintext limit when given."""
    if q == 0:
        raise MaskingError("cannot mask zero")
    if r == 0:
        raise MaskingError("masking randomness must be nonzero")
    y = q * r
    if limit is not None and abs(y) > limit:
        raise MaskingError("masked value leaves the signed plaintext range")
    return y


def unmask_sign(sign_y: int, sign_r: int) -> int:
    if sign_y not in (-1, 1) or sign_r not in (-1, 1):
        raise MaskingError("signs must be -1 or 1")
    return sign_y * sign_r


def zero_freq_probability(p_list: list[float], space_size: int) -> float:
    """
    Probability that some prime of the space has zero frequency for every party.

    Args:
        p_list: Zero-frequency probability of each honest party
        space_size: Number of primes in the plaintext space
    """
    if space_size < 1:
        raise MaskingError("space size must be at least 1")
    if any(not 0.0 <= p <= 1.0 for p in p_list):
        raise MaskingError("probabilities must lie in [0, 1]")
    all_zero = math.prod(p_list)
    return 1.0 - (1.0 - all_zero) ** space_size


def zero_frequency_primes(parties: list[PartyRandomness], primes: tuple[int, ...]) -> list[int]:
    """Primes that divide none of the parties' factors."""
    present = {factor for party in parties for factor in party.factors}
    return [p for p in primes if p not in present]


def estimate_zero_frequency(
    cfg: MaskingConfig,
    parties: int,
    per_party_bound: int,
    trials: int,
    rng: random.Random,
) -> float:
    """Monte Carlo rate of combined masks missing at least one prime."""
    hits = 0
    for _ in range(trials):
        draws = [
            sample_party_randomness(cfg, per_party_bound, rng, party_index=j)
            for j in range(1, parties + 1)
        ]
        if zero_frequency_primes(draws, cfg.primes):
            hits += 1
    rate = hits / trials
    logger.debug(f"zero-frequency rate {rate:.4f} over {trials} trials")
    return rate
