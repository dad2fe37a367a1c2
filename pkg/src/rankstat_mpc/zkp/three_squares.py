"""
Three-Squares Decomposition

Writes 4x(B-x)+1 as a sum of three squares for the range proof. Small
targets are solved by exhaustive search; large ones with a randomized
Rabin-Shallit search: pick an even x1 so that t - x1^2 is a prime
p = 1 (mod 4), then split p into two squares with the Hermite-Serret
Euclidean descent.
"""

import logging
import random
from dataclasses import dataclass

import gmpy2

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 10**6
MAX_ATTEMPTS = 200_000


class ThreeSquaresError(Exception):
    """Internal error: no decomposition was found."""
    pass


@dataclass(frozen=True)
class ThreeSquares:
    x1: int
    x2: int
    x3: int

    def total(self) -> int:
        return self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.x1, self.x2, self.x3)


def range_target(x: int, bound: int) -> int:
    """4x(B-x)+1, the value decomposed for x in [0, B]."""
    return 4 * x * (bound - x) + 1


def _exhaustive(t: int) -> ThreeSquares | None:
    x1 = int(gmpy2.isqrt(t))
    while x1 >= 0:
        rest = t - x1 * x1
        x2 = int(gmpy2.isqrt(rest))
        while x2 >= 0:
            tail = rest - x2 * x2
            if gmpy2.is_square(tail):
                return ThreeSquares(x1, x2, int(gmpy2.isqrt(tail)))
            x2 -= 1
        x1 -= 1
    return None


def _sqrt_minus_one(p: int, rng: random.Random) -> int:
    while True:
        a = rng.randrange(2, p - 1)
        if gmpy2.jacobi(a, p) == -1:
            return int(gmpy2.powmod(a, (p - 1) // 4, p))


def two_squares_of_prime(p: int, rng: random.Random) -> tuple[int, int]:
    """Split a prime p = 1 (mod 4) as a^2 + b^2."""
    s = _sqrt_minus_one(p, rng)
    limit = int(gmpy2.isqrt(p))
    a, b = p, s
    while b > limit:
        a, b = b, a % b
    rest = p - b * b
    c = int(gmpy2.isqrt(rest))
    if c * c != rest:
        raise ThreeSquaresError(f"descent failed for a {p.bit_length()}-bit prime")
    return b, c


def decompose_three_squares(t: int, rng: random.Random | None = None) -> ThreeSquares:
    """
    Find x1, x2, x3 >= 0 with x1^2 + x2^2 + x3^2 = t.

    Args:
        t: Target, t = 1 (mod 4) for targets above the exhaustive limit
        rng: Randomness for the large-target search (seeded from t if omitted)

    Returns:
        The decomposition
    """
    if t < 0:
        raise ValueError("cannot decompose a negative target")
    if t <= EXHAUSTIVE_LIMIT:
        found = _exhaustive(t)
        if found is None:
            raise ThreeSquaresError(f"{t} is not a sum of three squares")
        return found
    if t % 4 != 1:
        raise ValueError("large targets must be congruent to 1 mod 4")

    rng = rng or random.Random(t)
    root = int(gmpy2.isqrt(t))
    if root * root == t:
        return ThreeSquares(root, 0, 0)
    half_root = root // 2
    for _ in range(MAX_ATTEMPTS):
        x1 = 2 * rng.randrange(0, half_root + 1)
        rest = t - x1 * x1
        if rest == 1:
            return ThreeSquares(x1, 1, 0)
        if gmpy2.is_prime(rest, 40):
            x2, x3 = two_squares_of_prime(rest, rng)
            return ThreeSquares(x1, x2, x3)
    logger.error(f"three-squares search exhausted for a {t.bit_length()}-bit target")
    raise ThreeSquaresError("three-squares search exhausted")
