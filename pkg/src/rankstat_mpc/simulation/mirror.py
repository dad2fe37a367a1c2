"""
Plaintext mirror of the rank search.

Runs the same state machine as the encrypted protocol with z computed
directly from the inputs, which makes large accuracy sweeps cheap. Also
holds the sorted-list oracle the results are scored against.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..rank_core import Continue, Done, SearchState, new_search, update_state


@dataclass
class MirrorResult:
    result: int
    rounds: int
    z_history: list[int] = field(default_factory=list)
    guesses: list[Fraction] = field(default_factory=list)
    final_state: SearchState | None = None


def plain_z(values: np.ndarray, state: SearchState) -> int:
    """sum(phi(x - m)) + 2k - N for a half-integer guess m."""
    doubled_guess = 2 * state.guess
    if doubled_guess.denominator != 1:
        raise ValueError(f"guess {state.guess} is not a half-integer")
    signs = np.sign(2 * values - doubled_guess.numerator)
    return int(signs.sum()) + state.offset


def run_mirror(values: Sequence[int], state: SearchState) -> MirrorResult:
    """Drive the search from `state` to termination on plaintext inputs."""
    data = np.asarray(values, dtype=np.int64)
    history: list[int] = []
    guesses: list[Fraction] = []
    while True:
        guesses.append(state.guess)
        z = plain_z(data, state)
        history.append(z)
        outcome = update_state(state, z)
        if isinstance(outcome, Done):
            return MirrorResult(outcome.result, state.round, history, guesses, outcome.state)
        assert isinstance(outcome, Continue)
        state = outcome.state


def mirror_search(
    values: Sequence[int],
    low: int,
    high: int,
    k: Fraction | int | None = None,
    tolerance: int = 0,
) -> MirrorResult:
    return run_mirror(values, new_search(low, high, len(values), k, tolerance))


def oracle_value(values: Sequence[int], k: Fraction | int | None = None) -> Fraction:
    """
    Sorted-list answer for rank k.

    The element at rank ceil(k). The median of an odd population is the middle
    element; for an even population it is the lower middle one.
    """
    ordered = sorted(values)
    rank = Fraction(len(ordered), 2) if k is None else Fraction(k)
    return Fraction(ordered[math.ceil(rank) - 1])


def mean_absolute_error(results: Sequence[int | Fraction], truths: Sequence[Fraction]) -> float:
    if len(results) != len(truths) or not results:
        raise ValueError("need equally many results and oracle values")
    errors = np.array([float(abs(Fraction(r) - t)) for r, t in zip(results, truths, strict=True)])
    return float(errors.mean())