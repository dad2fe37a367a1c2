"""
Unit tests for the rank search state machine, registrations, submissions
and the moments helpers.
"""

from fractions import Fraction
import random

import pytest

from src.rankstat_mpc.committee import ProtocolAbort
from src.rankstat_mpc.rank_core import (
    aggregate_round,
    compute_enc_q,
    make_moments_submission,
    moments_protocol,
    Continue,
    Done,
    ProofKind,
    guess_next,
    init_range_from_moments,
    init_range_from_report,
    make_registration,
    make_submission,
    moments_first_guess,
    moments_from_values,
    new_search,
    percentile_to_rank,
    round_bound,
    speculative_guesses,
    speculative_tree,
    update_state,
    verify_registration,
    verify_submission,
    worst_case_rounds,
)
from src.rankstat_mpc.simulation.mirror import mirror_search, oracle_value

EXAMPLE = [1, 2, 3, 4, 5]


@pytest.mark.unit
class TestSearchState:
    def test_first_guess_uses_rank_formula(self):
        state = new_search(0, 8, 5)
        assert state.guess == Fraction(9, 2)
        assert state.k == Fraction(5, 2)
        assert state.offset == 0

    def test_percentile_first_guess(self):
        state = new_search(0, 100, 10, k=9)
        assert state.guess == Fraction(181, 2)

    def test_example_run(self):
        state = new_search(0, 8, 5)
        outcome = update_state(state, -3)
        assert isinstance(outcome, Continue)
        assert (outcome.state.alpha, outcome.state.beta) == (0, 4)
        assert outcome.state.guess == Fraction(5, 2)
        done = update_state(outcome.state, 1)
        assert isinstance(done, Done)
        assert done.result == 3
        assert (done.state.alpha, done.state.beta) == (2, 4)

    def test_tolerance_stops_at_guess(self):
        state = new_search(0, 8, 5, tolerance=1)
        outcome = update_state(new_search(0, 8, 5, tolerance=1), -3)
        assert isinstance(outcome, Continue)
        done = update_state(outcome.state, 1)
        assert isinstance(done, Done)
        assert done.result == 3
        assert isinstance(update_state(state, 0), Done)

    def test_guess_stays_inside_range(self):
        state = new_search(0, 10, 4, k=4)
        assert state.alpha + Fraction(1, 2) <= guess_next(state) <= state.beta - Fraction(1, 2)

    def test_invalid_searches(self):
        with pytest.raises(ValueError):
            new_search(5, 5, 3)
        with pytest.raises(ValueError):
            new_search(0, 8, 0)
        with pytest.raises(ValueError):
            new_search(0, 8, 5, k=6)
        with pytest.raises(ValueError):
            new_search(0, 8, 5, alpha=6, beta=3)

    def test_with_population(self):
        state = new_search(0, 8, 5)
        smaller = state.with_population(4)
        assert smaller.k == 2
        assert smaller.N == 4
        assert state.with_population(5) is state

    def test_offset_of_half_integer_rank(self):
        state = new_search(0, 8, 4, k=Fraction(7, 4))
        with pytest.raises(ValueError):
            _ = state.offset


@pytest.mark.unit
class TestRoundBounds:
    def test_constants(self):
        assert worst_case_rounds(new_search(0, 8, 5)) == 2
        assert worst_case_rounds(new_search(0, 15, 7)) == 3
        assert round_bound(0, 8) == 3
        assert round_bound(0, 1) == 1

    @pytest.mark.parametrize("bits", [3, 5, 8, 10, 12])
    def test_median_search_respects_bound(self, bits):
        rng = random.Random(bits)
        high = (1 << bits) - 1
        for _ in range(50):
            N = rng.randrange(1, 40)
            values = [rng.randint(0, high) for _ in range(N)]
            result = mirror_search(values, 0, high)
            assert result.rounds <= round_bound(0, high)

    def test_worst_case_matches_bound(self):
        for bits in range(2, 11):
            high = (1 << bits) - 1
            assert worst_case_rounds(new_search(0, high, 9)) <= round_bound(0, high)

    def test_speculative_tree(self):
        state = new_search(0, 8, 5)
        tree = speculative_tree(state, 1)
        assert [node.path for node in tree] == ["", "-", "+"]
        assert speculative_guesses(state, 1) == [Fraction(9, 2), Fraction(5, 2), Fraction(13, 2)]
        with pytest.raises(ValueError):
            speculative_tree(state, -1)


@pytest.mark.unit
class TestOracleCloseness:
    def test_example(self):
        assert mirror_search(EXAMPLE, 0, 8).result == 3
        assert oracle_value(EXAMPLE) == 3

    def test_oracle_values(self):
        assert oracle_value([4, 1, 3, 2]) == 2
        assert oracle_value([1, 2, 3, 4]) == 2
        assert oracle_value([7, 7, 1, 9, 3, 5]) == 5
        assert oracle_value([5, 1, 9], k=1) == 1
        assert oracle_value([5, 1, 9, 7], k=3) == 7

    def _check(self, rng, cases):
        for _ in range(cases):
            high = rng.choice([8, 100, 1000, 65535])
            N = 2 * rng.randrange(0, 30) + 1
            values = [rng.randint(0, high) for _ in range(N)]
            result = mirror_search(values, 0, high).result
            assert abs(result - oracle_value(values)) <= 1, values

    def test_random_odd_populations(self):
        self._check(random.Random(2024), 300)

    @pytest.mark.slow
    def test_many_odd_populations(self):
        self._check(random.Random(7), 10_000)


@pytest.mark.unit
def test_percentile_to_rank():
    assert percentile_to_rank(50, 5) == 3
    assert percentile_to_rank(25, 100) == 25
    assert percentile_to_rank(1, 5) == 1
    with pytest.raises(ValueError):
        percentile_to_rank(100, 5)


@pytest.mark.unit
class TestMoments:
    def test_example_moments(self):
        report = moments_from_values(EXAMPLE)
        assert report.mu == 3
        assert report.variance == 2
        assert report.gamma == 0
        assert report.kappa == Fraction(17, 10)

    def test_constant_input_has_no_shape(self):
        report = moments_from_values([4, 4, 4])
        assert report.gamma is None
        assert report.kappa is None

    def test_initial_ranges(self):
        report = moments_from_values(EXAMPLE)
        assert init_range_from_report(report, 0, 8) == (1, 5)
        assert init_range_from_moments(3, 1.414, 0, 8) == (1, 5)
        assert moments_first_guess(report.mu, 1, 5) == Fraction(7, 2)

    def test_range_is_clamped_and_widened(self):
        assert init_range_from_moments(0, 0, 0, 8) == (0, 1)
        assert init_range_from_moments(8, 0, 0, 8) == (7, 8)
        assert init_range_from_report(moments_from_values([0, 0, 8]), 0, 8)[0] == 0

    def test_whole_number_bounds_are_kept(self):
        assert init_range_from_moments(100, 16, 0, 255) == (84, 116)
        assert init_range_from_moments(250, 16, 0, 255) == (234, 255)
        assert init_range_from_report(moments_from_values([84, 116]), 0, 255) == (84, 116)


@pytest.mark.unit
@pytest.mark.crypto
class TestUserMessages:
    def test_registration(self, params, rng):
        reg, _ = make_registration(params, "user-1", 3, 0, 8, rng)
        assert verify_registration(params, reg, 0, 8)
        assert len(reg.encode(params.bits)) == 25 * params.bits // 8

    def test_registration_with_claimed_value(self, params, rng):
        reg, _ = make_registration(params, "user-1", 12, 0, 8, rng, claimed=5)
        assert not verify_registration(params, reg, 0, 8)

    def test_honest_submission(self, params, rng):
        reg, r_x = make_registration(params, "user-2", 3, 0, 8, rng)
        state = new_search(0, 8, 5)
        sub = make_submission(params, "user-2", 3, r_x, state, 2, rng)
        assert verify_submission(params, sub, reg.enc_x, state, 2) == []
        assert len(sub.encode(params.bits)) == 60 * params.bits // 8

    def test_flipped_sign_is_caught(self, params, rng):
        reg, r_x = make_registration(params, "user-2", 3, 0, 8, rng)
        state = new_search(0, 8, 5)
        sub = make_submission(params, "user-2", 3, r_x, state, 2, rng, flip_sign=True)
        assert verify_submission(params, sub, reg.enc_x, state, 2)

    def test_corrupted_proof_is_named(self, params, rng):
        reg, r_x = make_registration(params, "user-2", 3, 0, 8, rng)
        state = new_search(0, 8, 5)
        sub = make_submission(params, "user-2", 3, r_x, state, 2, rng, corrupt=ProofKind.NZ)
        assert verify_submission(params, sub, reg.enc_x, state, 2) == ["zkpNZ rejected"]

    def test_submission_for_other_input(self, params, rng):
        other, _ = make_registration(params, "user-3", 4, 0, 8, rng)
        _, r_x = make_registration(params, "user-2", 3, 0, 8, rng)
        state = new_search(0, 8, 5)
        sub = make_submission(params, "user-2", 3, r_x, state, 2, rng)
        reasons = verify_submission(params, sub, other.enc_x, state, 2)
        assert "enc_q does not match the registered input" in reasons

    def _round_inputs(self, params, rng, values, flip=None):
        state = new_search(0, 8, len(values))
        enc_xs, subs = {}, []
        for i, x in enumerate(values, start=1):
            uid = f"user-{i}"
            reg, r_x = make_registration(params, uid, x, 0, 8, rng)
            enc_xs[uid] = reg.enc_x
            subs.append(make_submission(params, uid, x, r_x, state, 2, rng, flip_sign=uid == flip))
        return state, enc_xs, subs

    def test_aggregate_round(self, params, committee, rng):
        state, enc_xs, subs = self._round_inputs(params, rng, [1, 2, 3, 4, 5])
        assert aggregate_round(params, subs, state, committee, enc_xs, 2) == -3

    def test_aggregate_round_names_cheating_user(self, params, committee, rng):
        state, enc_xs, subs = self._round_inputs(params, rng, [1, 2, 3], flip="user-2")
        with pytest.raises(ProtocolAbort) as excinfo:
            aggregate_round(params, subs, state, committee, enc_xs, 2)
        assert excinfo.value.culprit == "user-2"

    def test_enc_q_scales_the_difference(self, params, committee, rng):
        reg, _ = make_registration(params, "user-1", 3, 0, 8, rng)
        enc_q = compute_enc_q(params, reg.enc_x, Fraction(9, 2), 2)
        assert committee.ddec(enc_q, 1, count_op=False) == -3

    def test_moments_protocol(self, params, committee, rng):
        values = [1, 2, 3, 4, 5]
        enc_xs, subs = {}, []
        for i, x in enumerate(values, start=1):
            uid = f"user-{i}"
            reg, r_x = make_registration(params, uid, x, 0, 8, rng)
            enc_xs[uid] = reg.enc_x
            subs.append(make_moments_submission(params, uid, x, r_x, rng))
        report = moments_protocol(params, enc_xs, subs, committee)
        assert report == moments_from_values(values)
        assert (report.mu, report.variance) == (3, 2)

    def test_corrupted_moments_chain_is_named(self, params, committee, rng):
        reg, r_x = make_registration(params, "user-1", 4, 0, 8, rng)
        sub = make_moments_submission(params, "user-1", 4, r_x, rng, corrupt=True)
        with pytest.raises(ProtocolAbort) as excinfo:
            moments_protocol(params, {"user-1": reg.enc_x}, [sub], committee)
        assert excinfo.value.culprit == "user-1"
