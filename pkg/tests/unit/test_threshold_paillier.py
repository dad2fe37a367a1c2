"""
Unit tests for the threshold Paillier cryptosystem.
"""

from fractions import Fraction
import random

import pytest

from src.rankstat_mpc.threshold_paillier import (
    InvalidPartialDecryption,
    KeySetupError,
    PartialDecryption,
    PlaintextRangeError,
    ScaleFactor,
    ThresholdPaillierError,
    combine,
    encrypt,
    encrypt_with_randomness,
    hom_add,
    hom_scalar_mul,
    hom_sub,
    hom_sum,
    keygen,
    lagrange_coefficient,
    partial_decrypt,
    scale_encode,
    threshold_decrypt,
)


@pytest.mark.unit
class TestKeygen:
    def test_public_parameters(self, params):
        assert params.n.bit_length() == 512
        assert params.n_sq == params.n * params.n
        assert params.g == params.n + 1
        assert params.J == 3
        assert params.delta == 6
        assert len(params.verification_keys) == 3

    def test_unsupported_modulus_rejected(self):
        with pytest.raises(KeySetupError):
            keygen(768, 3, random.Random(0))

    def test_single_worker_rejected(self):
        with pytest.raises(KeySetupError):
            keygen(512, 1, random.Random(0))


@pytest.mark.unit
class TestEncryption:
    @pytest.mark.parametrize("value", [0, 1, -1, 42, -1000])
    def test_signed_values_decrypt(self, params, shares, rng, value):
        c = encrypt(params, value, rng)
        assert threshold_decrypt(params, shares, c, rng).value == value

    def test_range_edges(self, params, shares, rng):
        for value in (params.half, -params.half):
            c = encrypt(params, value, rng)
            assert threshold_decrypt(params, shares, c, rng).value == value

    def test_out_of_range_plaintext(self, params, rng):
        with pytest.raises(PlaintextRangeError):
            encrypt(params, params.half + 1, rng)

    def test_encrypt_needs_randomness(self, params):
        with pytest.raises(ThresholdPaillierError):
            encrypt(params, 5)

    def test_public_randomness_is_deterministic(self, params):
        assert encrypt(params, 7, randomness=1) == encrypt(params, 7, randomness=1)

    def test_returned_randomness_reproduces_ciphertext(self, params, rng):
        c, r = encrypt_with_randomness(params, -9, rng)
        assert encrypt(params, -9, randomness=r) == c


@pytest.mark.unit
class TestHomomorphism:
    def test_add_sub_scalar(self, params, shares, rng):
        a = encrypt(params, 12, rng)
        b = encrypt(params, -5, rng)
        assert threshold_decrypt(params, shares, hom_add(params, a, b), rng).value == 7
        assert threshold_decrypt(params, shares, hom_sub(params, a, b), rng).value == 17
        assert threshold_decrypt(params, shares, hom_scalar_mul(params, b, 3), rng).value == -15

    def test_sum(self, params, shares, rng):
        cs = [encrypt(params, v, rng) for v in (1, -1, 1, 1, -1)]
        assert threshold_decrypt(params, shares, hom_sum(params, cs), rng).value == 1


@pytest.mark.unit
class TestCombine:
    def _parts(self, params, shares, c, rng):
        results = [partial_decrypt(params, share, c, rng) for share in shares]
        return [p for p, _ in results], [proof for _, proof in results]

    def test_requires_every_worker(self, params, shares, rng):
        c = encrypt(params, 3, rng)
        parts, _ = self._parts(params, shares, c, rng)
        with pytest.raises(ThresholdPaillierError):
            combine(params, parts[:2])

    def test_duplicate_indices(self, params, shares, rng):
        c = encrypt(params, 3, rng)
        parts, _ = self._parts(params, shares, c, rng)
        with pytest.raises(ThresholdPaillierError):
            combine(params, [parts[0], parts[0], parts[1]])

    def test_forged_share_fails_its_proof(self, params, shares, rng):
        c = encrypt(params, 3, rng)
        parts, proofs = self._parts(params, shares, c, rng)
        parts[1] = PartialDecryption(parts[1].index, parts[1].share * 4 % params.n_sq)
        with pytest.raises(InvalidPartialDecryption) as excinfo:
            combine(params, parts, c, proofs)
        assert excinfo.value.index == 2

    def test_lagrange_coefficients_are_integral(self):
        indices = [1, 2, 3]
        coefficients = [lagrange_coefficient(i, indices, 6) for i in indices]
        assert coefficients == [18, -18, 6]


@pytest.mark.unit
def test_scale_encode_half_integers():
    assert scale_encode(Fraction(5, 2), 2).value == 5
    assert scale_encode(Fraction(-3, 2), ScaleFactor(4)).value == -6
    with pytest.raises(PlaintextRangeError):
        scale_encode(Fraction(1, 4), 2)


@pytest.mark.unit
def test_scale_factor_must_be_even():
    with pytest.raises(ValueError):
        ScaleFactor(3)
