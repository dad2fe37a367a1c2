"""
Unit tests for the Fiat-Shamir transcripts.
"""

import json
from pathlib import Path

import pytest

from src.rankstat_mpc.zkp import FsTranscript, fiat_shamir_challenge, transcript_digest

GOLDEN = json.loads(
    (Path(__file__).parent.parent / "fixtures" / "fs_golden.json").read_text(encoding="utf-8")
)


@pytest.mark.unit
def test_golden_challenge():
    transcript = FsTranscript(GOLDEN["tag"])
    for item in GOLDEN["absorbed"]:
        transcript.absorb(bytes.fromhex(item))
    challenge = fiat_shamir_challenge(transcript, 1 << GOLDEN["bound_bits"])
    assert challenge == int(GOLDEN["challenge"], 16)


@pytest.mark.unit
def test_challenge_is_below_bound():
    for bound in (2, 3, 1000, 1 << 128):
        transcript = FsTranscript("MTP").absorb_int(bound, 32)
        assert 0 <= fiat_shamir_challenge(transcript, bound) < bound


@pytest.mark.unit
def test_bound_must_be_at_least_two():
    with pytest.raises(ValueError):
        fiat_shamir_challenge(FsTranscript("MTP"), 1)


@pytest.mark.unit
def test_domain_tags_separate_challenges():
    bound = 1 << 128
    challenges = {fiat_shamir_challenge(FsTranscript(tag), bound) for tag in ("MTP", "MBS", "RG")}
    assert len(challenges) == 3


@pytest.mark.unit
def test_item_boundaries_are_length_prefixed():
    joined = FsTranscript("NZ").absorb(b"ab").absorb(b"c")
    split = FsTranscript("NZ").absorb(b"a").absorb(b"bc")
    assert transcript_digest(joined) != transcript_digest(split)


@pytest.mark.unit
def test_one_byte_changes_the_challenge():
    bound = 1 << 128
    seen = set()
    for value in range(256):
        transcript = FsTranscript("PD").absorb(bytes([value]) + b"\x00" * 31)
        seen.add(fiat_shamir_challenge(transcript, bound))
    assert len(seen) == 256
