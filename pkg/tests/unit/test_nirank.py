"""
Unit tests for resharing, shared multiplication, masking triples and the
non-interactive online round.
"""

import pytest

from src.rankstat_mpc.committee import ProtocolAbort, WorkerBehaviour, WorkerCommittee
from src.rankstat_mpc.masking import MaskingConfig
from src.rankstat_mpc.nirank_mpc import (
    TripleBank,
    TripleBankError,
    nirank_round,
    prep_chain,
    reconstruct,
    reshare,
    shared_mul,
    validate_triple,
)
from src.rankstat_mpc.rank_core import new_search
from src.rankstat_mpc.simulation.harness import cached_keys
from src.rankstat_mpc.threshold_paillier import encrypt, threshold_decrypt
from src.rankstat_mpc.transport import MessageBus
from src.rankstat_mpc.zkp import ProofKind

pytestmark = [pytest.mark.unit, pytest.mark.crypto]


@pytest.fixture(scope="module")
def masking(params):
    return MaskingConfig.for_modulus(params.n, 0, 8)


@pytest.fixture(scope="module")
def triples(params, shares, masking):
    committee = WorkerCommittee(params, shares, MessageBus(), seed=5)
    return prep_chain(params, masking, committee, 5)


class TestResharing:
    def test_shares_reconstruct(self, params, shares, committee, rng):
        c = encrypt(params, -7, rng)
        outputs = reshare(params, c, committee)
        assert [o.party_index for o in outputs] == [1, 2, 3]
        assert reconstruct(params, outputs) == -7

    def test_encrypted_shares_match(self, params, shares, committee, rng):
        outputs = reshare(params, encrypt(params, 11, rng), committee)
        for output in outputs:
            opened = threshold_decrypt(params, shares, output.enc_share, rng).value
            assert opened == params.decode(output.plain_share)

    def test_shared_multiplication(self, params, shares, committee, rng):
        delta = reshare(params, encrypt(params, -5, rng), committee)
        product = shared_mul(params, encrypt(params, 3, rng), delta, committee, round_no=1)
        assert threshold_decrypt(params, shares, product, rng).value == -15
        assert committee.ledger.ops_for_round(1)["mul"] == 1

    def test_corrupted_product_proof_aborts(self, params, shares, rng):
        behaviours = {3: WorkerBehaviour(corrupt_kinds=frozenset({ProofKind.MTP}))}
        committee = WorkerCommittee(params, shares, MessageBus(), seed=1, behaviours=behaviours)
        delta = reshare(params, encrypt(params, 2, rng), committee)
        with pytest.raises(ProtocolAbort) as excinfo:
            shared_mul(params, encrypt(params, 3, rng), delta, committee, round_no=1)
        assert excinfo.value.culprit == "worker-3"


class TestPreprocessing:
    def test_triples_are_valid(self, params, committee, masking, triples):
        for triple in triples:
            assert validate_triple(params, triple, committee, masking)
            assert len(triple.audit) == 3

    def test_chain_proof_corruption_names_worker(self, params, shares, masking):
        behaviours = {2: WorkerBehaviour(corrupt_kinds=frozenset({ProofKind.MTP}))}
        committee = WorkerCommittee(params, shares, MessageBus(), seed=2, behaviours=behaviours)
        with pytest.raises(ProtocolAbort) as excinfo:
            prep_chain(params, masking, committee, 1)
        assert excinfo.value.culprit == "worker-2"


class TestTripleBank:
    def test_consume_once(self, triples):
        bank = TripleBank(triples[:1])
        bank.consume("user-1", 1)
        assert bank.remaining == 0
        with pytest.raises(TripleBankError):
            bank.consume("user-1", 1)
        with pytest.raises(TripleBankError):
            bank.consume("user-2", 1)

    def test_save_and_load(self, params, committee, masking, triples, tmp_path):
        path = tmp_path / "bank.bin"
        TripleBank(triples).save(path, params)
        loaded = TripleBank.load(path, params)
        assert len(loaded) == len(triples)
        assert validate_triple(params, loaded.triples[0], committee, masking)

    def test_load_under_other_key(self, params, triples, tmp_path):
        path = tmp_path / "bank.bin"
        TripleBank(triples).save(path, params)
        other_params, _ = cached_keys(512, 2, 0)
        with pytest.raises(TripleBankError):
            TripleBank.load(path, other_params)

    def test_load_garbage(self, params, tmp_path):
        path = tmp_path / "bank.bin"
        path.write_bytes(b"RSTB\x01")
        with pytest.raises(TripleBankError):
            TripleBank.load(path, params)


def test_online_round(params, shares, triples, rng):
    committee = WorkerCommittee(params, shares, MessageBus(), seed=3)
    enc_xs = {f"user-{i}": encrypt(params, i, rng) for i in range(1, 6)}
    state = new_search(0, 8, 5)
    z = nirank_round(params, enc_xs, TripleBank(triples), state, 2, committee)
    assert z == -3
    assert committee.ledger.ops_for_round(1) == {"enc": 5, "dec": 6, "mul": 10, "add": 4}
