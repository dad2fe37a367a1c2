"""
Protocol Simulation Harness

Runs a scenario end to end over the in-process bus: key setup, input
registration, the optional moments initialisation, then the interactive or
non-interactive rank search, with scripted adversaries injected along the
way. Identifiable aborts end up in the RunReport instead of propagating.
"""

import logging
import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any

from ..audit import AuditEventType, ProtocolAuditLogger
from ..committee import ProtocolAbort, WorkerBehaviour, WorkerCommittee
from ..config import CryptoConfig
from ..masking import MaskingConfig
from ..nirank_mpc import TripleBank, nirank_round, prep_chain
from ..rank_core import (
    L1_KINDS,
    Continue,
    Done,
    MomentsReport,
    SearchState,
    SignSubmission,
    aggregate_signs,
    init_range_from_report,
    make_moments_submission,
    make_registration,
    make_submission,
    moments_first_guess,
    moments_from_values,
    moments_protocol,
    new_search,
    speculative_tree,
    update_state,
    verify_registration,
    verify_round_submissions,
    worst_case_rounds,
)
from ..threshold_paillier import (
    Ciphertext,
    PublicParams,
    ScaleFactor,
    SecretKeyShare,
    keygen,
    scale_encode,
)
from ..transport import CostLedger, MessageBus
from ..utils.seeding import derive_rng, derive_seed_bytes
from ..wire import ByteWriter, Frame, MessageKind, user_actor
from ..zkp import ProofKind
from .attestation import SplitRound, cross_check, verification_split
from .mirror import oracle_value, run_mirror
from .scenario import AdversaryScript, ScenarioError, SimConfig, validate_scripts

logger = logging.getLogger(__name__)


@lru_cache(maxsize=8)
def cached_keys(bits: int, J: int, seed: int) -> tuple[PublicParams, tuple[SecretKeyShare, ...]]:
    """Dealer keys of a seeded run, shared between runs with the same seed."""
    params, shares = keygen(bits, J, derive_rng(seed, "dealer"))
    return params, tuple(shares)


@dataclass
class RunReport:
    """Outcome of one simulated run."""

    protocol: str
    N: int
    J: int
    bits: int
    result: int | None
    true_value: Fraction
    rounds_used: int
    communication_rounds: int
    abort_info: dict[str, str] | None = None
    degraded: bool = False
    z_history: list[int] = field(default_factory=list)
    guesses: list[Fraction] = field(default_factory=list)
    transcript_digest: str = ""
    ledger: CostLedger | None = None
    moments: MomentsReport | None = None
    cross_check: list[dict[str, Any]] = field(default_factory=list)
    run_id: str = ""
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def abs_error(self) -> float | None:
        if self.result is None:
            return None
        return float(abs(self.result - self.true_value))

    @property
    def aborted(self) -> bool:
        return self.abort_info is not None

    def to_dict(self) -> dict[str, Any]:
        """Stable-ordered summary; timings are left out so reports are reproducible."""
        return {
            "protocol": self.protocol,
            "N": self.N,
            "J": self.J,
            "bits": self.bits,
            "result": self.result,
            "true_value": float(self.true_value),
            "abs_error": self.abs_error,
            "rounds_used": self.rounds_used,
            "communication_rounds": self.communication_rounds,
            "abort_info": self.abort_info,
            "degraded": self.degraded,
            "z_history": list(self.z_history),
            "guesses": [float(g) for g in self.guesses],
            "moments": None if self.moments is None else self.moments.to_dict(),
            "cross_check": list(self.cross_check),
            "transcript_digest": self.transcript_digest,
            "ledger": None if self.ledger is None else self.ledger.to_dict(),
        }


def search_start(cfg: SimConfig, N: int, moments: MomentsReport | None) -> SearchState:
    """Initial state, narrowed by the moments when they seed a median search."""
    k = cfg.rank()
    if moments is None or k is not None:
        if moments is not None:
            logger.info("Moments initialisation only narrows median searches; using the full range")
        return new_search(cfg.low, cfg.high, N, k, cfg.tolerance)
    alpha, beta = init_range_from_report(moments, cfg.low, cfg.high)
    first_guess = moments_first_guess(moments.mu, alpha, beta)
    logger.info(f"Moments narrowed the search to [{alpha}, {beta}]")
    return new_search(cfg.low, cfg.high, N, None, cfg.tolerance, alpha, beta, first_guess)


def _behaviours(scripts: Sequence[AdversaryScript]) -> dict[int, WorkerBehaviour]:
    behaviours: dict[int, WorkerBehaviour] = {}
    for script in scripts:
        if not script.is_worker:
            continue
        index = int(script.target.partition("-")[2])
        current = behaviours.get(index, WorkerBehaviour())
        if script.action == "forged_partial_decryption":
            current = replace(current, forge_partial_decryption=True)
        elif script.action == "skip_verification":
            current = replace(current, skip_verification=True)
        elif script.action == "invalid_proof" and script.kind is not None:
            current = replace(current, corrupt_kinds=current.corrupt_kinds | {script.kind})
        behaviours[index] = current
    return behaviours


class ProtocolRun:
    """One cryptographic execution of a scenario."""

    def __init__(
        self,
        cfg: SimConfig,
        scripts: Sequence[AdversaryScript] = (),
        audit_db: str | Path | None = None,
        bank: TripleBank | None = None,
        config: CryptoConfig | None = None,
    ):
        self.cfg = cfg
        self.scripts = list(scripts)
        self.inputs = cfg.draw_inputs()
        self.ids = [user_actor(i) for i in range(1, len(self.inputs) + 1)]
        self.owners = cfg.owners()
        self.user_actors = sorted(set(self.owners.values()), key=lambda a: int(a.partition("-")[2]))
        self.run_id = derive_seed_bytes(cfg.seed, "run-id", 16).hex()
        self.audit = ProtocolAuditLogger(audit_db, self.run_id) if audit_db else None
        self.bus = MessageBus(audit=self.audit)

        started = time.perf_counter()
        params, shares = cached_keys(cfg.bits, cfg.workers, cfg.seed)
        self.params = params
        self.committee = WorkerCommittee(
            params, list(shares), self.bus, cfg.seed, _behaviours(self.scripts), config
        )
        self.eta = ScaleFactor(cfg.eta)
        self.rngs = {uid: derive_rng(cfg.seed, uid) for uid in self.ids}
        self.bank = bank
        self.enc_xs: dict[str, Ciphertext] = {}
        self.r_xs: dict[str, int] = {}
        self.registered: dict[str, int] = {}
        self.moments: MomentsReport | None = None
        self.z_history: list[int] = []
        self.guesses: list[Fraction] = []
        self.split_rounds: list[SplitRound] = []
        self.communication_rounds = 0
        self.degraded = False
        self.timings = {"setup": time.perf_counter() - started}

    # -- scripted behaviour -------------------------------------------------

    def _script(self, uid: str, action: str, round_no: int | None = None) -> AdversaryScript | None:
        for script in self.scripts:
            if script.target == uid and script.action == action:
                if round_no is None or script.round == round_no:
                    return script
        return None

    def _corrupt_kind(self, uid: str, round_no: int) -> ProofKind | None:
        script = self._script(uid, "invalid_proof", round_no)
        return None if script is None else script.kind

    # -- messaging ----------------------------------------------------------

    def _send(self, uid: str, kind: MessageKind, round_no: int, payload: bytes) -> None:
        self.bus.send(
            Frame(
                kind=kind,
                sender=self.owners[uid],
                receivers=tuple(self.committee.actors),
                round=round_no,
                payload=payload,
            )
        )

    def _announce_guesses(self, guesses: Sequence[Fraction], round_no: int) -> None:
        writer = ByteWriter().write_int(len(guesses), 2)
        for guess in guesses:
            scaled = scale_encode(guess, self.eta, self.params).value
            writer.write_int(self.params.encode(scaled), self.params.base_width)
        self.committee.broadcast(
            self.committee.indices[0],
            MessageKind.GUESS,
            round_no,
            writer.getvalue(),
            table_bytes=0,
            extra_receivers=self.user_actors,
        )

    def _record(self, state: SearchState, z: int) -> None:
        self.guesses.append(state.guess)
        self.z_history.append(z)

    # -- phases -------------------------------------------------------------

    def register(self) -> None:
        """Round 0: every input is encrypted with a zkpRG; workers verify all of them."""
        cfg, params = self.cfg, self.params
        registrations = []
        for uid, value in zip(self.ids, self.inputs, strict=True):
            x, claimed = value, None
            if self._script(uid, "out_of_range_input"):
                x, claimed = cfg.high + (cfg.high - cfg.low), value
            reg, r_x = make_registration(
                params, uid, x, cfg.low, cfg.high, self.rngs[uid], claimed
            )
            if self._corrupt_kind(uid, 0) == ProofKind.RG:
                reg = replace(reg, proof=reg.proof.corrupted())
            self._send(uid, MessageKind.REGISTRATION, 0, reg.encode(params.bits))
            registrations.append(reg)
            self.r_xs[uid] = r_x
            self.registered[uid] = x
        self.bus.ledger.count_proofs(0, ["RG"] * len(registrations))

        verdicts = self.committee.check_all(
            [
                (lambda reg=reg: verify_registration(params, reg, cfg.low, cfg.high))
                for reg in registrations
            ]
        )
        self.bus.ledger.count_proofs(0, ["RG"] * len(registrations), verified=True)
        for reg, ok in zip(registrations, verdicts, strict=True):
            if not ok:
                logger.warning(f"Registration of {reg.user_id} rejected")
                raise ProtocolAbort(reg.user_id, "invalid zkpRG on registration")
        self.enc_xs = {reg.user_id: reg.enc_x for reg in registrations}
        logger.info(f"Registered {len(registrations)} inputs")

    def run_moments(self) -> MomentsReport:
        subs = []
        for uid in self.ids:
            sub = make_moments_submission(
                self.params, uid, self.registered[uid], self.r_xs[uid], self.rngs[uid]
            )
            self._send(uid, MessageKind.MOMENTS, 0, sub.encode(self.params.bits))
            subs.append(sub)
        self.bus.ledger.count_proofs(0, ["MTP"] * (3 * len(subs)))
        self.moments = moments_protocol(self.params, self.enc_xs, subs, self.committee)
        return self.moments

    def _verify_node(self, state: SearchState, subs: list[SignSubmission]) -> None:
        if self.cfg.verification_split:
            attestations = verification_split(
                self.params, subs, self.enc_xs, state, self.eta, self.committee, self.run_id
            )
            self.split_rounds.append(SplitRound(state, tuple(subs), tuple(attestations)))
        else:
            verify_round_submissions(
                self.params, subs, self.enc_xs, state, self.eta, self.committee
            )

    def run_irank(self, state: SearchState) -> int:
        """
        Interactive search: one communication round per speculative tree.

        A user scripted to quit early stops submitting from its quit round;
        the remaining users are aggregated with the population adjusted.
        """
        params = self.params
        quit_rounds = {s.target: s.round for s in self.scripts if s.action == "early_quit"}
        depth = self.cfg.speculative_depth
        while True:
            self.communication_rounds += 1
            active = [uid for uid in self.ids if quit_rounds.get(uid, math.inf) > state.round]
            if not active:
                raise ScenarioError("every user quit before the search finished")
            if len(active) < len(self.ids):
                if not self.degraded:
                    logger.warning(
                        f"{len(self.ids) - len(active)} users quit; "
                        f"round {state.round} runs with N={len(active)}"
                    )
                self.degraded = True
            state = state.with_population(len(active))
            nodes = speculative_tree(state, depth)
            self._announce_guesses([node.guess for node in nodes], state.round)

            subs_by_path: dict[str, list[SignSubmission]] = {node.path: [] for node in nodes}
            for uid in active:
                payload = b""
                for node in nodes:
                    node_round = node.state.round
                    sub = make_submission(
                        params,
                        uid,
                        self.registered[uid],
                        self.r_xs[uid],
                        node.state,
                        self.eta,
                        self.rngs[uid],
                        flip_sign=self._script(uid, "inconsistent_sign", node_round) is not None,
                        corrupt=self._corrupt_kind(uid, node_round),
                    )
                    subs_by_path[node.path].append(sub)
                    payload += sub.encode(params.bits)
                self._send(uid, MessageKind.SIGN_SUBMISSION, state.round, payload)
                self.bus.ledger.count_proofs(
                    state.round, [kind.name for kind in L1_KINDS] * len(nodes)
                )

            for node in nodes:
                self._verify_node(node.state, subs_by_path[node.path])

            by_path = {node.path: node for node in nodes}
            node = nodes[0]
            while True:
                z = aggregate_signs(
                    params,
                    [sub.enc_sign for sub in subs_by_path[node.path]],
                    node.state,
                    self.committee,
                    announce_to=self.user_actors,
                )
                self._record(node.state, z)
                outcome = update_state(node.state, z)
                if isinstance(outcome, Done):
                    return outcome.result
                following = by_path.get(node.path + ("+" if z > 0 else "-"))
                if following is None:
                    state = outcome.state
                    break
                node = following

    def run_nirank(self, state: SearchState) -> int:
        """Non-interactive search over a prepared (or loaded) triple bank."""
        cfg, params = self.cfg, self.params
        if self.bank is None:
            masking = MaskingConfig.for_modulus(params.n, cfg.low, cfg.high)
            count = len(self.ids) * worst_case_rounds(state)
            self.bank = TripleBank(prep_chain(params, masking, self.committee, count))
        while True:
            self.communication_rounds += 1
            z = nirank_round(
                params,
                self.enc_xs,
                self.bank,
                state,
                self.eta,
                self.committee,
                announce_to=self.user_actors,
            )
            self._record(state, z)
            outcome = update_state(state, z)
            if isinstance(outcome, Done):
                return outcome.result
            assert isinstance(outcome, Continue)
            state = outcome.state

    def execute(self) -> RunReport:
        cfg = self.cfg
        if self.audit:
            self.audit.log_event(AuditEventType.RUN_START, details=cfg.to_dict())
        result: int | None = None
        abort_info = None
        started = time.perf_counter()
        try:
            self.register()
            if cfg.moments_init:
                self.run_moments()
            state = search_start(cfg, len(self.ids), self.moments)
            self.timings["registration"] = time.perf_counter() - started
            if cfg.protocol == "irank":
                result = self.run_irank(state)
            else:
                result = self.run_nirank(state)
        except ProtocolAbort as e:
            logger.warning(f"Run aborted: {e}")
            abort_info = {
                "culprit": self.owners.get(e.culprit, e.culprit),
                "input": e.culprit,
                "reason": e.reason,
            }
            if self.audit:
                self.audit.log_event(AuditEventType.ABORT, e.culprit, {"reason": e.reason})
        self.timings["search"] = time.perf_counter() - started

        findings = []
        if self.split_rounds:
            found = cross_check(
                self.params, self.split_rounds, self.enc_xs, self.eta, cfg.seed, self.run_id
            )
            findings = [
                {"worker": f.worker, "round": f.round, "reason": f.reason} for f in found
            ]
            if self.audit:
                for finding in findings:
                    self.audit.log_event(AuditEventType.CROSS_CHECK, finding["worker"], finding)
            if found and abort_info is None:
                abort_info = {
                    "culprit": found[0].worker,
                    "input": found[0].worker,
                    "reason": found[0].reason,
                }
                result = None

        report = RunReport(
            protocol=cfg.protocol,
            N=len(self.ids),
            J=cfg.workers,
            bits=cfg.bits,
            result=result,
            true_value=oracle_value(self.inputs, cfg.rank()),
            rounds_used=len(self.z_history),
            communication_rounds=self.communication_rounds,
            abort_info=abort_info,
            degraded=self.degraded,
            z_history=list(self.z_history),
            guesses=list(self.guesses),
            transcript_digest=self.bus.transcript_digest(),
            ledger=self.bus.ledger,
            moments=self.moments,
            cross_check=findings,
            run_id=self.run_id,
            timings=dict(self.timings),
        )
        if self.audit:
            self.audit.log_event(
                AuditEventType.RUN_END,
                details={"result": result, "rounds": report.rounds_used},
            )
        logger.info(
            f"{cfg.protocol} run finished: result={result} truth={float(report.true_value)} "
            f"rounds={report.rounds_used}"
        )
        return report


def run_plaintext(cfg: SimConfig, trial: int = 0) -> RunReport:
    """Mirror run without cryptography, for sweeps."""
    inputs = cfg.draw_inputs(trial)
    moments = moments_from_values(inputs) if cfg.moments_init else None
    mirror = run_mirror(inputs, search_start(cfg, len(inputs), moments))
    return RunReport(
        protocol=cfg.protocol,
        N=len(inputs),
        J=cfg.workers,
        bits=0,
        result=mirror.result,
        true_value=oracle_value(inputs, cfg.rank()),
        rounds_used=mirror.rounds,
        communication_rounds=mirror.rounds,
        z_history=mirror.z_history,
        guesses=mirror.guesses,
        moments=moments,
    )


def run_scenario(
    cfg: SimConfig,
    scripts: Sequence[AdversaryScript] = (),
    audit_db: str | Path | None = None,
    bank: TripleBank | None = None,
    config: CryptoConfig | None = None,
) -> RunReport:
    """
    Run one scenario.

    Args:
        cfg: Scenario configuration
        scripts: Adversary scripts to inject
        audit_db: SQLite file receiving frames and events
        bank: Prepared triples for nirank, prepared on the fly when omitted
        config: Crypto configuration (global config when omitted)

    Raises:
        ScenarioError: invalid configuration or adversary scripts
    """
    cfg.ensure_valid()
    problems = validate_scripts(cfg, list(scripts))
    if problems:
        raise ScenarioError("; ".join(problems))
    if not cfg.full_crypto:
        if scripts:
            raise ScenarioError("adversary scripts need the cryptographic path")
        return run_plaintext(cfg)
    return ProtocolRun(cfg, scripts, audit_db, bank, config).execute()