"""
Scenario Configuration Module

SimConfig describes one simulated deployment: population, committee, input
range, protocol, target rank, optimizations and the data source. Scenario
and adversary files are line-oriented key=value text; SimConfig also
round-trips through JSON and YAML.
"""

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from ..config import SUPPORTED_MODULUS_BITS, ConfigurationError, load_mapping_file
from ..rank_core import percentile_to_rank
from ..threshold_paillier import MAX_WORKERS
from ..wire import user_actor
from ..zkp import ProofKind

logger = logging.getLogger(__name__)

PROTOCOLS = ("irank", "nirank")
DATA_SOURCES = ("gaussian", "list", "scenario2")
OPTIMIZATIONS = ("early_stop", "speculate", "moments", "split")
ADVERSARY_ACTIONS = (
    "invalid_proof",
    "inconsistent_sign",
    "out_of_range_input",
    "early_quit",
    "forged_partial_decryption",
    "skip_verification",
)
USER_ACTIONS = ("invalid_proof", "inconsistent_sign", "out_of_range_input", "early_quit")
WORKER_ACTIONS = ("invalid_proof", "forged_partial_decryption", "skip_verification")
DEFAULT_EARLY_STOP_DELTA = 1


class ScenarioError(ConfigurationError):
    """Exception raised for invalid scenarios or adversary scripts."""
    pass


def parse_key_values(text: str) -> list[dict[str, str]]:
    """
    Parse key=value text into blocks.

    '#' starts a comment; blocks are separated by blank lines or '---'.
    """
    blocks: list[dict[str, str]] = []
    current: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line == "---":
            if current:
                blocks.append(current)
                current = {}
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ScenarioError(f"line {number}: expected key=value, got {raw.strip()!r}")
        current[key.strip().lower()] = value.strip()
    if current:
        blocks.append(current)
    return blocks


def _int_list(value: str) -> tuple[int, ...]:
    return tuple(int(v) for v in value.replace(";", ",").split(",") if v.strip())


@dataclass
class SimConfig:
    """Knobs of one simulated run."""

    users: int = 5
    workers: int = 3
    low: int = 0
    high: int = 8
    bits: int = 512
    protocol: str = "irank"
    k: int | None = None
    percentile: float | None = None
    delta: int = 0
    optimizations: tuple[str, ...] = ()
    data: str = "list"
    values: tuple[int, ...] = ()
    mu: float = 100.0
    sigma: float = 20.0
    datasets: tuple[tuple[int, ...], ...] = ()
    seed: int = 0
    trials: int = 1
    eta: int = 2
    full_crypto: bool = True

    @property
    def early_stop(self) -> bool:
        return "early_stop" in self.optimizations

    @property
    def speculative_depth(self) -> int:
        for opt in self.optimizations:
            name, _, depth = opt.partition(":")
            if name == "speculate":
                return int(depth or 1)
        return 0

    @property
    def moments_init(self) -> bool:
        return "moments" in self.optimizations

    @property
    def verification_split(self) -> bool:
        return "split" in self.optimizations

    @property
    def tolerance(self) -> int:
        """|z| threshold for termination."""
        if self.delta:
            return self.delta
        return DEFAULT_EARLY_STOP_DELTA if self.early_stop else 0

    @property
    def population(self) -> int:
        """Number of registered inputs, N."""
        if self.data == "scenario2":
            return sum(len(d) for d in self.datasets)
        if self.data == "list" and self.values:
            return len(self.values)
        return self.users

    def rank(self) -> Fraction | None:
        """Target rank k; None for the plain median."""
        if self.k is not None:
            return Fraction(self.k)
        if self.percentile is not None:
            return Fraction(percentile_to_rank(self.percentile, self.population))
        return None

    def validate(self) -> list[str]:
        problems = []
        if self.population < 1:
            problems.append("need at least one input")
        if not 2 <= self.workers <= MAX_WORKERS:
            problems.append(f"workers must be in [2, {MAX_WORKERS}], got {self.workers}")
        if self.low >= self.high:
            problems.append(f"empty range [{self.low}, {self.high}]")
        if self.bits not in SUPPORTED_MODULUS_BITS:
            problems.append(f"bits must be one of {SUPPORTED_MODULUS_BITS}")
        if self.protocol not in PROTOCOLS:
            problems.append(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.percentile is not None and not 0 < self.percentile < 100:
            problems.append(f"percentile must lie in (0, 100), got {self.percentile}")
        if self.k is not None and self.percentile is not None:
            problems.append("give either k or percentile, not both")
        if self.k is not None and not 1 <= self.k <= self.population:
            problems.append(f"k must lie in [1, {self.population}]")
        if self.delta < 0:
            problems.append("delta must be non-negative")
        for opt in self.optimizations:
            name, _, depth = opt.partition(":")
            if name not in OPTIMIZATIONS:
                problems.append(f"unknown optimization {opt!r}")
            elif name == "speculate" and depth and (not depth.isdigit() or int(depth) < 1):
                problems.append(f"speculation depth must be a positive integer, got {depth!r}")
        if self.data not in DATA_SOURCES:
            problems.append(f"data must be one of {DATA_SOURCES}, got {self.data!r}")
        if self.data == "list":
            if not self.values:
                problems.append("data=list needs values")
            elif any(not self.low <= v <= self.high for v in self.values):
                problems.append(f"values must lie in [{self.low}, {self.high}]")
        if self.data == "scenario2":
            if not self.datasets or any(not d for d in self.datasets):
                problems.append("data=scenario2 needs non-empty datasets")
            elif any(not self.low <= v <= self.high for d in self.datasets for v in d):
                problems.append(f"dataset values must lie in [{self.low}, {self.high}]")
        if self.data == "gaussian" and self.sigma < 0:
            problems.append("sigma must be non-negative")
        if self.eta < 2 or self.eta % 2:
            problems.append(f"eta must be an even integer >= 2, got {self.eta}")
        if self.protocol == "nirank" and self.eta > 8:
            problems.append("nirank needs eta <= 8 to keep masked values in range")
        if self.trials < 1:
            problems.append("trials must be positive")
        return problems

    def ensure_valid(self) -> "SimConfig":
        problems = self.validate()
        if problems:
            raise ScenarioError("; ".join(problems))
        return self

    def draw_inputs(self, trial: int = 0) -> list[int]:
        """
        Flattened inputs of the run.

        Gaussian samples are rounded to integers and clamped to the range.
        """
        if self.data == "list":
            return list(self.values)
        if self.data == "scenario2":
            return [v for dataset in self.datasets for v in dataset]
        rng = np.random.default_rng([self.seed, trial])
        samples = np.rint(rng.normal(self.mu, self.sigma, self.users))
        return [int(v) for v in np.clip(samples, self.low, self.high)]

    def owners(self) -> dict[str, str]:
        """Input id to the user holding it; identity outside Scenario-II."""
        if self.data != "scenario2":
            return {user_actor(i): user_actor(i) for i in range(1, self.population + 1)}
        mapping = {}
        index = 1
        for owner, dataset in enumerate(self.datasets, start=1):
            for _ in dataset:
                mapping[user_actor(index)] = user_actor(owner)
                index += 1
        return mapping

    def to_dict(self) -> dict[str, Any]:
        return {
            "users": self.users,
            "workers": self.workers,
            "range": [self.low, self.high],
            "bits": self.bits,
            "protocol": self.protocol,
            "k": self.k,
            "percentile": self.percentile,
            "delta": self.delta,
            "optimizations": list(self.optimizations),
            "data": self.data,
            "values": list(self.values),
            "mu": self.mu,
            "sigma": self.sigma,
            "datasets": [list(d) for d in self.datasets],
            "seed": self.seed,
            "trials": self.trials,
            "eta": self.eta,
            "full_crypto": self.full_crypto,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimConfig":
        low, high = data.get("range", [0, 8])
        percentile = data.get("percentile")
        k = data.get("k")
        return cls(
            users=int(data.get("users", 5)),
            workers=int(data.get("workers", 3)),
            low=int(low),
            high=int(high),
            bits=int(data.get("bits", 512)),
            protocol=str(data.get("protocol", "irank")),
            k=None if k is None else int(k),
            percentile=None if percentile is None else float(percentile),
            delta=int(data.get("delta", 0)),
            optimizations=tuple(data.get("optimizations", ())),
            data=str(data.get("data", "list")),
            values=tuple(int(v) for v in data.get("values", ())),
            mu=float(data.get("mu", 100.0)),
            sigma=float(data.get("sigma", 20.0)),
            datasets=tuple(tuple(int(v) for v in d) for d in data.get("datasets", ())),
            seed=int(data.get("seed", 0)),
            trials=int(data.get("trials", 1)),
            eta=int(data.get("eta", 2)),
            full_crypto=bool(data.get("full_crypto", True)),
        )

    @classmethod
    def from_key_values(cls, text: str) -> "SimConfig":
        """
        Build a config from key=value text.

        Recognised keys: users, workers, range (LO:HI), bits, protocol, k,
        percentile, delta, opt (comma separated), data, values, mu, sigma,
        dataset (repeatable as dataset.1, dataset.2, ...), seed, trials, eta.
        """
        blocks = parse_key_values(text)
        entries = {k: v for block in blocks for k, v in block.items()}
        data: dict[str, Any] = {}
        datasets: list[tuple[str, tuple[int, ...]]] = []
        try:
            for key, value in entries.items():
                if key == "range":
                    lo, _, hi = value.partition(":")
                    data["range"] = [int(lo), int(hi)]
                elif key in ("opt", "optimizations"):
                    data["optimizations"] = [o.strip() for o in value.split(",") if o.strip()]
                elif key == "values":
                    data["values"] = _int_list(value)
                elif key.startswith("dataset"):
                    datasets.append((key, _int_list(value)))
                elif key in ("users", "workers", "bits", "k", "delta", "seed", "trials", "eta"):
                    data[key] = int(value)
                elif key in ("percentile", "mu", "sigma"):
                    data[key] = float(value)
                elif key in ("protocol", "data"):
                    data[key] = value
                else:
                    raise ScenarioError(f"unknown scenario key {key!r}")
        except ValueError as e:
            raise ScenarioError(f"invalid scenario value: {e}") from e
        if datasets:
            data["datasets"] = [values for _, values in sorted(datasets, key=_dataset_order)]
            data.setdefault("data", "scenario2")
            data.setdefault("users", len(datasets))
        return cls.from_dict(data)

    @classmethod
    def load_from_file(cls, file_path: str | Path) -> "SimConfig":
        """Load a scenario from key=value text, JSON or YAML (by suffix)."""
        path = Path(file_path)
        if path.suffix.lower() in (".json", ".yaml", ".yml"):
            return cls.from_dict(load_mapping_file(str(path)))
        try:
            return cls.from_key_values(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ScenarioError(f"Failed to read scenario file {path}: {e}") from e

    def save_to_file(self, file_path: str | Path) -> None:
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)


def _dataset_order(item: tuple[str, tuple[int, ...]]) -> tuple[int, str]:
    _, _, suffix = item[0].partition(".")
    return (int(suffix), item[0]) if suffix.isdigit() else (0, item[0])


@dataclass(frozen=True)
class AdversaryScript:
    """
    One scripted deviation.

    `round` is the search round in which the action happens: 0 targets
    registration, and for early_quit it is the first round skipped.
    """

    target: str
    action: str
    kind: ProofKind | None = None
    round: int = 1

    @property
    def is_worker(self) -> bool:
        return self.target.startswith("worker-")

    @property
    def violates_proof(self) -> bool:
        return self.action in (
            "invalid_proof",
            "inconsistent_sign",
            "out_of_range_input",
            "forged_partial_decryption",
        )

    def validate(self, cfg: SimConfig) -> list[str]:
        problems = []
        if self.action not in ADVERSARY_ACTIONS:
            return [f"unknown adversary action {self.action!r}"]
        role, _, index = self.target.partition("-")
        if role not in ("user", "worker") or not index.isdigit():
            return [f"target must be user-<i> or worker-<j>, got {self.target!r}"]
        limit = cfg.workers if self.is_worker else cfg.population
        if not 1 <= int(index) <= limit:
            problems.append(f"{self.target} does not exist")
        allowed = WORKER_ACTIONS if self.is_worker else USER_ACTIONS
        if self.action not in allowed:
            problems.append(f"{self.action} cannot target {role}s")
        if self.action == "invalid_proof":
            problems.extend(self._validate_kind(cfg))
        if self.action == "inconsistent_sign" and cfg.protocol == "nirank":
            problems.append("users send no signs in nirank")
        if self.action == "early_quit" and self.round < 1:
            problems.append("early_quit round must be at least 1")
        if self.round < 0:
            problems.append("round must be non-negative")
        return problems

    def _validate_kind(self, cfg: SimConfig) -> list[str]:
        if self.kind is None:
            return ["invalid_proof needs a proof kind"]
        if self.is_worker:
            if self.kind == ProofKind.PD:
                return []
            if cfg.protocol == "irank":
                return [f"workers send no zkp{self.kind.name} in irank"]
            return []
        if self.kind == ProofKind.PD:
            return ["users send no zkpPD"]
        if self.round == 0 and self.kind != ProofKind.RG:
            return ["registration carries only a zkpRG"]
        if cfg.protocol == "nirank" and self.round != 0:
            return ["nirank users only send proofs at registration (round 0)"]
        return []

    @classmethod
    def from_mapping(cls, entry: dict[str, str]) -> "AdversaryScript":
        """
        Parse one block: target=..., action=..., and optionally kind=...,
        round=.... Actions may carry their argument inline, as in
        invalid_proof(RG) or early_quit(2).
        """
        if "target" not in entry or "action" not in entry:
            raise ScenarioError("adversary entries need target and action")
        action = entry["action"].strip()
        kind_name = entry.get("kind")
        round_no = entry.get("round")
        if "(" in action and action.endswith(")"):
            action, _, argument = action[:-1].partition("(")
            if action == "invalid_proof":
                kind_name = argument
            elif action == "early_quit":
                round_no = argument
        try:
            kind = ProofKind[kind_name.strip().upper()] if kind_name else None
        except KeyError as e:
            raise ScenarioError(f"unknown proof kind {kind_name!r}") from e
        try:
            parsed_round = int(round_no) if round_no is not None else 1
        except ValueError as e:
            raise ScenarioError(f"invalid round {round_no!r}") from e
        return cls(target=entry["target"], action=action, kind=kind, round=parsed_round)

    def to_dict(self) -> dict[str, Any]:
        return {
            "target": self.target,
            "action": self.action,
            "kind": None if self.kind is None else self.kind.name,
            "round": self.round,
        }


def load_adversary_file(file_path: str | Path) -> list[AdversaryScript]:
    path = Path(file_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Failed to read adversary file {path}: {e}") from e
    return [AdversaryScript.from_mapping(block) for block in parse_key_values(text)]


def validate_scripts(cfg: SimConfig, scripts: list[AdversaryScript]) -> list[str]:
    """Per-script problems plus the corruption limits of the threat model."""
    problems = [p for script in scripts for p in script.validate(cfg)]
    corrupted_users = {s.target for s in scripts if not s.is_worker}
    corrupted_workers = {s.target for s in scripts if s.is_worker}
    user_limit = (cfg.population - 1) // 2
    if len(corrupted_users) > user_limit:
        problems.append(
            f"{len(corrupted_users)} corrupted users exceed the honest-majority limit {user_limit}"
        )
    if len(corrupted_workers) > cfg.workers - 1:
        problems.append(
            f"{len(corrupted_workers)} corrupted workers leave no honest worker"
        )
    return problems

