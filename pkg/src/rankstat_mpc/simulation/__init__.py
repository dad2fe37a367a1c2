"""
Simulation package: scenarios, the protocol harness, accuracy sweeps and
cost accounting.
"""

from .accuracy import AccuracyRow, run_accuracy_experiment
from .attestation import BatchAttestation, CrossCheckFinding, cross_check, verification_split
from .costs import CostRow, account_costs
from .harness import ProtocolRun, RunReport, run_plaintext, run_scenario
from .mirror import MirrorResult, mirror_search, oracle_value, run_mirror
from .scenario import AdversaryScript, ScenarioError, SimConfig, load_adversary_file

__all__ = [
    "AccuracyRow",
    "AdversaryScript",
    "BatchAttestation",
    "CostRow",
    "CrossCheckFinding",
    "MirrorResult",
    "ProtocolRun",
    "RunReport",
    "ScenarioError",
    "SimConfig",
    "account_costs",
    "cross_check",
    "load_adversary_file",
    "mirror_search",
    "oracle_value",
    "run_accuracy_experiment",
    "run_mirror",
    "run_plaintext",
    "run_scenario",
    "verification_split",
]
