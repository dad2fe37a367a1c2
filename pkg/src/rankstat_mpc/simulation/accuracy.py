"""
Accuracy experiments: mean absolute error of the search against the
sorted-list oracle over repeated Gaussian trials.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Any

from .harness import RunReport, run_plaintext, run_scenario
from .mirror import mean_absolute_error
from .scenario import ScenarioError, SimConfig

logger = logging.getLogger(__name__)

DEFAULT_PERCENTILES = (25.0, 50.0, 75.0)


@dataclass(frozen=True)
class AccuracyRow:
    percentile: float
    sigma: float
    trials: int
    mae: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "percentile": self.percentile,
            "sigma": self.sigma,
            "trials": self.trials,
            "mae": self.mae,
        }


def _trial(cfg: SimConfig, trial: int) -> RunReport:
    if cfg.full_crypto:
        report = run_scenario(replace(cfg, seed=cfg.seed + trial))
    else:
        report = run_plaintext(cfg, trial)
    if report.result is None:
        raise ScenarioError(f"trial {trial} aborted: {report.abort_info}")
    return report


def run_accuracy_experiment(
    cfg: SimConfig,
    percentiles: Sequence[float] = DEFAULT_PERCENTILES,
    sigmas: Sequence[float] | None = None,
    trials: int | None = None,
) -> list[AccuracyRow]:
    """
    MAE per (percentile, sigma) over `trials` Gaussian datasets.

    The plaintext mirror is used unless cfg.full_crypto is set; each trial
    draws fresh inputs from (cfg.mu, sigma).
    """
    trials = trials or cfg.trials
    base = replace(cfg, data="gaussian", values=(), datasets=(), k=None)
    rows = []
    for sigma in sigmas if sigmas is not None else (cfg.sigma,):
        for percentile in percentiles:
            point = replace(base, sigma=float(sigma), percentile=float(percentile))
            point.ensure_valid()
            reports = [_trial(point, t) for t in range(trials)]
            mae = mean_absolute_error(
                [r.result for r in reports if r.result is not None],
                [r.true_value for r in reports],
            )
            row = AccuracyRow(float(percentile), float(sigma), trials, mae)
            logger.info(
                f"percentile={row.percentile} sigma={row.sigma}: MAE {row.mae:.3f} "
                f"over {trials} trials"
            )
            rows.append(row)
    return rows