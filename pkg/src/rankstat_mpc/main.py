import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from typing import Any

from . import __version__
from .committee import WorkerCommittee
from .config import ConfigurationError
from .masking import MaskingConfig, MaskingError
from .nirank_mpc import TripleBank, TripleBankError, prep_chain
from .rank_core import new_search, worst_case_rounds
from .simulation import (
    SimConfig,
    account_costs,
    load_adversary_file,
    run_accuracy_experiment,
    run_scenario,
)
from .simulation.harness import cached_keys
from .transport import MessageBus

# Configure logger for this module
logger = logging.getLogger(__name__)


def _range(value: str) -> tuple[int, int]:
    low, sep, high = value.partition(":")
    try:
        if not sep:
            raise ValueError(value)
        return int(low), int(high)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {value!r}") from e


def _float_list(value: str) -> list[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {value!r}") from e


def _add_scenario_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("scenario options")
    group.add_argument("--scenario", help="Scenario file (key=value, JSON or YAML)")
    group.add_argument("--users", type=int, help="Number of users N")
    group.add_argument("--workers", type=int, help="Number of workers J")
    group.add_argument("--range", type=_range, dest="value_range", help="Public input range LO:HI")
    group.add_argument("--bits", type=int, help="Modulus size in bits")
    group.add_argument("--protocol", choices=["irank", "nirank"], help="Protocol to run")
    group.add_argument("--percentile", type=float, help="Target percentile in (0, 100)")
    group.add_argument("--k", type=int, help="Target rank k (default: median)")
    group.add_argument("--delta", type=int, help="Early-stop tolerance on |z|")
    group.add_argument(
        "--opt",
        action="append",
        default=[],
        help="Optimization: early_stop, speculate:D, moments or split (repeatable)",
    )
    group.add_argument("--data", choices=["gaussian", "list"], help="Input source")
    group.add_argument("--values", help="Comma-separated inputs for --data list")
    group.add_argument("--mu", type=float, help="Gaussian mean")
    group.add_argument("--sigma", type=float, help="Gaussian standard deviation")
    group.add_argument("--scenario2", help="Per-user datasets file (dataset.<i>=v1,v2,...)")
    group.add_argument("--seed", type=int, help="Run seed")
    group.add_argument("--trials", type=int, help="Number of trials")
    group.add_argument("--eta", type=int, help="Scaling factor for half-integer guesses")


def build_config(args: argparse.Namespace) -> SimConfig:
    """
    Scenario file (if any) overridden by command-line flags.

    Without a scenario file the run draws Gaussian inputs over [0, 200].
    """
    if args.scenario:
        cfg = SimConfig.load_from_file(args.scenario)
    else:
        cfg = SimConfig(data="gaussian", high=200)
    overrides: dict[str, Any] = {
        name: getattr(args, name)
        for name in (
            "users", "workers", "bits", "protocol", "percentile", "k", "delta",
            "data", "mu", "sigma", "seed", "trials", "eta",
        )
        if getattr(args, name, None) is not None
    }
    if args.value_range is not None:
        overrides["low"], overrides["high"] = args.value_range
    if args.opt:
        overrides["optimizations"] = tuple(args.opt)
    if args.values:
        overrides["values"] = tuple(int(v) for v in args.values.split(",") if v.strip())
        overrides.setdefault("data", "list")
    if args.scenario2:
        datasets = SimConfig.load_from_file(args.scenario2).datasets
        overrides.update(data="scenario2", datasets=datasets, users=len(datasets))
    return replace(cfg, **overrides)


def _emit(rows: list[dict[str, Any]] | dict[str, Any], out: str) -> None:
    if out == "json":
        print(json.dumps(rows, indent=2))
        return
    records = rows if isinstance(rows, list) else [
        {"key": key, "value": json.dumps(value) if isinstance(value, dict | list) else value}
        for key, value in rows.items()
    ]
    buffer = io.StringIO()
    if records:
        writer = csv.DictWriter(buffer, fieldnames=list(records[0]))
        writer.writeheader()
        writer.writerows(records)
    print(buffer.getvalue(), end="")


def _load_bank(path: str, cfg: SimConfig) -> TripleBank:
    params, _ = cached_keys(cfg.bits, cfg.workers, cfg.seed)
    return TripleBank.load(path, params)


def cmd_run(args: argparse.Namespace, cfg: SimConfig) -> int:
    scripts = load_adversary_file(args.adversary) if args.adversary else []
    bank = _load_bank(args.prep_bank, cfg) if args.prep_bank else None
    if args.plaintext:
        cfg = replace(cfg, full_crypto=False)
    report = run_scenario(cfg, scripts, audit_db=args.audit_db, bank=bank)
    _emit(report.to_dict(), args.out)
    return 1 if report.aborted else 0


def cmd_accuracy(args: argparse.Namespace, cfg: SimConfig) -> int:
    cfg = replace(cfg, full_crypto=args.full_crypto)
    rows = run_accuracy_experiment(cfg, args.percentiles, args.sigmas, cfg.trials)
    _emit([row.to_dict() for row in rows], args.out)
    return 0


def cmd_costs(args: argparse.Namespace, cfg: SimConfig) -> int:
    report = run_scenario(cfg, audit_db=args.audit_db)
    rows = account_costs(report, cfg)
    _emit([row.to_dict() for row in rows], args.out)
    return 0 if all(row.ok is not False for row in rows) else 1


def cmd_prep(args: argparse.Namespace, cfg: SimConfig) -> int:
    cfg.ensure_valid()
    params, shares = cached_keys(cfg.bits, cfg.workers, cfg.seed)
    committee = WorkerCommittee(params, list(shares), MessageBus(), cfg.seed)
    N = cfg.population
    rounds = args.rounds or worst_case_rounds(new_search(cfg.low, cfg.high, N, cfg.rank()))
    masking = MaskingConfig.for_modulus(params.n, cfg.low, cfg.high)
    bank = TripleBank(prep_chain(params, masking, committee, N * rounds))
    bank.save(args.output, params)
    _emit({"triples": len(bank), "rounds": rounds, "path": str(args.output)}, args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the rankstat CLI command."""
    parser = argparse.ArgumentParser(
        prog="rankstat",
        description="Secure rank statistics over threshold Paillier: simulator and cost model",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version",
        "-V",
        action="version",
        version=f"%(prog)s {__version__}",
        help="Show version information and exit",
    )

    # Logging and debug options
    debug_group = parser.add_argument_group("debug and logging options")
    debug_group.add_argument(
        "-v", "--verbose", action="store_true", help="Enable verbose output"
    )
    debug_group.add_argument(
        "-q", "--quiet", action="store_true", help="Suppress non-error output"
    )
    debug_group.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default="INFO",
        help="Set logging level (default: INFO)",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="Run one scenario")
    _add_scenario_arguments(run_parser)
    run_parser.add_argument("--adversary", help="Adversary script file")
    run_parser.add_argument("--prep-bank", help="Triple bank written by 'prep'")
    run_parser.add_argument("--audit-db", help="SQLite file for frames and events")
    run_parser.add_argument(
        "--plaintext", action="store_true", help="Use the plaintext mirror instead of crypto"
    )

    accuracy_parser = subparsers.add_parser("accuracy", help="MAE against the sorted oracle")
    _add_scenario_arguments(accuracy_parser)
    accuracy_parser.add_argument(
        "--percentiles", type=_float_list, default=[25.0, 50.0, 75.0], help="e.g. 25,50,75"
    )
    accuracy_parser.add_argument("--sigmas", type=_float_list, help="e.g. 10,20,30,40,50")
    accuracy_parser.add_argument(
        "--full-crypto", action="store_true", help="Run every trial through the crypto path"
    )

    costs_parser = subparsers.add_parser("costs", help="Compare measured costs with the formulas")
    _add_scenario_arguments(costs_parser)
    costs_parser.add_argument("--audit-db", help="SQLite file for frames and events")

    prep_parser = subparsers.add_parser("prep", help="Generate a triple bank for nirank")
    _add_scenario_arguments(prep_parser)
    prep_parser.add_argument("--output", "-o", required=True, help="Bank file to write")
    prep_parser.add_argument("--rounds", type=int, help="Rounds to prepare (default: worst case)")

    for sub in (run_parser, accuracy_parser, costs_parser, prep_parser):
        sub.add_argument("--out", choices=["json", "csv"], default="json", help="Report format")

    args = parser.parse_args(argv)

    # Configure logging based on arguments
    log_level = getattr(logging, args.log_level.upper())
    if args.verbose:
        log_level = logging.DEBUG
    elif args.quiet:
        log_level = logging.ERROR

    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    commands = {"run": cmd_run, "accuracy": cmd_accuracy, "costs": cmd_costs, "prep": cmd_prep}
    try:
        cfg = build_config(args)
        return commands[args.command](args, cfg)
    except (ConfigurationError, TripleBankError, MaskingError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())