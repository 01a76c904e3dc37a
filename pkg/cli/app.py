# cli/app.py
"""
NetGame QL — Command Line
=========================
Batch entry point for the experiment harness:

    python -m cli.app analyze  --config game.json
    python -m cli.app simulate --config simulate.json --out results/
    python -m cli.app qre      --config qre.json
    python -m cli.app certify  --config certify.json --threads 4
    python -m cli.app boxplot  --config boxplot.json --threads 8
    python -m cli.app boundary --config boundary.json --seed 7

Every command prints a JSON summary on stdout. Exit codes: 0 success,
1 configuration error, 2 runtime failure.
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional

from dotenv import load_dotenv

from evals.config import (
    CertifyConfig,
    QREConfig,
    SimulateConfig,
    SweepConfig,
    apply_overrides,
    load_config,
    load_game_config,
)
from evals.experiments import (
    boundary_frame,
    linear_fit,
    probes_frame,
    run_boundary,
    run_boxplot,
    run_certificate,
    run_simulation,
    solve_qre_from_config,
)
from games.errors import ConfigError, NetGameError
from memory.results_store import ResultStore, run_metadata
from tools.spectral import stability_threshold
from ui.plots import plot_boundary, plot_boxplot, plot_trajectory

logger = logging.getLogger(__name__)

LOG_LEVELS = {"DEBUG": logging.DEBUG, "INFO": logging.INFO, "WARNING": logging.WARNING, "ERROR": logging.ERROR}


# =============================================================================
# SETUP
# =============================================================================
def configure_logging() -> None:
    """Root logger from NETGAME_LOG (a .env file may set it)."""
    load_dotenv()
    name = os.getenv("NETGAME_LOG", "WARNING").strip().upper()
    logging.basicConfig(
        level=LOG_LEVELS.get(name, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    if name not in LOG_LEVELS:
        logger.warning("⚠️ unknown NETGAME_LOG=%r, using WARNING", name)


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


class CommandParser(argparse.ArgumentParser):
    """Usage errors are configuration errors: exit code 1, not argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"❌ config error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = CommandParser(
        prog="netgame-ql",
        description="Q-Learning stability in network polymatrix games",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analyze": "print the stability report of a game",
        "simulate": "run one trajectory and write it as CSV (+ SVG)",
        "qre": "solve for the quantal response equilibrium",
        "certify": "sample the pseudo-hessian monotonicity certificate",
        "boxplot": "final-window strategy samples over a grid of T",
        "boundary": "bisect the empirical stability boundary per (network, N)",
    }
    for name, text in helps.items():
        sub = commands.add_parser(name, help=text)
        sub.add_argument("--config", required=True, help="JSON config file")
        sub.add_argument("--out", default=None, help="output directory")
        sub.add_argument("--seed", type=_non_negative_int, default=None, help="master seed")
        sub.add_argument("--threads", type=_positive_int, default=None, help="max concurrent workers")
    return parser


def _emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _load(args: argparse.Namespace, model):
    return apply_overrides(load_config(args.config, model), seed=args.seed, out=args.out, threads=args.threads)


# =============================================================================
# COMMANDS
# =============================================================================
def cmd_analyze(args: argparse.Namespace) -> int:
    game = load_game_config(args.config)
    report = stability_threshold(game)
    payload = report.to_json_dict()
    if report.warnings:
        payload["warnings"] = report.warnings
    _emit(payload)
    if args.out:
        ResultStore(args.out).save_json("analysis.json", payload)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config: SimulateConfig = _load(args, SimulateConfig)
    game, record = run_simulation(config)
    store = ResultStore(config.out)
    metadata = run_metadata("simulate", config.result_params(), config.seed)
    store.save_frame("trajectory.csv", record.to_frame(), metadata)
    summary = {
        "game": game.name,
        "mode": record.mode,
        "converged": record.converged,
        "statistic": record.per_component_relative_range,
        "final_strategy": [block.tolist() for block in record.final_strategy.blocks],
        "threshold": stability_threshold(game).threshold,
        "meta": metadata,
    }
    store.save_json("summary.json", summary)
    if config.svg:
        plot_trajectory(record, store.path("trajectory.svg"), title=f"{game.name}, T={config.T}")
    _emit(summary)
    return 0


def cmd_qre(args: argparse.Namespace) -> int:
    config: QREConfig = _load(args, QREConfig)
    payload = solve_qre_from_config(config)
    payload["meta"] = run_metadata("qre", config.result_params(), config.seed)
    ResultStore(config.out).save_json("qre.json", payload)
    _emit(payload)
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    config: CertifyConfig = _load(args, CertifyConfig)
    payload = run_certificate(config).model_dump()
    payload["meta"] = run_metadata("certify", config.result_params(), config.seed)
    ResultStore(config.out).save_json("certificate.json", payload)
    _emit(payload)
    return 0


def cmd_boxplot(args: argparse.Namespace) -> int:
    config: SweepConfig = _load(args, SweepConfig)
    tables = run_boxplot(config)
    store = ResultStore(config.out)
    metadata = run_metadata("boxplot", config.result_params(), config.seed)
    files: List[str] = []
    for (kind, n), table in tables.items():
        stem = f"boxplot_{config.game.game}_{kind}_N{n}"
        files.append(store.save_frame(f"{stem}.csv", table, metadata).name)
        if config.svg:
            plot_boxplot(table, store.path(f"{stem}.svg"), title=f"{config.game.game}, {kind}, N={n}")
    _emit({"files": files})
    return 0


def cmd_boundary(args: argparse.Namespace) -> int:
    config: SweepConfig = _load(args, SweepConfig)
    results = run_boundary(config)
    store = ResultStore(config.out)
    metadata = run_metadata("boundary", config.result_params(), config.seed)
    frame = boundary_frame(results)
    store.save_frame("boundary.csv", frame, metadata)
    store.save_frame("boundary_probes.csv", probes_frame(results), metadata)
    if config.svg:
        plot_boundary(frame, store.path("boundary.svg"), title=config.game.game)

    trends: Dict[str, Any] = {}
    for network, rows in frame[frame["resolved"]].groupby("network", sort=False):
        if len(rows) >= 2:
            fit = linear_fit(rows["n"], rows["empirical_boundary_T"])
            trends[network] = {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared}
    _emit({"boundary": frame.to_dict(orient="records"), "trends": trends})
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "qre": cmd_qre,
    "certify": cmd_certify,
    "boxplot": cmd_boxplot,
    "boundary": cmd_boundary,
}


# =============================================================================
# MAIN
# =============================================================================
def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"❌ config error: {e}", file=sys.stderr)
        return 1
    except (NetGameError, OSError) as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
