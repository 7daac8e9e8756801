"""
Command-line front end.

    smoothcopula estimate  --input sample.csv --estimator ebc --at 0.5,0.5
    smoothcopula sample    --model clayton:tau=0.5 --n 100 --seed 7 --output sample.csv
    smoothcopula benchmark --config clayton_comparison --output comparison.csv
    smoothcopula seqcheck  --model indep --estimator binomial:pilot=indep --n 50,100,200,400

Exit codes: 0 success, 2 parse or configuration errors, 3 numeric-domain
errors, 4 I/O errors. Failures print one JSON object on stderr.
"""
import argparse
import itertools
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from smoothcopula.configuration import Configuration
from smoothcopula.estimation.estimators import EstimatorHandle, EstimatorTag, SmoothSpec, mixture_oracle
from smoothcopula.estimation.ranks import maximal_ranks
from smoothcopula.estimation.smoothing_margins import clamp_family
from smoothcopula.models.copula_models import model_sample
from smoothcopula.shared.errors import ConfigurationError, GrammarError, SmoothCopulaError
from smoothcopula.shared.rng import child_seed
from smoothcopula.shared.utils.file_handler import (load_observations, load_sweep_config, parse_sweep_document,
                                                    save_csv, save_json)
from smoothcopula.shared.utils.logger import SmoothCopulaLogger
from smoothcopula.simulation.benchmark import log_results, results_table, run_sweep
from smoothcopula.simulation.sequential import ProcessGrid, equivalence_check
from smoothcopula.validation.grammar import GrammarValidator, format_estimator, parse_model


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _int_list(text: str) -> List[int]:
    values = _float_list(text)
    if any(int(v) != v for v in values):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in values]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoothcopula",
                                     description="Smooth nonparametric copula estimators and their benchmarks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: SMOOTHCOPULA_THREADS or every core)")
    common.add_argument("--seed", type=int, default=None, help="seed of stochastic subcommands")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--log-dir", default=None, help="also write logs to this directory")
    common.add_argument("--no-progress", action="store_true", help="hide progress bars")

    subparsers = parser.add_subparsers(dest="command", required=True)

    estimate = subparsers.add_parser("estimate", parents=[common], help="evaluate estimators on a CSV sample")
    estimate.add_argument("--input", required=True, type=Path, help="CSV sample, one row per observation")
    estimate.add_argument("--estimator", action="append", required=True, help="estimator string (repeatable)")
    estimate.add_argument("--at", action="append", type=_float_list, default=None,
                          help="evaluation point u1,...,ud (repeatable); default: a regular grid")
    estimate.add_argument("--grid-size", type=int, default=None, help="grid points per coordinate")
    estimate.add_argument("--oracle", action="store_true",
                          help="add Monte Carlo mixture values (oracle, oracle_se) for smooth estimators")
    estimate.add_argument("--mc-samples", type=int, default=None, help="draws of the mixture oracle")
    estimate.add_argument("--output", type=Path, default=None, help="CSV output (default: stdout)")

    sample = subparsers.add_parser("sample", parents=[common], help="draw a sample from a copula model")
    sample.add_argument("--model", required=True, help="model string, e.g. clayton:tau=0.5:d=2")
    sample.add_argument("--n", type=int, required=True, help="sample size")
    sample.add_argument("--output", type=Path, default=None, help="CSV output (default: stdout)")

    benchmark = subparsers.add_parser("benchmark", parents=[common], help="run a Monte Carlo sweep")
    benchmark.add_argument("--config", default=None, help="JSON/YAML config file or bundled preset name")
    benchmark.add_argument("--model", default=None, help="model string (without --config)")
    benchmark.add_argument("--n", type=int, default=None, help="sample size")
    benchmark.add_argument("--estimator", action="append", default=None, help="estimator string (repeatable)")
    benchmark.add_argument("--axis", choices=["tau", "n", "rho", "pilot_tau"], default=None)
    benchmark.add_argument("--values", type=_float_list, default=None, help="comma-separated axis values")
    benchmark.add_argument("--reference", default=None, help="relative-efficiency reference estimator")
    benchmark.add_argument("--reps", type=int, default=None, help="replications")
    benchmark.add_argument("--nodes", type=int, default=None, help="Sobol integration nodes")
    benchmark.add_argument("--long", action="store_true", help="use the long replication count")
    benchmark.add_argument("--output", type=Path, default=None, help="CSV output (default: stdout)")
    benchmark.add_argument("--json", type=Path, default=None,
                           help="JSON mirror (default: next to --output with a .json suffix)")

    seqcheck = subparsers.add_parser("seqcheck", parents=[common],
                                     help="compare the smooth and classical sequential processes")
    seqcheck.add_argument("--model", required=True, help="model string")
    seqcheck.add_argument("--estimator", required=True, help="smooth estimator string")
    seqcheck.add_argument("--n", type=_int_list, default=[50, 100, 200, 400], help="comma-separated sample sizes")
    seqcheck.add_argument("--reps", type=int, default=50, help="replications per sample size")
    seqcheck.add_argument("--grid-step", type=float, default=0.1, help="spacing of the s and t grids")
    seqcheck.add_argument("--lattice-size", type=int, default=5, help="u-lattice points per coordinate")
    seqcheck.add_argument("--output", type=Path, default=None, help="CSV output (default: stdout)")
    return parser


def _settings(args: argparse.Namespace) -> Configuration:
    configuration = Configuration.from_env({
        "seed": args.seed,
        "threads": args.threads,
        "log_level": args.log_level,
        "log_dir": args.log_dir,
        "show_progress": False if args.no_progress else None,
    })
    # Library loggers read their level from the environment
    os.environ["SMOOTHCOPULA_LOG_LEVEL"] = configuration.log_level.upper()
    return configuration


def _evaluation_points(args: argparse.Namespace, d: int, configuration: Configuration) -> np.ndarray:
    if args.at:
        try:
            points = np.array(args.at, dtype=float)
        except ValueError as e:
            raise ConfigurationError("--at points must all have the same number of coordinates") from e
        if points.ndim != 2 or points.shape[1] != d:
            raise ConfigurationError(f"--at points must have {d} coordinates")
        return points
    size = args.grid_size or configuration.grid_size
    if size < 2:
        raise ConfigurationError(f"--grid-size must be at least 2, got {size}")
    axis = np.linspace(0.0, 1.0, size)
    return np.array(list(itertools.product(axis, repeat=d)))


def run_estimate(args: argparse.Namespace, configuration: Configuration, logger: SmoothCopulaLogger) -> None:
    validator = GrammarValidator(logger=logger)
    is_valid, invalid = validator.check_format("\n".join(args.estimator))
    if not is_valid:
        raise GrammarError(f"invalid estimator strings: {invalid}")
    specs = [validator.parse(text) for text in args.estimator]

    sample = load_observations(args.input, logger=logger)
    ranks = maximal_ranks(sample)
    if ranks.any_ties:
        flagged = [j + 1 for j, tied in enumerate(ranks.ties_present) if tied]
        logger.warning(f"⚠️ Ties present in columns {flagged}: uniform margins are not guaranteed")
    points = _evaluation_points(args, sample.d, configuration)

    columns = [f"u{j + 1}" for j in range(sample.d)]
    frames = []
    for index, spec in enumerate(specs):
        effective = spec
        if isinstance(spec, SmoothSpec):
            margin = clamp_family(spec.margin, sample.n, epsilon=configuration.rho_epsilon, logger=logger)
            effective = SmoothSpec(margin, spec.survival_copula)
        handle = EstimatorHandle(ranks, effective)
        frame = pd.DataFrame(points, columns=columns)
        frame["estimator"] = format_estimator(spec)
        frame["value"] = np.atleast_1d(handle.evaluate(points))
        if args.oracle:
            frame["oracle"], frame["oracle_se"] = np.nan, np.nan
            if effective != EstimatorTag.EMPIRICAL:
                draws = args.mc_samples or configuration.mc_samples
                estimates = [mixture_oracle(handle, point, draws, child_seed(configuration.seed, index, k))
                             for k, point in enumerate(points)]
                frame["oracle"] = [e.value for e in estimates]
                frame["oracle_se"] = [e.std_error for e in estimates]
        frames.append(frame)
    save_csv(pd.concat(frames, ignore_index=True), args.output, logger=logger)


def run_sample(args: argparse.Namespace, configuration: Configuration, logger: SmoothCopulaLogger) -> None:
    model = parse_model(args.model)
    draws = model_sample(model, args.n, configuration.seed)
    frame = pd.DataFrame(draws.values, columns=[f"u{j + 1}" for j in range(model.d)])
    save_csv(frame, args.output, logger=logger)


def _inline_document(args: argparse.Namespace) -> Dict[str, Any]:
    if args.model is None or not args.estimator:
        raise ConfigurationError("benchmark needs --config, or --model and at least one --estimator")
    if args.n is None:
        raise ConfigurationError("benchmark needs --n without --config")
    document: Dict[str, Any] = {"model": args.model, "n": args.n, "estimators": args.estimator}
    if args.axis is not None:
        document["axis"] = args.axis
    if args.values is not None:
        document["values"] = args.values
    if args.reference is not None:
        document["reference"] = args.reference
    return document


def run_benchmark(args: argparse.Namespace, configuration: Configuration, logger: SmoothCopulaLogger) -> None:
    reps = configuration.long_reps if args.long else args.reps
    overrides = {"reps": reps, "integration_nodes": args.nodes, "seed": args.seed}
    if args.config is not None:
        sweep_config = load_sweep_config(args.config, overrides=overrides, logger=logger)
    else:
        document = _inline_document(args)
        document.update({"reps": reps or configuration.reps,
                         "integration_nodes": args.nodes or configuration.integration_nodes,
                         "seed": configuration.seed})
        sweep_config = parse_sweep_document(document)

    rows = run_sweep(sweep_config, threads=configuration.resolved_threads(), logger=logger,
                     show_progress=configuration.show_progress, epsilon=configuration.rho_epsilon)
    log_results(rows, logger=logger)
    save_csv(results_table(rows), args.output, logger=logger)

    mirror = args.json or (args.output.with_suffix(".json") if args.output is not None else None)
    if mirror is not None:
        save_json({"config": sweep_config, "rows": rows}, mirror, logger=logger)


def run_seqcheck(args: argparse.Namespace, configuration: Configuration, logger: SmoothCopulaLogger) -> None:
    model = parse_model(args.model)
    spec = GrammarValidator(logger=logger).parse(args.estimator)
    if not isinstance(spec, SmoothSpec):
        raise ConfigurationError(f"seqcheck needs a smooth estimator, got {args.estimator!r}")
    grid = ProcessGrid.default(model.d, step=args.grid_step, lattice_size=args.lattice_size)
    rows = equivalence_check(model, spec, args.n, reps=args.reps, grid=grid, seed=configuration.seed,
                             threads=configuration.resolved_threads(), epsilon=configuration.rho_epsilon,
                             logger=logger, show_progress=configuration.show_progress)
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=["n", "median_sup", "q25", "q75"])
    save_csv(frame, args.output, logger=logger)


COMMANDS = {
    "estimate": run_estimate,
    "sample": run_sample,
    "benchmark": run_benchmark,
    "seqcheck": run_seqcheck,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger = SmoothCopulaLogger("smoothcopula", log_dir=args.log_dir, level=args.log_level)
    try:
        configuration = _settings(args)
        logger.debug(f"🚀 {args.command} with {configuration.to_dict()}")
        COMMANDS[args.command](args, configuration, logger)
    except SmoothCopulaError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        payload = {"error": type(e).__name__, "message": str(e), "exit_code": e.exit_code}
        print(json.dumps(payload), file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
