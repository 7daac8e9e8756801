"""
Monte Carlo comparison of copula estimators.

For every replication r a sample of size n is drawn from the model; every
estimator is evaluated at the same M quasi-random nodes u_k. Per node the
squared bias, the variance and the mean squared error are estimated and
then averaged over the nodes.

Replications are cut into fixed blocks. Blocks run on a thread pool and
their sufficient statistics are reduced in block order, so a report only
depends on the configuration, never on the number of threads.
"""
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import qmc
from tqdm import tqdm

from smoothcopula.estimation.estimators import (EstimatorHandle, EstimatorSpec, MarginTables, PilotKind,
                                                SmoothSpec, margin_tables)
from smoothcopula.estimation.ranks import maximal_ranks
from smoothcopula.estimation.smoothing_margins import clamp_family
from smoothcopula.models.copula_models import model_cdf, model_sample
from smoothcopula.schemas import (EstimatorPerformance, ExperimentConfig, PerformanceReport, SweepConfig,
                                  SweepRow, axis_label, axis_value)
from smoothcopula.shared.errors import ConfigurationError
from smoothcopula.shared.rng import child_seed, make_generator
from smoothcopula.shared.utils.logger import SmoothCopulaLogger
from smoothcopula.validation.grammar import format_estimator, parse_estimator

BLOCK_SIZE = 50

# Seed paths below the experiment seed
_SAMPLE_STREAM = 0
_NODE_STREAM = 1


def integration_nodes(d: int, count: int, seed: int) -> np.ndarray:
    """
    Scrambled Sobol nodes in (0, 1)^d, shared by all replications and estimators.

    Args:
        d: dimension
        count: number of nodes M
        seed: experiment seed

    Returns:
        Array of shape (count, d)
    """
    if count < 1:
        raise ConfigurationError(f"integration_nodes must be at least 1, got {count}")
    sampler = qmc.Sobol(d=d, scramble=True, seed=make_generator(child_seed(seed, _NODE_STREAM)))
    if count & (count - 1) == 0:
        return sampler.random_base2(m=count.bit_length() - 1)
    with warnings.catch_warnings():
        # Balance properties only hold for powers of two
        warnings.simplefilter("ignore", UserWarning)
        return sampler.random(count)


@dataclass
class _NodeAccumulator:
    """
    Sufficient statistics of one estimator's node values across replications.

    Values are shifted by the first replication's values (y_r = v_r - v_0)
    before the sums are formed.
    """

    shift: np.ndarray
    truth: np.ndarray
    count: int = 0
    sum_y: np.ndarray = field(init=False)
    sum_yy: np.ndarray = field(init=False)
    sum_h: float = 0.0
    sum_hh: float = 0.0
    sum_hy: np.ndarray = field(init=False)
    sum_e: float = 0.0
    sum_ee: float = 0.0

    def __post_init__(self):
        nodes = self.shift.shape[0]
        self.sum_y = np.zeros(nodes)
        self.sum_yy = np.zeros((nodes, nodes))
        self.sum_hy = np.zeros(nodes)

    def block_statistics(self, values: np.ndarray) -> Tuple:
        """Partial sums of a (B, M) block of node values."""
        y = values - self.shift
        h = np.einsum("rk,rk->r", y, y)
        e = np.mean((values - self.truth) ** 2, axis=1)
        return (values.shape[0], y.sum(axis=0), y.T @ y, float(h.sum()), float(h @ h), h @ y,
                float(e.sum()), float(e @ e))

    def merge(self, statistics: Tuple) -> None:
        count, sum_y, sum_yy, sum_h, sum_hh, sum_hy, sum_e, sum_ee = statistics
        self.count += count
        self.sum_y += sum_y
        self.sum_yy += sum_yy
        self.sum_h += sum_h
        self.sum_hh += sum_hh
        self.sum_hy += sum_hy
        self.sum_e += sum_e
        self.sum_ee += sum_ee

    def performance(self) -> EstimatorPerformance:
        reps = self.count
        nodes = self.shift.shape[0]
        mean_y = self.sum_y / reps
        covariance = (self.sum_yy - reps * np.outer(mean_y, mean_y)) / (reps - 1)
        node_variance = np.clip(np.diag(covariance), 0.0, None)
        ivar = float(node_variance.mean())

        bias = self.shift + mean_y - self.truth
        raw_isb = float(np.mean(bias ** 2 - node_variance / reps))
        isb = max(raw_isb, 0.0)

        imse = self.sum_e / reps
        imse_variance = max(self.sum_ee - reps * imse * imse, 0.0) / (reps - 1)

        # Delta method on g_r = (1/M) sum_k (y_rk - mean_y_k)^2
        mean_h = self.sum_h / reps
        var_h = max(self.sum_hh - reps * mean_h * mean_h, 0.0) / (reps - 1)
        cov_hy = (self.sum_hy - reps * mean_h * mean_y) / (reps - 1)
        var_g = (var_h - 4.0 * float(mean_y @ cov_hy) + 4.0 * float(mean_y @ covariance @ mean_y)) / nodes ** 2
        se_ivar = float(np.sqrt(max(var_g, 0.0) / reps))

        var_bias_term = 4.0 * float(bias @ covariance @ bias) / nodes ** 2 / reps
        se_isb = float(np.sqrt(max(var_bias_term, 0.0) + (np.sqrt(2.0) * ivar / reps) ** 2))

        return EstimatorPerformance(isb=isb, ivar=ivar, imse=float(imse), se_isb=se_isb, se_ivar=se_ivar,
                                    se_imse=float(np.sqrt(imse_variance / reps)))


def _effective_spec(spec: EstimatorSpec, n: int, epsilon: float,
                    logger: SmoothCopulaLogger) -> EstimatorSpec:
    if not isinstance(spec, SmoothSpec):
        return spec
    return SmoothSpec(clamp_family(spec.margin, n, epsilon=epsilon, logger=logger), spec.survival_copula)


def _table_key(spec: EstimatorSpec) -> Optional[Hashable]:
    if not isinstance(spec, SmoothSpec):
        return None
    return spec.margin, spec.survival_copula.kind == PilotKind.EMPIRICAL_BETA


class _ReplicationRunner:
    """Evaluates every estimator of an experiment on replication samples."""

    def __init__(self, config: ExperimentConfig, specs: Sequence[EstimatorSpec], nodes: np.ndarray):
        self.config = config
        self.specs = list(specs)
        self.nodes = nodes
        self.tables: Dict[Hashable, MarginTables] = {}
        for spec in self.specs:
            key = _table_key(spec)
            if key is not None and key not in self.tables:
                self.tables[key] = margin_tables(key[0], config.n, nodes, pilot=key[1])

    def replicate(self, rep: int) -> Tuple[List[np.ndarray], bool]:
        sample = model_sample(self.config.model, self.config.n, child_seed(self.config.seed, _SAMPLE_STREAM, rep))
        ranks = maximal_ranks(sample)
        values = []
        for spec in self.specs:
            handle = EstimatorHandle(ranks, spec)
            key = _table_key(spec)
            tables = self.tables[key] if key is not None else None
            values.append(np.asarray(handle.evaluate(self.nodes, tables=tables), dtype=float))
        return values, ranks.any_ties

    def block(self, start: int, stop: int) -> Tuple[List[np.ndarray], bool]:
        """Node values (one (B, M) array per estimator) of replications start..stop-1."""
        rows: List[List[np.ndarray]] = [[] for _ in self.specs]
        ties = False
        for rep in range(start, stop):
            values, tied = self.replicate(rep)
            ties = ties or tied
            for column, value in zip(rows, values):
                column.append(value)
        return [np.vstack(column) for column in rows], ties


def run_experiment(
    config: ExperimentConfig,
    threads: Optional[int] = None,
    logger: Optional[SmoothCopulaLogger] = None,
    show_progress: bool = False,
    epsilon: float = 1e-9,
) -> PerformanceReport:
    """
    Estimate ISB, IVar and IMSE of every estimator of ``config``.

    All estimators see the same samples (replication r is drawn from stream
    (0, r) of the seed) and the same Sobol nodes. Dispersion parameters that
    are inadmissible for n are clamped; reports keep the requested labels.

    Args:
        config: experiment configuration
        threads: worker threads; None uses every core
        logger: Optional logger
        show_progress: display a tqdm bar over replications
        epsilon: clamp offset for rho

    Returns:
        PerformanceReport with one EstimatorPerformance per estimator label
    """
    logger = logger or SmoothCopulaLogger("benchmark")
    labels = config.labels()
    if len(set(labels)) != len(labels):
        raise ConfigurationError(f"estimators listed twice: {labels}")

    threads = max(1, threads or os.cpu_count() or 1)
    logger.info(f"🚀 Running {len(labels)} estimators on {config.reps} samples of size {config.n} "
                f"from {config.model.family.value} ({threads} threads)")

    specs = [_effective_spec(spec, config.n, epsilon, logger) for spec in config.estimators]
    nodes = integration_nodes(config.model.d, config.integration_nodes, config.seed)
    truth = np.asarray(model_cdf(config.model, nodes), dtype=float)
    runner = _ReplicationRunner(config, specs, nodes)

    first_values, _ = runner.replicate(0)
    accumulators = [_NodeAccumulator(shift=values, truth=truth) for values in first_values]

    blocks = [(start, min(start + BLOCK_SIZE, config.reps)) for start in range(0, config.reps, BLOCK_SIZE)]
    ties_seen = False
    progress = tqdm(total=config.reps, desc="replications", disable=not show_progress)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        # At most `threads` blocks in flight; results are merged in block order
        for wave_start in range(0, len(blocks), threads):
            wave = blocks[wave_start:wave_start + threads]
            futures = [executor.submit(runner.block, start, stop) for start, stop in wave]
            for (start, stop), future in zip(wave, futures):
                block_values, tied = future.result()
                ties_seen = ties_seen or tied
                for accumulator, values in zip(accumulators, block_values):
                    accumulator.merge(accumulator.block_statistics(values))
                progress.update(stop - start)
    progress.close()

    if ties_seen:
        logger.warning("⚠️ Ties occurred in at least one replication sample")
    performances = {label: accumulator.performance() for label, accumulator in zip(labels, accumulators)}
    logger.info(f"✅ Experiment finished: {config.reps} replications, {config.integration_nodes} nodes")
    return PerformanceReport(config=config, performances=performances, ties_seen=ties_seen)


def _check_consistent(configs: Sequence[ExperimentConfig], axis: str) -> None:
    base = configs[0]
    base_labels = [axis_label(spec, axis) for spec in base.estimators]
    for config in configs[1:]:
        if [axis_label(spec, axis) for spec in config.estimators] != base_labels:
            raise ConfigurationError(f"configs differ in their estimators beyond the {axis!r} axis")
        if (config.reps, config.integration_nodes, config.seed) != (base.reps, base.integration_nodes, base.seed):
            raise ConfigurationError("configs differ in reps, integration_nodes or seed")
        if axis != "n" and config.n != base.n:
            raise ConfigurationError(f"configs differ in n on a {axis!r} sweep")
        if (config.model.family, config.model.d, config.model.survival) != \
                (base.model.family, base.model.d, base.model.survival):
            raise ConfigurationError("configs differ in the data-generating family")
        if axis != "tau" and config.model != base.model:
            raise ConfigurationError(f"configs differ in the model on a {axis!r} sweep")


def _reference_index(config: ExperimentConfig, axis: str, reference: Optional[str]) -> int:
    if reference is None:
        return 0
    candidates = [reference.strip()]
    try:
        candidates.append(format_estimator(parse_estimator(reference)))
    except ValueError:
        pass
    for index, spec in enumerate(config.estimators):
        if format_estimator(spec) in candidates or axis_label(spec, axis) in candidates:
            return index
    raise ConfigurationError(f"reference estimator {reference!r} is not part of the sweep")


def sweep(
    configs: Sequence[ExperimentConfig],
    axis: str,
    reference: Optional[str] = None,
    threads: Optional[int] = None,
    logger: Optional[SmoothCopulaLogger] = None,
    show_progress: bool = False,
    epsilon: float = 1e-9,
) -> List[SweepRow]:
    """
    Run configs that differ only along ``axis`` and return table rows.

    Rows are ordered by config, then by estimator. ``rel_eff`` is
    100 * IMSE(estimator) / IMSE(reference), the reference defaulting to the
    first estimator.

    Args:
        configs: experiments, one per axis value
        axis: one of "tau", "n", "rho", "pilot_tau"
        reference: estimator string of the relative-efficiency reference
        threads: worker threads
        logger: Optional logger
        show_progress: display tqdm bars
        epsilon: clamp offset for rho

    Returns:
        List of SweepRow
    """
    logger = logger or SmoothCopulaLogger("benchmark")
    if axis not in ("tau", "n", "rho", "pilot_tau"):
        raise ConfigurationError(f"unknown sweep axis {axis!r}")
    if not configs:
        raise ConfigurationError("a sweep needs at least one config")
    _check_consistent(configs, axis)
    reference_index = _reference_index(configs[0], axis, reference)

    rows: List[SweepRow] = []
    for position, config in enumerate(configs, start=1):
        value = axis_value(config, axis)
        logger.info(f"📊 Sweep point {position}/{len(configs)}: {axis}={value}")
        report = run_experiment(config, threads=threads, logger=logger, show_progress=show_progress,
                                epsilon=epsilon)
        performances = list(report.performances.values())
        reference_imse = performances[reference_index].imse
        for spec, performance in zip(config.estimators, performances):
            rel_eff = 100.0 * performance.imse / reference_imse if reference_imse > 0 else None
            rows.append(SweepRow(axis=value, estimator=axis_label(spec, axis), rel_eff=rel_eff,
                                 **performance.model_dump()))
    return rows


def run_sweep(sweep_config: SweepConfig, **kwargs) -> List[SweepRow]:
    """``sweep`` over the experiments of a SweepConfig."""
    return sweep(sweep_config.expand(), sweep_config.axis, reference=sweep_config.reference, **kwargs)


def results_table(rows: Sequence[SweepRow]) -> pd.DataFrame:
    """Rows as a DataFrame with the CSV column order."""
    columns = ["axis", "estimator", "isb", "ivar", "imse", "se_isb", "se_ivar", "se_imse", "rel_eff"]
    return pd.DataFrame([row.model_dump() for row in rows], columns=columns)


def log_results(rows: Sequence[SweepRow], logger: Optional[SmoothCopulaLogger] = None) -> None:
    logger = logger or SmoothCopulaLogger("benchmark")
    table = results_table(rows)[["axis", "estimator", "imse", "se_imse", "rel_eff"]]
    logger.info("📊 Benchmark results\n" + table.to_markdown(index=False, floatfmt=".3e"))
