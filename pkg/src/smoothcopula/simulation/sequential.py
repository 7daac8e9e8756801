"""
Two-sided sequential empirical copula processes.

For (s, t) with s <= t the window is rows k = floor(ns) + 1 .. l = floor(nt)
of the sample, ranks are recomputed inside the window, and

    C_n(s, t, u) = sqrt(n) * lambda_n(s, t) * (C_{k:l}(u) - C(u)),
    lambda_n(s, t) = (floor(nt) - floor(ns)) / n,

with the value 0 on empty windows. Replacing C_{k:l} by a smooth estimator
gives the smooth process.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from smoothcopula.estimation.estimators import EstimatorHandle, EstimatorTag, SmoothSpec
from smoothcopula.estimation.ranks import ObservationMatrix, maximal_ranks
from smoothcopula.estimation.smoothing_margins import clamp_family, max_variance_ratio
from smoothcopula.models.copula_models import CopulaModel, model_cdf, model_sample
from smoothcopula.schemas import EquivalenceRow
from smoothcopula.shared.errors import ConfigurationError, DomainError
from smoothcopula.shared.rng import child_seed
from smoothcopula.shared.utils.logger import SmoothCopulaLogger
from smoothcopula.validation.grammar import format_estimator

CLASSICAL = "classical"
ProcessKind = Union[str, SmoothSpec]

# Floors of n*s absorb the rounding of products such as 100 * 0.29, and nothing larger
_FLOOR_ULPS = 8
# Asymptotic efficiency of the median relative to the mean under normality
_MEDIAN_SE_FACTOR = 1.2533


def _grid_floor(n: int, s: float) -> int:
    product = n * s
    return int(np.floor(product + _FLOOR_ULPS * np.spacing(max(1.0, product))))


@dataclass(frozen=True)
class ProcessGrid:
    """
    Finite grid over {(s, t): s <= t} x [0, 1]^d.

    Only pairs with s <= t are kept; ``pairs`` lists them s-major.
    """

    s_values: Tuple[float, ...]
    t_values: Tuple[float, ...]
    u_points: np.ndarray

    def __post_init__(self):
        for name in ("s_values", "t_values"):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.ndim != 1 or values.size == 0:
                raise DomainError(f"{name} must be a non-empty sequence")
            if np.any((values < 0.0) | (values > 1.0)) or np.any(np.diff(values) <= 0):
                raise DomainError(f"{name} must be increasing values in [0, 1], got {values.tolist()}")
            object.__setattr__(self, name, tuple(float(v) for v in values))

        points = np.atleast_2d(np.asarray(self.u_points, dtype=float))
        if points.shape[0] == 0 or np.any((points < 0.0) | (points > 1.0)):
            raise DomainError("u_points must be a non-empty set of points in [0, 1]^d")
        points.setflags(write=False)
        object.__setattr__(self, "u_points", points)
        if not self.pairs:
            raise DomainError("the grid holds no pair with s <= t")

    @classmethod
    def default(cls, d: int, step: float = 0.1, lattice_size: int = 5) -> "ProcessGrid":
        """s, t in {0, step, ..., 1}; u on the interior lattice {(i - 1/2)/lattice_size}^d."""
        if not 0.0 < step <= 1.0 or lattice_size < 1:
            raise DomainError(f"invalid default grid: step={step}, lattice_size={lattice_size}")
        values = tuple(np.round(np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1), 12))
        axis = (np.arange(1, lattice_size + 1) - 0.5) / lattice_size
        points = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
        return cls(values, values, points)

    @property
    def d(self) -> int:
        return self.u_points.shape[1]

    @property
    def pairs(self) -> List[Tuple[float, float]]:
        return [(s, t) for s in self.s_values for t in self.t_values if s <= t]


def lambda_n(n: int, s: float, t: float) -> float:
    """
    (floor(nt) - floor(ns)) / n for 0 <= s <= t <= 1.

    The floors are exact up to the rounding of the product n * s: a product
    within a few ulps below an integer counts as that integer.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not (0.0 <= s <= t <= 1.0):
        raise DomainError(f"lambda_n needs 0 <= s <= t <= 1, got s={s}, t={t}")
    return (_grid_floor(n, t) - _grid_floor(n, s)) / n


def _process_arrays(
    sample: ObservationMatrix,
    model: CopulaModel,
    grid: ProcessGrid,
    kinds: Sequence[ProcessKind],
    epsilon: float,
    logger: SmoothCopulaLogger,
) -> List[np.ndarray]:
    """One (pairs, points) array per process kind; ranks are shared between kinds."""
    n = sample.n
    if sample.d != model.d or grid.d != model.d:
        raise DomainError(f"dimension mismatch: sample d={sample.d}, grid d={grid.d}, model d={model.d}")

    truth = np.asarray(model_cdf(model, grid.u_points), dtype=float)
    pairs = grid.pairs
    results = [np.zeros((len(pairs), grid.u_points.shape[0])) for _ in kinds]
    window_cache: Dict[Tuple[int, int], List[np.ndarray]] = {}

    for row, (s, t) in enumerate(pairs):
        k, l = _grid_floor(n, s) + 1, _grid_floor(n, t)
        if l < k:
            continue
        if (k, l) not in window_cache:
            ranks = maximal_ranks(sample, window=(k, l))
            estimates = []
            for kind in kinds:
                if isinstance(kind, SmoothSpec):
                    spec = SmoothSpec(clamp_family(kind.margin, ranks.n, epsilon=epsilon, logger=logger),
                                      kind.survival_copula)
                else:
                    spec = EstimatorTag.EMPIRICAL
                estimates.append(np.asarray(EstimatorHandle(ranks, spec).evaluate(grid.u_points), dtype=float))
            window_cache[(k, l)] = estimates
        scale = np.sqrt(n) * (l - k + 1) / n
        for result, estimate in zip(results, window_cache[(k, l)]):
            result[row] = scale * (estimate - truth)
    return results


def _check_kind(kind: ProcessKind) -> ProcessKind:
    if isinstance(kind, SmoothSpec) or kind == CLASSICAL:
        return kind
    raise DomainError(f"process kind must be {CLASSICAL!r} or a smooth estimator, got {kind!r}")


def process_values(
    sample,
    true_model: CopulaModel,
    grid: ProcessGrid,
    which: ProcessKind = CLASSICAL,
    epsilon: float = 1e-9,
    logger: Optional[SmoothCopulaLogger] = None,
) -> np.ndarray:
    """
    Sequential process on a grid.

    Args:
        sample: ObservationMatrix or array of shape (n, d)
        true_model: copula C of the data
        grid: (s, t, u) grid
        which: "classical" for the empirical copula, or a SmoothSpec
        epsilon: clamp offset for rho on short windows
        logger: Optional logger

    Returns:
        Array of shape (len(grid.pairs), number of u points)
    """
    logger = logger or SmoothCopulaLogger("sequential")
    if not isinstance(sample, ObservationMatrix):
        sample = ObservationMatrix(np.asarray(sample, dtype=float))
    return _process_arrays(sample, true_model, grid, [_check_kind(which)], epsilon, logger)[0]


def _sup_distance(model: CopulaModel, spec: SmoothSpec, n: int, rep: int, grid: ProcessGrid, seed: int,
                  epsilon: float, logger: SmoothCopulaLogger) -> float:
    sample = model_sample(model, n, child_seed(seed, n, rep))
    classical, smooth = _process_arrays(sample, model, grid, [CLASSICAL, spec], epsilon, logger)
    return float(np.max(np.abs(smooth - classical)))


def _log_variance_bound(spec: SmoothSpec, n_values: Sequence[int], epsilon: float,
                        logger: SmoothCopulaLogger) -> None:
    kappa = max(1.0, spec.margin.dispersion)
    worst = max(max_variance_ratio(clamp_family(spec.margin, n, epsilon=epsilon, logger=logger), n)
                for n in n_values)
    if worst <= kappa * (1.0 + 1e-9):
        logger.info(f"✅ Variance bound holds: Var(W) <= {kappa:g} * u(1-u)/n (max ratio {worst:.6g})")
    else:
        logger.warning(f"⚠️ Variance bound violated: max ratio {worst:.6g} exceeds {kappa:g}")


def equivalence_check(
    model: CopulaModel,
    spec: SmoothSpec,
    n_values: Sequence[int],
    reps: int = 50,
    grid: Optional[ProcessGrid] = None,
    seed: int = 42,
    threads: Optional[int] = None,
    epsilon: float = 1e-9,
    logger: Optional[SmoothCopulaLogger] = None,
    show_progress: bool = False,
) -> List[EquivalenceRow]:
    """
    Median over replications of the grid sup |smooth process - classical process|, per n.

    Replication r at sample size n uses stream (n, r) of ``seed``.

    Args:
        model: data-generating copula
        spec: smooth estimator compared with the empirical copula
        n_values: increasing sample sizes
        reps: replications per sample size (at least 20)
        grid: process grid; defaults to ``ProcessGrid.default(model.d)``
        seed: seed
        threads: worker threads; None uses every core
        epsilon: clamp offset for rho
        logger: Optional logger
        show_progress: display a tqdm bar

    Returns:
        One EquivalenceRow per sample size
    """
    logger = logger or SmoothCopulaLogger("sequential")
    if not isinstance(spec, SmoothSpec):
        raise ConfigurationError(f"equivalence_check needs a smooth estimator, got {spec!r}")
    if reps < 20:
        raise ConfigurationError(f"equivalence_check needs at least 20 replications, got {reps}")
    n_values = [int(n) for n in n_values]
    if not n_values or any(n < 1 for n in n_values) or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ConfigurationError(f"n_values must be increasing positive integers, got {n_values}")
    grid = grid or ProcessGrid.default(model.d)
    if grid.d != model.d:
        raise DomainError(f"grid of dimension {grid.d} for a model of dimension {model.d}")

    threads = max(1, threads or os.cpu_count() or 1)
    logger.info(f"🚀 Sequential check of {format_estimator(spec)}: n={n_values}, {reps} replications")
    _log_variance_bound(spec, n_values, epsilon, logger)

    rows: List[EquivalenceRow] = []
    with ThreadPoolExecutor(max_workers=threads) as executor:
        for n in tqdm(n_values, desc="sample sizes", disable=not show_progress):
            sups = np.array(list(executor.map(
                lambda rep: _sup_distance(model, spec, n, rep, grid, seed, epsilon, logger), range(reps))))
            q25, median, q75 = np.quantile(sups, [0.25, 0.5, 0.75])
            se_median = _MEDIAN_SE_FACTOR * ((q75 - q25) / 1.349) / np.sqrt(reps)
            rows.append(EquivalenceRow(n=n, median_sup=float(median), q25=float(q25), q75=float(q75),
                                       se_median=float(se_median)))
            logger.info(f"📊 n={n}: median sup {median:.4e} (IQR {q25:.3e} .. {q75:.3e})")
    return rows
