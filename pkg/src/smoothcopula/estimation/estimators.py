"""
Empirical, empirical beta and smooth empirical copula estimators.

A smooth estimator is specified by a smoothing margin family and the
survival copula of the smoothing distribution. With ranks R_i of a window of
length m, its value at u is

    (1/m) sum_i C̄( F̄_{1,u_1}(a_i1), ..., F̄_{d,u_d}(a_id) )

where a_ij = R_ij - 1 for discrete margins and (R_ij - 1/2)/m for beta
margins. For fixed (m, u) the survival values only depend on the rank, so
every evaluation goes through ``MarginTables`` indexed by rank; callers that
evaluate many samples at the same nodes build the tables once.
"""
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Union

import numpy as np

from smoothcopula.estimation import numerics
from smoothcopula.estimation.ranks import RankMatrix
from smoothcopula.estimation.smoothing_margins import MarginFamily, margin_quantile, rank_survival_table
from smoothcopula.models.copula_models import CopulaModel, model_cdf, sample_uniforms
from smoothcopula.shared.errors import DomainError
from smoothcopula.shared.rng import make_generator

# Upper bound on elements of one pilot gather (K x m x m)
_PILOT_CHUNK_ELEMENTS = 4_000_000
# Pilot factor tables (d x K x m x m) larger than this are rebuilt chunk by chunk
INNER_CACHE_ELEMENTS = 8_000_000
_ORACLE_CHUNK = 50_000


class EstimatorTag(str, Enum):
    EMPIRICAL = "ecdf"
    EMPIRICAL_BETA = "ebc"


class PilotKind(str, Enum):
    INDEPENDENCE = "indep"
    EMPIRICAL_BETA = "ebc"
    FIXED = "fixed"


@dataclass(frozen=True)
class SurvivalCopula:
    """Survival copula of the smoothing distribution."""

    kind: PilotKind
    model: Optional[CopulaModel] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PilotKind(self.kind))
        if (self.kind == PilotKind.FIXED) != (self.model is not None):
            raise DomainError("a fixed survival copula needs a model, and only it takes one")

    @classmethod
    def independence(cls) -> "SurvivalCopula":
        return cls(PilotKind.INDEPENDENCE)

    @classmethod
    def empirical_beta(cls) -> "SurvivalCopula":
        return cls(PilotKind.EMPIRICAL_BETA)

    @classmethod
    def fixed(cls, model: CopulaModel) -> "SurvivalCopula":
        return cls(PilotKind.FIXED, model)


@dataclass(frozen=True)
class SmoothSpec:
    """Margin family plus survival copula of a smooth estimator."""

    margin: MarginFamily
    survival_copula: SurvivalCopula

    def validate_for(self, m: int, d: int) -> None:
        if self.survival_copula.kind == PilotKind.FIXED and self.survival_copula.model.d != d:
            raise DomainError(f"survival copula of dimension {self.survival_copula.model.d} for d={d}")
        if m > 0:
            self.margin.validate_for(m)


EstimatorSpec = Union[SmoothSpec, EstimatorTag]


@dataclass(frozen=True)
class MarginTables:
    """
    Rank-indexed survival values for a margin family, window length and node set.

    ``outer[j][k, r - 1]`` is F̄_{j,u_kj}(a(r)); ``inner[j][k, r - 1, s - 1]``
    is beta_{m,s}(outer[j][k, r - 1]), the factor the empirical beta pilot
    needs. ``inner`` is None when ``pilot`` is set but the table would exceed
    the cache limit; the pilot average then rebuilds it per node chunk.
    """

    family: MarginFamily
    m: int
    points: np.ndarray
    outer: np.ndarray
    inner: Optional[np.ndarray] = None
    pilot: bool = False


def margin_tables(family: MarginFamily, m: int, points, pilot: bool = False,
                  cache_limit: int = INNER_CACHE_ELEMENTS) -> MarginTables:
    """
    Build ``MarginTables`` for the points of shape (K, d).

    Args:
        family: margin family
        m: window length
        points: evaluation points
        pilot: also serve the empirical beta pilot factors
        cache_limit: largest pilot factor table, in elements, kept in memory

    Returns:
        MarginTables
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    outer = np.stack([rank_survival_table(family, m, points[:, j]) for j in range(points.shape[1])])
    inner = None
    if pilot and outer.size * m <= cache_limit:
        inner = np.empty(outer.shape + (m,))
        chunk = max(1, _PILOT_CHUNK_ELEMENTS // (m * (m + 1)))
        for start in range(0, points.shape[0], chunk):
            stop = min(start + chunk, points.shape[0])
            inner[:, start:stop] = _pilot_factors(outer[:, start:stop], m)
    return MarginTables(family=family, m=m, points=points, outer=outer, inner=inner, pilot=pilot)


def _pilot_factors(outer: np.ndarray, m: int) -> np.ndarray:
    return np.stack([numerics.binomial_survival_table(m, outer[j]) for j in range(outer.shape[0])])


class EstimatorHandle:
    """
    Window-local ranks bound to an estimator.

    Handles are immutable; evaluation at distinct points is safe from
    several threads.
    """

    def __init__(self, ranks: RankMatrix, spec: EstimatorSpec):
        self.ranks = ranks
        self.spec = EstimatorTag(spec) if isinstance(spec, str) else spec
        self.m = ranks.n
        self.d = ranks.d
        if isinstance(self.spec, SmoothSpec):
            self.spec.validate_for(self.m, self.d)
        # Zero-based rank indices, one column per coordinate
        self.rank_index = ranks.ranks - 1

    @property
    def ties_present(self) -> bool:
        return self.ranks.any_ties

    def points(self, u) -> np.ndarray:
        points = np.asarray(u, dtype=float)
        if points.shape[-1] != self.d:
            raise DomainError(f"points of dimension {points.shape[-1]} for d={self.d}")
        if not np.all((points >= 0.0) & (points <= 1.0)):
            raise DomainError("evaluation points must lie in [0, 1]^d")
        return points

    def evaluate(self, u, tables: Optional[MarginTables] = None) -> Union[float, np.ndarray]:
        """Estimator value(s) at ``u`` of shape (d,) or (K, d)."""
        if self.spec == EstimatorTag.EMPIRICAL:
            return empirical_copula(self, u)
        if self.spec == EstimatorTag.EMPIRICAL_BETA:
            return empirical_beta_copula(self, u)
        return smooth_estimator(self, u, tables=tables)


def _finish(values: np.ndarray, u) -> Union[float, np.ndarray]:
    values = np.clip(values, 0.0, 1.0)
    return float(values[0]) if np.ndim(u) == 1 else values


def empirical_copula(handle: EstimatorHandle, u) -> Union[float, np.ndarray]:
    """(1/m) sum_i prod_j 1(R_ij / m <= u_j); 0 for an empty window."""
    points = np.atleast_2d(handle.points(u))
    if handle.m == 0:
        return _finish(np.zeros(points.shape[0]), u)
    scaled = handle.ranks.ranks / handle.m
    inside = np.all(scaled[None, :, :] <= points[:, None, :], axis=-1)
    return _finish(inside.mean(axis=1), u)


def empirical_beta_copula(handle: EstimatorHandle, u) -> Union[float, np.ndarray]:
    """(1/m) sum_i prod_j I_{u_j}(R_ij, m + 1 - R_ij)."""
    points = np.atleast_2d(handle.points(u))
    if handle.m == 0:
        return _finish(np.zeros(points.shape[0]), u)
    r = handle.ranks.ranks
    factors = numerics.reg_inc_beta_grid(r[None, :, :], handle.m + 1 - r[None, :, :], points[:, None, :])
    return _finish(np.prod(factors, axis=-1).mean(axis=1), u)


def _pilot_average(handle: EstimatorHandle, tables: MarginTables) -> np.ndarray:
    """(1/m^2) sum_i sum_l prod_j inner[j][k, R_ij - 1, R_lj - 1] for every node k."""
    m, d = handle.m, handle.d
    n_points = tables.outer.shape[1]
    chunk = max(1, _PILOT_CHUNK_ELEMENTS // (m * (m + 1)))
    values = np.empty(n_points)
    for start in range(0, n_points, chunk):
        stop = min(start + chunk, n_points)
        if tables.inner is not None:
            inner = tables.inner[:, start:stop]
        else:
            inner = _pilot_factors(tables.outer[:, start:stop], m)
        product = np.ones((stop - start, m, m))
        for j in range(d):
            idx = handle.rank_index[:, j]
            product *= inner[j][:, idx][:, :, idx]
        values[start:stop] = product.mean(axis=(1, 2))
    return values


def smooth_estimator(handle: EstimatorHandle, u,
                     tables: Optional[MarginTables] = None) -> Union[float, np.ndarray]:
    """
    Closed-form smooth empirical copula at ``u``.

    Args:
        handle: handle bound to a SmoothSpec
        u: point (d,) or points (K, d)
        tables: precomputed tables for the same family, window length and points

    Returns:
        Estimate(s) in [0, 1]
    """
    spec = handle.spec
    if not isinstance(spec, SmoothSpec):
        raise DomainError(f"smooth_estimator needs a smooth specification, got {spec}")
    points = np.atleast_2d(handle.points(u))
    if handle.m == 0:
        return _finish(np.zeros(points.shape[0]), u)

    pilot = spec.survival_copula.kind
    if tables is None:
        tables = margin_tables(spec.margin, handle.m, points, pilot=pilot == PilotKind.EMPIRICAL_BETA)
    elif tables.m != handle.m or tables.family != spec.margin or tables.points.shape != points.shape:
        raise DomainError("margin tables were built for another window length, family or node set")

    if pilot == PilotKind.EMPIRICAL_BETA:
        if not tables.pilot:
            raise DomainError("margin tables lack the empirical beta pilot factors")
        return _finish(_pilot_average(handle, tables), u)

    # factors[k, i, j] = F̄_{j,u_kj}(a(R_ij))
    factors = np.stack([tables.outer[j][:, handle.rank_index[:, j]] for j in range(handle.d)], axis=-1)
    if pilot == PilotKind.INDEPENDENCE:
        values = np.prod(factors, axis=-1).mean(axis=1)
    else:
        flat = model_cdf(spec.survival_copula.model, factors.reshape(-1, handle.d))
        values = np.asarray(flat).reshape(factors.shape[:2]).mean(axis=1)
    return _finish(values, u)


class OracleEstimate(NamedTuple):
    value: float
    std_error: float


def _draw_survival_copula(handle: EstimatorHandle, size: int, rng: np.random.Generator) -> np.ndarray:
    survival_copula = handle.spec.survival_copula
    if survival_copula.kind == PilotKind.INDEPENDENCE:
        return rng.random((size, handle.d))
    if survival_copula.kind == PilotKind.FIXED:
        return sample_uniforms(survival_copula.model, size, rng)
    # Empirical beta copula: pick a row, then invert the beta margins of that row
    uniforms = rng.random((size, handle.d + 1))
    rows = np.minimum((handle.m * uniforms[:, -1]).astype(int), handle.m - 1)
    r = handle.ranks.ranks[rows]
    return numerics.beta_quantile_grid(r, handle.m + 1 - r, uniforms[:, :-1])


def mixture_oracle(handle: EstimatorHandle, u, mc_samples: int, seed: int) -> OracleEstimate:
    """
    Monte Carlo value of the smooth estimator as a mixture of the empirical copula.

    W is drawn from the smoothing distribution at ``u`` (survival copula draw V,
    then W_j = Q_j(1 - V_j) with Q_j the margin quantile), and the kernel
    (1/m) sum_i prod_j 1(W_j > a_ij) is averaged.

    Returns:
        OracleEstimate with the mean and its standard error
    """
    if int(mc_samples) != mc_samples or mc_samples < 1:
        raise DomainError(f"mc_samples must be a positive integer, got {mc_samples}")
    spec = handle.spec
    if spec == EstimatorTag.EMPIRICAL_BETA:
        handle = EstimatorHandle(handle.ranks, SmoothSpec(MarginFamily.binomial(), SurvivalCopula.independence()))
        spec = handle.spec
    if not isinstance(spec, SmoothSpec):
        raise DomainError("the mixture oracle needs a smooth estimator")
    point = handle.points(u)
    if point.ndim != 1:
        raise DomainError("the mixture oracle evaluates one point at a time")

    rng = make_generator(seed)
    m, family = handle.m, spec.margin
    ranks = handle.ranks.ranks
    thresholds = ranks - 0.5 if not family.is_discrete else ranks.astype(float)

    total, total_sq = 0.0, 0.0
    remaining = int(mc_samples)
    while remaining > 0:
        size = min(_ORACLE_CHUNK, remaining)
        remaining -= size
        survival_draws = _draw_survival_copula(handle, size, rng)
        scaled = np.empty((size, handle.d))
        for j in range(handle.d):
            w = np.asarray(margin_quantile(family, m, point[j], 1.0 - survival_draws[:, j]))
            scaled[:, j] = np.rint(w * m) if family.is_discrete else w * m
        if family.is_discrete:
            # S_j > R - 1  <=>  S_j >= R
            hits = np.all(scaled[:, None, :] >= thresholds[None, :, :], axis=-1)
        else:
            hits = np.all(scaled[:, None, :] > thresholds[None, :, :], axis=-1)
        kernel = hits.mean(axis=1)
        total += float(kernel.sum())
        total_sq += float(np.dot(kernel, kernel))

    n = int(mc_samples)
    mean = total / n
    if n == 1:
        return OracleEstimate(mean, 0.0)
    variance = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    return OracleEstimate(mean, float(np.sqrt(variance / n)))


def margin_defect(handle: EstimatorHandle, grid_size: int) -> float:
    """max_j max_{u_j in grid} |estimate(1, ..., u_j, ..., 1) - u_j|."""
    if grid_size < 2:
        raise DomainError(f"grid_size must be at least 2, got {grid_size}")
    grid = np.linspace(0.0, 1.0, grid_size)
    worst = 0.0
    for j in range(handle.d):
        points = np.ones((grid_size, handle.d))
        points[:, j] = grid
        values = np.asarray(handle.evaluate(points))
        worst = max(worst, float(np.max(np.abs(values - grid))))
    return worst
