"""
Smoothing survival margins t -> F̄_t(w).

Three families are supported, each with mean t and a variance controlled
by the dispersion rho:

* ``binomial``: W = S/n with S ~ Binomial(n, t); Var(W) = t(1-t)/n
* ``beta-binomial``: S ~ Beta-Binomial(n, t c, (1-t) c), c = (n-rho)/(rho-1),
  1 < rho < n; Var(W) = rho t(1-t)/n
* ``beta``: W ~ Beta(t c, (1-t) c), c = (n-rho)/rho, 0 < rho < n;
  Var(W) = rho t(1-t)/n

For the discrete families survival thresholds are counts (callers pass
r - 1); for ``beta`` they are points of [0, 1] (callers pass (r - 1/2)/n).
At t in {0, 1} the shape formulas degenerate and the point-mass limits are
returned.
"""
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from smoothcopula.estimation import numerics
from smoothcopula.shared.errors import DomainError
from smoothcopula.shared.utils.logger import SmoothCopulaLogger


class MarginKind(str, Enum):
    SCALED_BINOMIAL = "binomial"
    SCALED_BETA_BINOMIAL = "beta-binomial"
    BETA = "beta"


class MarginFamily(BaseModel):
    """A smoothing margin family and its dispersion parameter."""

    model_config = ConfigDict(frozen=True)

    kind: MarginKind
    rho: Optional[float] = None

    @model_validator(mode="after")
    def _check_rho(self) -> "MarginFamily":
        if self.kind == MarginKind.SCALED_BINOMIAL:
            if self.rho not in (None, 1.0):
                raise ValueError("the scaled binomial family takes no rho")
        elif self.rho is None or not np.isfinite(self.rho):
            raise ValueError(f"{self.kind.value} margins require a finite rho")
        return self

    @classmethod
    def binomial(cls) -> "MarginFamily":
        return cls(kind=MarginKind.SCALED_BINOMIAL)

    @classmethod
    def beta_binomial(cls, rho: float) -> "MarginFamily":
        return cls(kind=MarginKind.SCALED_BETA_BINOMIAL, rho=rho)

    @classmethod
    def beta(cls, rho: float) -> "MarginFamily":
        return cls(kind=MarginKind.BETA, rho=rho)

    @property
    def is_discrete(self) -> bool:
        return self.kind != MarginKind.BETA

    @property
    def dispersion(self) -> float:
        """Variance inflation relative to the scaled binomial family."""
        return 1.0 if self.kind == MarginKind.SCALED_BINOMIAL else float(self.rho)

    def label(self) -> str:
        if self.kind == MarginKind.SCALED_BINOMIAL:
            return "binomial"
        return f"{self.kind.value}:rho={self.rho:g}"

    def validate_for(self, n: int) -> None:
        """Raise DomainError unless rho is admissible for sample size ``n``."""
        if int(n) != n or n < 1:
            raise DomainError(f"sample size must be a positive integer, got {n}")
        if self.kind == MarginKind.SCALED_BETA_BINOMIAL and not (1.0 < self.rho < n):
            raise DomainError(f"beta-binomial margins need 1 < rho < n, got rho={self.rho}, n={n}")
        if self.kind == MarginKind.BETA and not (0.0 < self.rho < n):
            raise DomainError(f"beta margins need 0 < rho < n, got rho={self.rho}, n={n}")


def clamp_family(family: MarginFamily, n: int, epsilon: float = 1e-9,
                 logger: Optional[SmoothCopulaLogger] = None) -> MarginFamily:
    """
    Bring ``rho`` into the admissible range for ``n``.

    rho becomes min(rho, n - 1 - epsilon). When that is still inadmissible
    (n too small), beta-binomial falls back to its rho -> 1 limit, the scaled
    binomial family, and beta margins use rho = n/2. A warning is logged
    whenever the family changes.
    """
    if family.kind == MarginKind.SCALED_BINOMIAL:
        return family
    logger = logger or SmoothCopulaLogger("smoothing_margins")

    rho = min(float(family.rho), n - 1 - epsilon)
    clamped = family.model_copy(update={"rho": rho})
    try:
        clamped.validate_for(n)
    except DomainError:
        if family.kind == MarginKind.SCALED_BETA_BINOMIAL:
            clamped = MarginFamily.binomial()
        else:
            clamped = MarginFamily.beta(n / 2.0)

    if clamped != family:
        logger.warning(f"⚠️ rho clamped for n={n}: {family.label()} -> {clamped.label()}")
    return clamped


def margin_shapes(family: MarginFamily, n: int, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Beta shapes (t c, (1 - t) c) of the beta-binomial or beta family."""
    if family.kind == MarginKind.SCALED_BETA_BINOMIAL:
        c = (n - family.rho) / (family.rho - 1.0)
    elif family.kind == MarginKind.BETA:
        c = (n - family.rho) / family.rho
    else:
        raise DomainError("the scaled binomial family has no beta shapes")
    t = np.asarray(t, dtype=float)
    return t * c, (1.0 - t) * c


def rank_survival_table(family: MarginFamily, n: int, t) -> np.ndarray:
    """
    Survival values F̄_t(a(r)) for every rank r = 1..n.

    a(r) is r - 1 for discrete families and (r - 1/2)/n for beta margins.

    Args:
        family: margin family
        n: window length
        t: evaluation point(s) in [0, 1]

    Returns:
        Array of shape ``t.shape + (n,)``; column r - 1 belongs to rank r
    """
    family.validate_for(n)
    t = np.asarray(t, dtype=float)
    if not np.all((t >= 0.0) & (t <= 1.0)):
        raise DomainError("t must lie in [0, 1]")

    if family.kind == MarginKind.SCALED_BINOMIAL:
        return numerics.binomial_survival_table(n, t)

    table = np.zeros(t.shape + (n,))
    table[t == 1.0] = 1.0
    interior = (t > 0.0) & (t < 1.0)
    if np.any(interior):
        a, b = margin_shapes(family, n, t[interior])
        if family.kind == MarginKind.SCALED_BETA_BINOMIAL:
            table[interior] = numerics.beta_binomial_survival_table(n, a, b)
        else:
            points = (np.arange(1, n + 1) - 0.5) / n
            table[interior] = numerics.beta_survival_grid(a[:, None], b[:, None], points[None, :])
    return table


def margin_survival(family: MarginFamily, n: int, t: float, w) -> np.ndarray:
    """
    Pr(W > w) for the family's smoothing variable at mean ``t``.

    ``w`` is a count threshold for discrete families and a point of [0, 1]
    for beta margins.
    """
    family.validate_for(n)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")

    if family.kind == MarginKind.SCALED_BINOMIAL:
        return numerics.binomial_survival_gt(n, t, w)

    if family.kind == MarginKind.SCALED_BETA_BINOMIAL:
        floors = np.floor(np.asarray(w, dtype=float))
        if t == 0.0:
            result = np.where(floors >= 0, 0.0, 1.0)
        elif t == 1.0:
            result = np.where(floors < n, 1.0, 0.0)
        else:
            a, b = margin_shapes(family, n, t)
            result = numerics.beta_binomial_survival_gt(n, numerics.ShapePair(float(a), float(b)), w)
        return numerics.scalar_or_array(np.asarray(result, dtype=float), w)

    points = np.asarray(w, dtype=float)
    if not np.all((points >= 0.0) & (points <= 1.0)):
        raise DomainError("beta margins take w in [0, 1]")
    if t == 0.0:
        result = np.zeros_like(points)
    elif t == 1.0:
        result = np.where(points < 1.0, 1.0, 0.0)
    else:
        a, b = margin_shapes(family, n, t)
        result = numerics.beta_survival(numerics.ShapePair(float(a), float(b)), points)
    return numerics.scalar_or_array(np.asarray(result, dtype=float), w)


def margin_pmf(family: MarginFamily, n: int, t: float) -> np.ndarray:
    """Pmf of S = nW over 0..n for a discrete family."""
    if not family.is_discrete:
        raise DomainError("beta margins have no pmf")
    family.validate_for(n)
    if family.kind == MarginKind.SCALED_BINOMIAL or t in (0.0, 1.0):
        return numerics.binomial_pmf_table(n, t)
    a, b = margin_shapes(family, n, t)
    return numerics.beta_binomial_pmf_table(n, a, b)


def margin_quantile(family: MarginFamily, n: int, t: float, p) -> np.ndarray:
    """
    Generalized inverse inf{w : Pr(W <= w) >= p} of the family's W at mean ``t``.

    If P ~ Uniform(0, 1) then ``margin_quantile(family, n, t, P)`` has the
    family's distribution on [0, 1].
    """
    family.validate_for(n)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    probs = np.asarray(p, dtype=float)
    if not np.all((probs >= 0.0) & (probs <= 1.0)):
        raise DomainError("p must lie in [0, 1]")

    if t == 0.0:
        result = np.zeros_like(probs)
    elif t == 1.0:
        result = np.ones_like(probs)
    elif family.is_discrete:
        cdf = np.cumsum(margin_pmf(family, n, t))
        cdf[-1] = 1.0
        result = np.searchsorted(cdf, probs, side="left") / n
    else:
        a, b = margin_shapes(family, n, t)
        result = numerics.inv_reg_inc_beta(probs, numerics.ShapePair(float(a), float(b)))
    return numerics.scalar_or_array(np.asarray(result, dtype=float), p)


def margin_moments(family: MarginFamily, n: int, t: float) -> Tuple[float, float]:
    """Mean and variance of W."""
    family.validate_for(n)
    if t in (0.0, 1.0):
        return float(t), 0.0
    if family.is_discrete:
        pmf = margin_pmf(family, n, t)
        support = np.arange(n + 1) / n
        mean = float(np.dot(pmf, support))
        return mean, float(np.dot(pmf, (support - mean) ** 2))
    a, b = margin_shapes(family, n, t)
    total = a + b
    return float(a / total), float(a * b / (total ** 2 * (total + 1.0)))


def variance_ratio(family: MarginFamily, n: int, t: float) -> float:
    """Var(W) / (t(1 - t)/n) for t in (0, 1)."""
    if not 0.0 < t < 1.0:
        raise DomainError(f"variance ratio needs t in (0, 1), got {t}")
    _, variance = margin_moments(family, n, t)
    return variance / (t * (1.0 - t) / n)


def max_variance_ratio(family: MarginFamily, n: int, grid_size: int = 99) -> float:
    """Largest ``variance_ratio`` over an interior t-grid."""
    grid = np.linspace(0.0, 1.0, grid_size + 2)[1:-1]
    return max(variance_ratio(family, n, t) for t in grid)
