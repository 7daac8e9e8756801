"""
Special functions and exact distribution evaluations.

Every smoothing margin reduces to one of three distributions: Binomial,
Beta-Binomial and Beta. The public operations accept scalars or arrays and
validate their arguments; the ``*_table`` helpers are the vectorized
primitives the estimators index by rank.
"""
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from smoothcopula.shared.errors import DomainError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ShapePair:
    """Shape parameters (a, b) of a Beta or Beta-Binomial distribution."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a <= 0 or self.b <= 0:
            raise DomainError(f"shape parameters must be positive and finite, got a={self.a}, b={self.b}")


def _unit_interval(x: ArrayLike, name: str) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if not np.all((values >= 0.0) & (values <= 1.0)):
        raise DomainError(f"{name} must lie in [0, 1], got {x}")
    return values


def _check_trials(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"number of trials must be a positive integer, got {n}")
    return int(n)


def scalar_or_array(result: np.ndarray, *inputs) -> ArrayLike:
    if all(np.ndim(value) == 0 for value in inputs):
        return float(result)
    return result


def log_gamma(x: ArrayLike) -> ArrayLike:
    """Natural logarithm of the gamma function for x > 0."""
    values = np.asarray(x, dtype=float)
    if not np.all(values > 0):
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return scalar_or_array(special.gammaln(values), x)


def reg_inc_beta(x: ArrayLike, shapes: ShapePair) -> ArrayLike:
    """Regularized incomplete beta function I_x(a, b)."""
    values = _unit_interval(x, "x")
    return scalar_or_array(special.betainc(shapes.a, shapes.b, values), x)


def inv_reg_inc_beta(p: ArrayLike, shapes: ShapePair) -> ArrayLike:
    """Inverse of ``reg_inc_beta`` in x: the p-quantile of Beta(a, b)."""
    values = _unit_interval(p, "p")
    result = special.betaincinv(shapes.a, shapes.b, values)
    result = np.where(values == 0.0, 0.0, np.where(values == 1.0, 1.0, result))
    return scalar_or_array(result, p)


def binomial_survival_gt(n: int, t: ArrayLike, k: ArrayLike) -> ArrayLike:
    """
    Pr(S > k) for S ~ Binomial(n, t), with floor semantics in k.

    Args:
        n: number of trials
        t: success probability(ies) in [0, 1]
        k: threshold(s); any real

    Returns:
        Survival probability broadcast over ``t`` and ``k``.
    """
    n = _check_trials(n)
    probs = _unit_interval(t, "t")
    floors = np.floor(np.asarray(k, dtype=float))
    probs, floors = np.broadcast_arrays(probs, floors)

    inside = (floors >= 0) & (floors < n)
    tail = special.bdtrc(np.clip(floors, 0, n - 1), n, probs)
    result = np.where(floors < 0, 1.0, np.where(inside, tail, 0.0))
    # Exact endpoints
    result = np.where(inside & (probs == 0.0), 0.0, result)
    result = np.where(inside & (probs == 1.0), 1.0, result)
    return scalar_or_array(np.clip(result, 0.0, 1.0), t, k)


def _log_binomial_coefficients(n: int) -> np.ndarray:
    s = np.arange(n + 1)
    return special.gammaln(n + 1) - special.gammaln(s + 1) - special.gammaln(n - s + 1)


def _survival_from_pmf(pmf: np.ndarray) -> np.ndarray:
    """
    Pr(S > k), k = 0..n-1, from a pmf over 0..n on the last axis.

    The smaller tail is summed so values near 0 and near 1 both keep
    absolute accuracy.
    """
    upper = np.cumsum(pmf[..., ::-1], axis=-1)[..., ::-1][..., 1:]
    lower = np.cumsum(pmf, axis=-1)[..., :-1]
    table = np.where(upper > 0.5, 1.0 - lower, upper)
    return np.clip(table, 0.0, 1.0)


def binomial_pmf_table(n: int, t: ArrayLike) -> np.ndarray:
    """Binomial(n, t) pmf over 0..n, shape ``t.shape + (n + 1,)``."""
    n = _check_trials(n)
    probs = _unit_interval(t, "t")[..., None]
    s = np.arange(n + 1)
    log_pmf = _log_binomial_coefficients(n) + special.xlogy(s, probs) + special.xlog1py(n - s, -probs)
    return np.exp(log_pmf)


def binomial_survival_table(n: int, t: ArrayLike) -> np.ndarray:
    """
    Pr(S > k) for k = 0..n-1 and S ~ Binomial(n, t).

    Equivalently, by the beta/binomial identity, column r-1 holds
    I_t(r, n + 1 - r).

    Returns:
        Array of shape ``t.shape + (n,)``.
    """
    return _survival_from_pmf(binomial_pmf_table(n, t))


def beta_binomial_pmf_table(n: int, a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Beta-Binomial(n, a, b) pmf over 0..n, shape ``broadcast(a, b).shape + (n + 1,)``."""
    n = _check_trials(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    if not (np.all(a > 0) and np.all(b > 0)):
        raise DomainError("beta-binomial shapes must be positive")
    s = np.arange(n + 1)
    log_pmf = _log_binomial_coefficients(n) + special.betaln(s + a, n - s + b) - special.betaln(a, b)
    return np.exp(log_pmf)


def beta_binomial_survival_table(n: int, a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Pr(S > k), k = 0..n-1, for S ~ Beta-Binomial(n, a, b)."""
    return _survival_from_pmf(beta_binomial_pmf_table(n, a, b))


def beta_binomial_survival_gt(n: int, shapes: ShapePair, k: ArrayLike) -> ArrayLike:
    """
    Pr(S > k) for S ~ Beta-Binomial(n, a, b), with floor semantics in k.

    The pmf is summed in log space; k < 0 gives 1 and k >= n gives 0.
    """
    n = _check_trials(n)
    floors = np.floor(np.asarray(k, dtype=float))
    table = beta_binomial_survival_table(n, shapes.a, shapes.b)
    index = np.clip(floors, 0, n - 1).astype(int)
    result = np.where(floors < 0, 1.0, np.where(floors >= n, 0.0, table[index]))
    return scalar_or_array(result, k)


def beta_survival(shapes: ShapePair, w: ArrayLike) -> ArrayLike:
    """Survival function 1 - I_w(a, b) of Beta(a, b)."""
    values = _unit_interval(w, "w")
    return scalar_or_array(special.betaincc(shapes.a, shapes.b, values), w)


def reg_inc_beta_grid(a: ArrayLike, b: ArrayLike, x: ArrayLike) -> np.ndarray:
    """Broadcast ``I_x(a, b)`` without shape validation."""
    return special.betainc(a, b, x)


def beta_survival_grid(a: ArrayLike, b: ArrayLike, w: ArrayLike) -> np.ndarray:
    """Broadcast ``1 - I_w(a, b)`` without shape validation (callers mask degenerate shapes)."""
    return special.betaincc(a, b, w)


def beta_quantile_grid(a: ArrayLike, b: ArrayLike, p: ArrayLike) -> np.ndarray:
    """Broadcast Beta(a, b) quantiles without shape validation."""
    return special.betaincinv(a, b, p)
