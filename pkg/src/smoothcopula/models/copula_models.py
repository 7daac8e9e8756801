"""
Parametric copulas used to generate data and as fixed smoothing survival copulas.

Families: independence, Clayton, Frank, Gumbel–Hougaard, bivariate Gaussian
and the non-exchangeable Khoudraji–Clayton construction. Any family can be
wrapped as its survival (rotated) copula.

Archimedean families are sampled with the Marshall–Olkin frailty algorithm:
draw V from the distribution whose Laplace transform is the generator psi,
then U_j = psi(E_j / V) with E_j i.i.d. Exp(1).
"""
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional

import numpy as np
from scipy import integrate, optimize
from scipy.special import ndtr, ndtri

from smoothcopula.estimation.ranks import ObservationMatrix
from smoothcopula.models.bivariate_normal import bivariate_normal_cdf
from smoothcopula.shared.errors import DomainError
from smoothcopula.shared.rng import make_generator

FRANK_THETA_BOUND = 500.0


class CopulaFamily(str, Enum):
    INDEPENDENCE = "independence"
    CLAYTON = "clayton"
    FRANK = "frank"
    GUMBEL_HOUGAARD = "gumbel"
    GAUSSIAN = "gaussian"
    KHOUDRAJI_CLAYTON = "khoudraji-clayton"


_REQUIRED_PARAMS = {
    CopulaFamily.INDEPENDENCE: (),
    CopulaFamily.CLAYTON: ("theta",),
    CopulaFamily.FRANK: ("theta",),
    CopulaFamily.GUMBEL_HOUGAARD: ("theta",),
    CopulaFamily.GAUSSIAN: ("r",),
    CopulaFamily.KHOUDRAJI_CLAYTON: ("s1", "s2", "theta"),
}


@dataclass(frozen=True)
class CopulaModel:
    """A parametric copula: family, parameters, dimension and rotation flag."""

    family: CopulaFamily
    params: Mapping[str, float] = field(default_factory=dict)
    d: int = 2
    survival: bool = False

    def __post_init__(self):
        family = CopulaFamily(self.family)
        object.__setattr__(self, "family", family)
        params = {key: float(value) for key, value in dict(self.params).items()}
        object.__setattr__(self, "params", params)

        expected = set(_REQUIRED_PARAMS[family])
        if set(params) != expected:
            raise DomainError(f"{family.value} expects parameters {sorted(expected)}, got {sorted(params)}")
        if not all(math.isfinite(v) for v in params.values()):
            raise DomainError(f"parameters must be finite, got {params}")
        if int(self.d) != self.d or self.d < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.d}")

        theta = params.get("theta")
        if family == CopulaFamily.CLAYTON and theta < 0:
            raise DomainError(f"clayton needs theta >= 0, got {theta}")
        if family == CopulaFamily.FRANK:
            if abs(theta) > FRANK_THETA_BOUND:
                raise DomainError(f"frank theta must lie in [-{FRANK_THETA_BOUND:g}, {FRANK_THETA_BOUND:g}]")
            if theta < 0 and self.d > 2:
                raise DomainError("frank with negative theta is only a copula for d = 2")
        if family == CopulaFamily.GUMBEL_HOUGAARD and theta < 1:
            raise DomainError(f"gumbel needs theta >= 1, got {theta}")
        if family == CopulaFamily.GAUSSIAN:
            if not abs(params["r"]) < 1:
                raise DomainError(f"gaussian needs |r| < 1, got {params['r']}")
            if self.d != 2:
                raise DomainError("the gaussian model is bivariate")
        if family == CopulaFamily.KHOUDRAJI_CLAYTON:
            if self.d != 2:
                raise DomainError("the khoudraji-clayton model is bivariate")
            if not (0 < params["s1"] <= 1 and 0 < params["s2"] <= 1):
                raise DomainError(f"khoudraji shapes must lie in (0, 1], got {params}")
            if theta <= 0:
                raise DomainError(f"khoudraji-clayton needs theta > 0, got {theta}")

    def base(self) -> "CopulaModel":
        """The same model without rotation."""
        return CopulaModel(self.family, self.params, self.d, survival=False)

    def rotated(self) -> "CopulaModel":
        """The survival copula of this model."""
        return CopulaModel(self.family, self.params, self.d, survival=not self.survival)


def _as_points(model: CopulaModel, u) -> np.ndarray:
    points = np.asarray(u, dtype=float)
    if points.shape[-1] != model.d:
        raise DomainError(f"points of dimension {points.shape[-1]} for a {model.d}-dimensional model")
    if not np.all((points >= 0.0) & (points <= 1.0)):
        raise DomainError("copula arguments must lie in [0, 1]")
    return points


def _clayton_cdf(theta: float, points: np.ndarray) -> np.ndarray:
    if theta == 0.0:
        return np.prod(points, axis=-1)
    with np.errstate(divide="ignore"):
        logs = np.log(points)
    total = np.sum(np.expm1(-theta * logs), axis=-1)
    with np.errstate(over="ignore"):
        return np.exp(-np.log1p(total) / theta)


def _frank_cdf(theta: float, points: np.ndarray) -> np.ndarray:
    if theta == 0.0:
        return np.prod(points, axis=-1)
    if theta < 0.0:
        # C_theta(u, v) = u - C_{-theta}(u, 1 - v)
        u, v = points[..., 0], points[..., 1]
        return u - _frank_cdf(-theta, np.stack([u, 1.0 - v], axis=-1))
    d = points.shape[-1]
    with np.errstate(divide="ignore"):
        exponent = (np.sum(np.log1p(-np.exp(-theta * points)), axis=-1)
                    - (d - 1) * math.log1p(-math.exp(-theta)))
        return -np.log(-np.expm1(exponent)) / theta


def _gumbel_cdf(theta: float, points: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        neglogs = -np.log(points)
    return np.exp(-np.sum(neglogs ** theta, axis=-1) ** (1.0 / theta))


def _gaussian_cdf(r: float, points: np.ndarray) -> np.ndarray:
    return bivariate_normal_cdf(ndtri(points[..., 0]), ndtri(points[..., 1]), r)


def _khoudraji_cdf(params: Dict[str, float], points: np.ndarray) -> np.ndarray:
    s1, s2 = params["s1"], params["s2"]
    u, v = points[..., 0], points[..., 1]
    inner = np.stack([u ** s1, v ** s2], axis=-1)
    return u ** (1.0 - s1) * v ** (1.0 - s2) * _clayton_cdf(params["theta"], inner)


def _base_cdf(model: CopulaModel, points: np.ndarray) -> np.ndarray:
    family = model.family
    if family == CopulaFamily.INDEPENDENCE:
        values = np.prod(points, axis=-1)
    elif family == CopulaFamily.CLAYTON:
        values = _clayton_cdf(model.params["theta"], points)
    elif family == CopulaFamily.FRANK:
        values = _frank_cdf(model.params["theta"], points)
    elif family == CopulaFamily.GUMBEL_HOUGAARD:
        values = _gumbel_cdf(model.params["theta"], points)
    elif family == CopulaFamily.GAUSSIAN:
        values = _gaussian_cdf(model.params["r"], points)
    else:
        values = _khoudraji_cdf(model.params, points)

    values = np.where(np.any(points == 0.0, axis=-1), 0.0, values)
    # C(1, ..., u_j, ..., 1) = u_j exactly
    ones = points == 1.0
    single = np.sum(~ones, axis=-1) <= 1
    margin = np.min(points, axis=-1)
    values = np.where(single, margin, values)
    return np.clip(values, 0.0, 1.0)


def model_cdf(model: CopulaModel, u) -> np.ndarray:
    """
    Exact copula value(s) of ``model``.

    Args:
        model: copula model
        u: point of [0, 1]^d or array of points with shape (..., d)

    Returns:
        Scalar for a single point, otherwise an array of shape ``u.shape[:-1]``
    """
    points = _as_points(model, u)
    if not model.survival:
        values = _base_cdf(model, points)
    else:
        # Inclusion-exclusion: sum over subsets S of (-1)^|S| C(w^S)
        values = np.zeros(points.shape[:-1])
        base = model.base()
        for subset in itertools.product((False, True), repeat=model.d):
            chosen = np.array(subset)
            w = np.where(chosen, 1.0 - points, 1.0)
            values = values + (-1) ** int(chosen.sum()) * _base_cdf(base, w)
        values = np.clip(values, 0.0, 1.0)
    return float(values) if np.ndim(values) == 0 else values


def _positive_stable(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Kanter's representation of the positive stable law with Laplace transform exp(-s**alpha)."""
    angle = rng.uniform(0.0, math.pi, size)
    exponential = rng.standard_exponential(size)
    return (np.sin(alpha * angle) / np.sin(angle) ** (1.0 / alpha)
            * (np.sin((1.0 - alpha) * angle) / exponential) ** ((1.0 - alpha) / alpha))


def _frank_conditional(theta: float, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Invert the conditional distribution of V given U = u at level w (bivariate Frank)."""
    if theta == 0.0:
        return w
    with np.errstate(divide="ignore"):
        log_w, log_rest = np.log(w), np.log1p(-w)
    upper = np.logaddexp(log_w, log_rest - theta * u)
    lower = np.logaddexp(log_rest - theta * u, log_w - theta)
    return np.clip((upper - lower) / theta, 0.0, 1.0)


def _sample_base(model: CopulaModel, n: int, rng: np.random.Generator) -> np.ndarray:
    family, d = model.family, model.d
    if family == CopulaFamily.INDEPENDENCE:
        return rng.random((n, d))

    if family == CopulaFamily.GAUSSIAN:
        r = model.params["r"]
        z = rng.standard_normal((n, 2))
        second = r * z[:, 0] + math.sqrt(1.0 - r * r) * z[:, 1]
        return np.column_stack([ndtr(z[:, 0]), ndtr(second)])

    if family == CopulaFamily.KHOUDRAJI_CLAYTON:
        s = np.array([model.params["s1"], model.params["s2"]])
        clayton = _sample_base(CopulaModel(CopulaFamily.CLAYTON, {"theta": model.params["theta"]}, 2), n, rng)
        uniform = rng.random((n, 2))
        with np.errstate(divide="ignore"):
            free = np.where(s < 1.0, uniform ** (1.0 / np.where(s < 1.0, 1.0 - s, 1.0)), 0.0)
        return np.maximum(clayton ** (1.0 / s), free)

    theta = model.params["theta"]
    if family == CopulaFamily.FRANK and d == 2:
        first = rng.random(n)
        return np.column_stack([first, _frank_conditional(theta, first, rng.random(n))])

    if (family in (CopulaFamily.CLAYTON, CopulaFamily.FRANK) and theta == 0.0) or \
            (family == CopulaFamily.GUMBEL_HOUGAARD and theta == 1.0):
        return rng.random((n, d))

    exponentials = rng.standard_exponential((n, d))
    if family == CopulaFamily.CLAYTON:
        frailty = rng.gamma(1.0 / theta, 1.0, n)
        return np.exp(-np.log1p(exponentials / frailty[:, None]) / theta)
    if family == CopulaFamily.GUMBEL_HOUGAARD:
        alpha = 1.0 / theta
        frailty = _positive_stable(alpha, n, rng)
        return np.exp(-(exponentials / frailty[:, None]) ** alpha)
    # Frank, d >= 3, theta > 0: logarithmic frailty
    p = min(-math.expm1(-theta), np.nextafter(1.0, 0.0))
    frailty = rng.logseries(p, n).astype(float)
    return -np.log1p(-p * np.exp(-exponentials / frailty[:, None])) / theta


def sample_uniforms(model: CopulaModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws from ``model`` as an (n, d) array, consuming ``rng``."""
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n}")
    draws = _sample_base(model, int(n), rng)
    if model.survival:
        draws = 1.0 - draws
    return np.clip(draws, 0.0, 1.0)


def model_sample(model: CopulaModel, n: int, seed: int) -> ObservationMatrix:
    """n i.i.d. observations from ``model``; deterministic given ``seed``."""
    return ObservationMatrix(sample_uniforms(model, n, make_generator(seed)))


def _debye_complement(theta: float) -> float:
    """(4 / theta**2) * integral_0^theta (1 - t / (e^t - 1)) dt, i.e. 4 (1 - D1(theta)) / theta."""
    def integrand(t: float) -> float:
        return 1.0 - t / math.expm1(t) if t != 0.0 else 0.0

    value, _ = integrate.quad(integrand, 0.0, theta, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 4.0 * value / (theta * theta)


def frank_tau(theta: float) -> float:
    """Kendall's tau of the Frank copula: 1 - 4 (1 - D1(theta)) / theta."""
    if theta == 0.0:
        return 0.0
    return 1.0 - _debye_complement(theta)


def param_to_tau(model: CopulaModel) -> float:
    """Kendall's tau of a bivariate (or exchangeable) model; rotation leaves tau unchanged."""
    family, params = model.family, model.params
    if family == CopulaFamily.INDEPENDENCE:
        return 0.0
    if family == CopulaFamily.CLAYTON:
        return params["theta"] / (params["theta"] + 2.0)
    if family == CopulaFamily.GUMBEL_HOUGAARD:
        return 1.0 - 1.0 / params["theta"]
    if family == CopulaFamily.GAUSSIAN:
        return 2.0 / math.pi * math.asin(params["r"])
    if family == CopulaFamily.FRANK:
        return frank_tau(params["theta"])
    raise DomainError("kendall's tau has no closed form for the khoudraji-clayton model")


def tau_to_param(family: CopulaFamily, tau: float) -> Dict[str, float]:
    """
    Parameters reproducing Kendall's tau ``tau`` for ``family``.

    Clayton and Gumbel–Hougaard accept tau in [0, 1); Frank accepts the tau
    range of theta in [-500, 500]; Gaussian accepts (-1, 1); independence
    accepts only 0.
    """
    family = CopulaFamily(family)
    tau = float(tau)
    if not -1.0 < tau < 1.0:
        raise DomainError(f"kendall's tau must lie in (-1, 1), got {tau}")

    if family == CopulaFamily.INDEPENDENCE:
        if tau != 0.0:
            raise DomainError("independence only attains tau = 0")
        return {}
    if family == CopulaFamily.CLAYTON:
        if tau < 0:
            raise DomainError(f"clayton is implemented for tau >= 0, got {tau}")
        return {"theta": 2.0 * tau / (1.0 - tau)}
    if family == CopulaFamily.GUMBEL_HOUGAARD:
        if tau < 0:
            raise DomainError(f"gumbel attains only tau >= 0, got {tau}")
        return {"theta": 1.0 / (1.0 - tau)}
    if family == CopulaFamily.GAUSSIAN:
        return {"r": math.sin(math.pi * tau / 2.0)}
    if family == CopulaFamily.FRANK:
        if tau == 0.0:
            return {"theta": 0.0}
        low, high = -FRANK_THETA_BOUND, FRANK_THETA_BOUND
        if not frank_tau(low) < tau < frank_tau(high):
            raise DomainError(f"tau={tau} is outside the attainable frank range")
        theta = optimize.brentq(lambda th: frank_tau(th) - tau, low, high, xtol=1e-13, rtol=1e-14, maxiter=500)
        return {"theta": float(theta)}
    raise DomainError("the khoudraji-clayton model is parameterized directly")


def model_from_tau(family: CopulaFamily, tau: float, d: int = 2, survival: bool = False,
                   extra: Optional[Mapping[str, float]] = None) -> CopulaModel:
    """Build a model whose Kendall's tau is ``tau``."""
    params = dict(tau_to_param(family, tau))
    params.update(extra or {})
    return CopulaModel(CopulaFamily(family), params, d, survival)
