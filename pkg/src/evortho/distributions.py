"""Extreme-value families: densities, CDFs, quantiles and samplers.

Five families are supported:

========  =================  =====================================
family    parameters         support
========  =================  =====================================
gev3      (mu, sigma, xi)    1 + xi (x - mu) / sigma > 0
gumbel    (mu, sigma)        real line
gev2      (sigma, xi)        x > 0 if xi > 0, x < 0 if xi < 0
gp2       (sigma, xi)        x >= 0, and x < -sigma / xi if xi < 0
gp3       (mu, sigma, xi)    x >= mu, and x < mu - sigma / xi if xi < 0
========  =================  =====================================

``gev2`` is the GEV with its finite endpoint pinned at zero, which forces the
location to sigma / xi. Both GEV factors of the density share the truncated
argument ``(1 + xi z)_+``.

Outside the support :func:`log_density` returns :data:`LOG_ZERO`, a finite
stand-in for -inf.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from evortho import _kernels
from evortho._kernels import LOG_ZERO, XI_ZERO_TOL
from evortho.errors import DomainError, InvalidParameterError

__all__ = [
    "LOG_ZERO",
    "XI_ZERO_TOL",
    "Family",
    "ClassicalParams",
    "SupportSpec",
    "support",
    "log_density",
    "density",
    "log_likelihood",
    "cdf",
    "quantile",
    "upper_quantile",
    "sample",
]


class Family(str, enum.Enum):
    GEV3 = "gev3"
    GUMBEL = "gumbel"
    GEV2 = "gev2"
    GP2 = "gp2"
    GP3 = "gp3"

    @property
    def param_names(self):
        return _PARAM_NAMES[self]

    def __str__(self):
        return self.value


_PARAM_NAMES = {
    Family.GEV3: ("mu", "sigma", "xi"),
    Family.GUMBEL: ("mu", "sigma"),
    Family.GEV2: ("sigma", "xi"),
    Family.GP2: ("sigma", "xi"),
    Family.GP3: ("mu", "sigma", "xi"),
}


@dataclass(frozen=True)
class ClassicalParams:
    """Classical (location, scale, shape) parameters of one family.

    ``mu`` is ``None`` for gev2 and gp2, ``xi`` is ``None`` for gumbel.
    Use the family constructors (:meth:`gumbel`, :meth:`gev2`, ...) rather
    than the raw initializer.
    """

    family: Family
    sigma: float
    mu: float | None = None
    xi: float | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        names = family.param_names
        for name in ("mu", "xi"):
            value = getattr(self, name)
            if name in names:
                if value is None:
                    raise InvalidParameterError(f"{family} requires {name}")
                object.__setattr__(self, name, float(value))
            elif value is not None:
                raise InvalidParameterError(f"{family} has no parameter {name}")
        sigma = float(self.sigma)
        object.__setattr__(self, "sigma", sigma)
        if not (sigma > 0.0 and math.isfinite(sigma)):
            raise InvalidParameterError(f"sigma must be positive and finite, got {sigma!r}")
        if self.mu is not None and not math.isfinite(self.mu):
            raise InvalidParameterError(f"mu must be finite, got {self.mu!r}")
        if self.xi is not None and not math.isfinite(self.xi):
            raise InvalidParameterError(f"xi must be finite, got {self.xi!r}")
        if family is Family.GEV2 and self.xi == 0.0:
            raise InvalidParameterError("gev2 requires xi != 0 (xi = 0 is the gumbel family)")

    @classmethod
    def gev3(cls, mu, sigma, xi):
        return cls(Family.GEV3, sigma, mu=mu, xi=xi)

    @classmethod
    def gumbel(cls, mu, sigma):
        return cls(Family.GUMBEL, sigma, mu=mu)

    @classmethod
    def gev2(cls, sigma, xi):
        return cls(Family.GEV2, sigma, xi=xi)

    @classmethod
    def gp2(cls, sigma, xi):
        return cls(Family.GP2, sigma, xi=xi)

    @classmethod
    def gp3(cls, mu, sigma, xi):
        return cls(Family.GP3, sigma, mu=mu, xi=xi)

    @classmethod
    def from_vector(cls, family, values):
        family = Family(family)
        kwargs = dict(zip(family.param_names, (float(v) for v in values)))
        if len(kwargs) != len(family.param_names):
            raise InvalidParameterError(
                f"{family} expects {len(family.param_names)} values, got {len(values)}"
            )
        return cls(family, **kwargs)

    @property
    def names(self):
        return self.family.param_names

    def as_vector(self):
        return np.array([getattr(self, n) for n in self.names])

    def as_dict(self):
        return {n: getattr(self, n) for n in self.names}

    @property
    def location(self):
        """Location of the underlying GEV/GP; sigma / xi for gev2, 0 for gp2."""
        if self.family is Family.GEV2:
            return self.sigma / self.xi
        if self.family is Family.GP2:
            return 0.0
        return self.mu


@dataclass(frozen=True)
class SupportSpec:
    lower: float
    upper: float
    closed_lower: bool = False

    def contains(self, x):
        above = (x >= self.lower) if self.closed_lower else (x > self.lower)
        return above & (x < self.upper)


def support(params):
    """Support interval of ``params``; GP lower endpoints are attained."""
    f = params.family
    if f is Family.GUMBEL:
        return SupportSpec(-math.inf, math.inf)
    if f is Family.GEV2:
        return SupportSpec(0.0, math.inf) if params.xi > 0 else SupportSpec(-math.inf, 0.0)
    mu, sigma, xi = params.location, params.sigma, params.xi
    if f is Family.GEV3:
        if abs(xi) < XI_ZERO_TOL:
            return SupportSpec(-math.inf, math.inf)
        bound = mu - sigma / xi
        return SupportSpec(bound, math.inf) if xi > 0 else SupportSpec(-math.inf, bound)
    if xi >= 0 or abs(xi) < XI_ZERO_TOL:
        return SupportSpec(mu, math.inf, closed_lower=True)
    return SupportSpec(mu, mu - sigma / xi, closed_lower=True)


def log_density(params, x):
    """Log-density at ``x`` (scalar or array); :data:`LOG_ZERO` off-support."""
    scalar = np.ndim(x) == 0
    f = params.family
    if f is Family.GUMBEL:
        lp = _kernels.logpdf_gumbel(x, params.mu, params.sigma)
    elif f is Family.GEV3:
        lp = _kernels.logpdf_gev3(x, params.mu, params.sigma, params.xi)
    elif f is Family.GEV2:
        lp = _kernels.logpdf_gev2(x, params.sigma, params.xi)
    else:
        lp = _kernels.logpdf_gp(x, params.location, params.sigma, params.xi)
    return float(lp) if scalar else lp


def density(params, x):
    lp = np.asarray(log_density(params, x))
    d = np.where(lp <= LOG_ZERO, 0.0, np.exp(lp))
    return float(d) if np.ndim(x) == 0 else d


def log_likelihood(params, data):
    """Sum of log-densities over ``data`` using the active kernel backend.

    Returns :data:`LOG_ZERO` as soon as one observation is off-support.
    """
    x = _kernels.as_data(data)
    f = params.family
    if f is Family.GUMBEL:
        return _kernels.loglik_gumbel(x, params.mu, params.sigma)
    if f is Family.GEV3:
        return _kernels.loglik_gev3(x, params.mu, params.sigma, params.xi)
    if f is Family.GEV2:
        return _kernels.loglik_gev2(x, params.sigma, params.xi)
    return _kernels.loglik_gp(x, params.location, params.sigma, params.xi)


def _exceedance_power(xz, xi):
    # (1 + xz)^(-1/xi) for xz > -1, written through log1p
    with np.errstate(over="ignore", divide="ignore"):
        return np.exp(-np.log1p(xz) / xi)


def cdf(params, x):
    """Cumulative distribution function, clamped to [0, 1]."""
    x_arr = np.asarray(x, dtype=float)
    f = params.family
    sigma = params.sigma
    with np.errstate(over="ignore", invalid="ignore"):
        if f is Family.GUMBEL or (f is Family.GEV3 and abs(params.xi) < XI_ZERO_TOL):
            p = np.exp(-np.exp(-(x_arr - params.mu) / sigma))
        elif f in (Family.GEV3, Family.GEV2):
            xi = params.xi
            if f is Family.GEV2:
                xz = xi * x_arr / sigma - 1.0
            else:
                xz = xi * (x_arr - params.mu) / sigma
            inside = xz > -1.0
            t = _exceedance_power(np.where(inside, xz, 0.0), xi)
            p = np.where(inside, np.exp(-t), 0.0 if xi > 0 else 1.0)
        else:
            xi = params.xi
            z = (x_arr - params.location) / sigma
            if abs(xi) < XI_ZERO_TOL:
                p = np.where(z > 0, -np.expm1(-np.maximum(z, 0.0)), 0.0)
            else:
                inside = (z > 0) & (xi * z > -1.0)
                p = -np.expm1(-np.log1p(np.where(inside, xi * z, 0.0)) / xi)
                p = np.where(inside, p, np.where(z > 0, 1.0, 0.0))
    p = np.clip(p, 0.0, 1.0)
    return float(p) if np.ndim(x) == 0 else p


def quantile(params, p):
    """Inverse of :func:`cdf` for ``p`` in the open interval (0, 1)."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise DomainError("quantile requires 0 < p < 1")
    if params.family in (Family.GP2, Family.GP3):
        q = _quantile_from_log_survival(params, np.log1p(-p_arr))
    else:
        q = _quantile_from_exponential(params, -np.log(p_arr))
    return float(q) if np.ndim(p) == 0 else q


def upper_quantile(params, v):
    """Quantile at probability ``1 - v``, accurate for ``v`` near 0."""
    v_arr = np.asarray(v, dtype=float)
    if np.any(~((v_arr > 0.0) & (v_arr < 1.0))):
        raise DomainError("upper_quantile requires 0 < v < 1")
    if params.family in (Family.GP2, Family.GP3):
        q = _quantile_from_log_survival(params, np.log(v_arr))
    else:
        q = _quantile_from_exponential(params, -np.log1p(-v_arr))
    return float(q) if np.ndim(v) == 0 else q


def _quantile_from_exponential(params, e):
    # GEV-type: F(x) = exp(-e) with e the standard exponential variate
    sigma = params.sigma
    if params.family is Family.GEV2:
        return (sigma / params.xi) * np.exp(-params.xi * np.log(e))
    if params.family is Family.GUMBEL or abs(params.xi) < XI_ZERO_TOL:
        return params.mu - sigma * np.log(e)
    return params.mu + sigma * np.expm1(-params.xi * np.log(e)) / params.xi


def _quantile_from_log_survival(params, ls):
    # GP: 1 - F(x) = exp(ls)
    if abs(params.xi) < XI_ZERO_TOL:
        return params.location - params.sigma * ls
    return params.location + params.sigma * np.expm1(-params.xi * ls) / params.xi


def sample(params, n, rng):
    """Draw ``n`` variates by inverse-CDF sampling.

    ``rng`` is a :class:`numpy.random.Generator` or anything accepted by
    :func:`numpy.random.default_rng`; the draws are a deterministic function
    of its state.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    rng = np.random.default_rng(rng)
    u = rng.random(int(n))
    u[u == 0.0] = np.finfo(float).tiny
    return quantile(params, u)
