"""Maximum-likelihood fitting in classical or orthogonal coordinates.

The optimizer is Nelder-Mead on unconstrained coordinates: strictly positive
coordinates (scales, the gp-scale ``nu``, ``|rho|`` of gev2-scale) are
optimized on the log scale and everything else as is. Points outside the
support get the :data:`~evortho.distributions.LOG_ZERO` likelihood, so the
simplex simply contracts away from them.

After convergence the observed information (negative Hessian of the
log-likelihood, by central differences) is computed in the fitted
coordinates; standard errors and the estimate correlation come from its
inverse.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from evortho import _kernels
from evortho.distributions import LOG_ZERO, ClassicalParams, Family
from evortho.errors import (
    DomainError,
    InfeasibleDataError,
    SingularMatrixError,
    StepUnderflowError,
)
from evortho.fisher import FisherMatrix
from evortho.reparam import GUMBEL_SCALE_SLOPE, OrthoChart, OrthoParams, from_classical, to_classical
from evortho.specfun import EULER_GAMMA

__all__ = [
    "FitConfig",
    "FitResult",
    "Parametrisation",
    "fit",
    "observed_information",
    "estimate_correlation",
    "coordinate_names",
]

CLASSICAL = "classical"
MIN_SAMPLE_SIZE = 5
_ONE_MINUS_G = 1.0 - EULER_GAMMA

# per-coordinate optimizer transform: "id", "log" or "signed" (value = sign * exp(u))
_KINDS = {
    (Family.GUMBEL, CLASSICAL): ("id", "log"),
    (Family.GEV3, CLASSICAL): ("id", "log", "id"),
    (Family.GEV2, CLASSICAL): ("log", "id"),
    (Family.GP2, CLASSICAL): ("log", "id"),
    (Family.GP3, CLASSICAL): ("id", "log", "id"),
    (Family.GUMBEL, OrthoChart.GUMBEL_LOC): ("id", "log"),
    (Family.GUMBEL, OrthoChart.GUMBEL_SCALE): ("id", "id"),
    (Family.GEV2, OrthoChart.GEV2_SCALE): ("signed", "id"),
    (Family.GP2, OrthoChart.GP_SCALE): ("log", "id"),
    (Family.GP2, OrthoChart.GP_SHAPE): ("log", "id"),
    (Family.GP3, OrthoChart.GP3_SCALE): ("id", "log", "id"),
}


@dataclass(frozen=True)
class FitConfig:
    parametrisation: str = CLASSICAL
    max_iterations: int = 500
    convergence_tol: float = 1e-8
    restarts: int = 3

    def __post_init__(self):
        if self.parametrisation != CLASSICAL:
            object.__setattr__(self, "parametrisation", OrthoChart(self.parametrisation))
        if not self.convergence_tol > 0:
            raise DomainError("convergence_tol must be positive")
        if self.max_iterations < 1 or self.restarts < 1:
            raise DomainError("max_iterations and restarts must be >= 1")


@dataclass(frozen=True)
class Parametrisation:
    """A family together with the coordinates it is fitted in."""

    family: Family
    chart: OrthoChart | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.chart is not None:
            chart = OrthoChart(self.chart)
            if chart.family is not self.family:
                raise DomainError(f"chart {chart} does not apply to family {self.family}")
            object.__setattr__(self, "chart", chart)

    @classmethod
    def resolve(cls, family, parametrisation=CLASSICAL):
        if parametrisation in (None, CLASSICAL):
            return cls(family)
        return cls(family, parametrisation)

    @property
    def label(self):
        return CLASSICAL if self.chart is None else self.chart.value

    @property
    def names(self):
        return self.family.param_names if self.chart is None else self.chart.names

    @property
    def kinds(self):
        return _KINDS[(self.family, self.chart or CLASSICAL)]

    def to_classical(self, theta) -> ClassicalParams:
        if self.chart is None:
            return ClassicalParams.from_vector(self.family, theta)
        return to_classical(OrthoParams(self.chart, tuple(theta)))

    def from_classical(self, cp: ClassicalParams) -> np.ndarray:
        if self.chart is None:
            return cp.as_vector()
        return from_classical(self.chart, cp).as_vector()

    def loglik_function(self, data):
        """Fast ``theta -> log-likelihood`` closure over ``data``.

        Mirrors :func:`to_classical` arithmetic inline; any domain violation
        yields ``LOG_ZERO``.
        """
        return _make_loglik(self.family, self.chart, _kernels.as_data(data))


def coordinate_names(family, parametrisation=CLASSICAL):
    return Parametrisation.resolve(family, parametrisation).names


def _make_loglik(family, chart, x):
    k = _kernels
    if chart is None:
        if family is Family.GUMBEL:
            return lambda t: k.loglik_gumbel(x, t[0], t[1])
        if family is Family.GEV3:
            return lambda t: k.loglik_gev3(x, t[0], t[1], t[2])
        if family is Family.GEV2:
            return lambda t: k.loglik_gev2(x, t[0], t[1]) if t[1] != 0.0 else LOG_ZERO
        if family is Family.GP2:
            return lambda t: k.loglik_gp(x, 0.0, t[0], t[1])
        return lambda t: k.loglik_gp(x, t[0], t[1], t[2])
    if chart is OrthoChart.GUMBEL_LOC:
        return lambda t: k.loglik_gumbel(x, _ONE_MINUS_G * t[1] + t[0], t[1])
    if chart is OrthoChart.GUMBEL_SCALE:
        return lambda t: k.loglik_gumbel(x, t[0], GUMBEL_SCALE_SLOPE * t[0] + t[1])
    if chart is OrthoChart.GEV2_SCALE:

        def gev2_scale(t):
            rho, xi = t[0], t[1]
            if not rho * xi > 0.0:
                return LOG_ZERO
            return k.loglik_gev2(x, rho * xi * math.exp(_ONE_MINUS_G * xi), xi)

        return gev2_scale
    if chart is OrthoChart.GP_SCALE:
        return lambda t: k.loglik_gp(x, 0.0, t[0] / (1.0 + t[1]), t[1]) if t[1] > -1.0 else LOG_ZERO
    if chart is OrthoChart.GP_SHAPE:
        return lambda t: k.loglik_gp(x, 0.0, t[0], t[1] - 0.5 * math.log(t[0])) if t[0] > 0.0 else LOG_ZERO
    return lambda t: k.loglik_gp(x, t[0], t[1] / (1.0 + t[2]), t[2]) if t[2] > -1.0 else LOG_ZERO


@dataclass
class FitResult:
    family: Family
    parametrisation: str
    names: tuple
    estimate: np.ndarray
    estimate_classical: ClassicalParams
    loglik: float
    observed_info: FisherMatrix | None
    std_errors: np.ndarray
    correlation: np.ndarray
    converged: bool
    iterations: int
    n_evaluations: int
    n_obs: int
    message: str = ""
    notes: list = field(default_factory=list)

    @property
    def cross_correlation(self):
        """Off-diagonal estimate correlation: a float for two parameters, else the matrix."""
        if self.correlation.shape == (2, 2):
            return float(self.correlation[0, 1])
        return self.correlation

    def to_dict(self):
        def clean(a):
            a = np.asarray(a, dtype=float)
            return [None if not math.isfinite(v) else v for v in a.ravel().tolist()] if a.ndim < 2 else [
                clean(row) for row in a
            ]

        cc = self.cross_correlation
        return {
            "family": self.family.value,
            "parametrisation": self.parametrisation,
            "names": list(self.names),
            "estimate": dict(zip(self.names, clean(self.estimate))),
            "estimate_classical": self.estimate_classical.as_dict(),
            "loglik": self.loglik,
            "observed_info": None if self.observed_info is None else self.observed_info.to_dict(),
            "std_errors": dict(zip(self.names, clean(self.std_errors))),
            "cross_correlation": clean([cc])[0] if isinstance(cc, float) else clean(cc),
            "converged": self.converged,
            "iterations": self.iterations,
            "n_evaluations": self.n_evaluations,
            "n_obs": self.n_obs,
            "message": self.message,
        }


def _validate_data(data):
    x = np.asarray(data, dtype=float).ravel()
    if x.size < MIN_SAMPLE_SIZE:
        raise DomainError(f"need at least {MIN_SAMPLE_SIZE} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("data contains non-finite values")
    if np.ptp(x) == 0.0:
        raise InfeasibleDataError("all observations are equal; the likelihood has no finite maximum")
    return x


def _initial_classical(family, x):
    """Moment/quantile-based starting points, best-first."""
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    if family is Family.GUMBEL:
        s0 = sd * math.sqrt(6.0) / math.pi
        return [ClassicalParams.gumbel(mean - EULER_GAMMA * s0, s0)]
    if family is Family.GEV3:
        s0 = sd * math.sqrt(6.0) / math.pi
        m0 = mean - EULER_GAMMA * s0
        return [ClassicalParams.gev3(m0, s0, xi) for xi in (0.1, -0.1, 0.3, 1e-3)]
    if family is Family.GEV2:
        if np.all(x > 0):
            sign = 1.0
        elif np.all(x < 0):
            sign = -1.0
        else:
            raise InfeasibleDataError("gev2 data must be all positive (xi > 0) or all negative (xi < 0)")
        med = float(np.median(x))
        starts = []
        for mag in (0.2, 0.5, 0.05):
            xi0 = mag * sign
            starts.append(ClassicalParams.gev2(xi0 * med * math.log(2.0) ** xi0, xi0))
        return starts
    if family is Family.GP2:
        if np.any(x < 0):
            raise InfeasibleDataError("gp2 data must be non-negative")
        return [ClassicalParams.gp2(max(mean, 1e-12) * (1.0 - xi0), xi0) for xi0 in (0.1, -0.1, 0.3)]
    lo = float(np.min(x))
    mu0 = lo - 0.05 * sd
    excess = mean - mu0
    return [ClassicalParams.gp3(mu0, excess * (1.0 - xi0), xi0) for xi0 in (0.1, -0.1, 0.3)]


def _to_unconstrained(theta, kinds):
    u = np.empty(len(theta))
    for k, (v, kind) in enumerate(zip(theta, kinds)):
        u[k] = math.log(abs(v)) if kind in ("log", "signed") else v
    return u


def _from_unconstrained(u, kinds, signs):
    theta = np.empty(len(u))
    for k, (v, kind) in enumerate(zip(u, kinds)):
        if kind == "id":
            theta[k] = v
        else:
            theta[k] = signs[k] * math.exp(min(v, 700.0))
    return theta


def _initial_simplex(u0, kinds, spread):
    dim = len(u0)
    simplex = np.tile(u0, (dim + 1, 1))
    for k in range(dim):
        step = 0.1 if kinds[k] != "id" else max(0.1 * spread, 0.05 * abs(u0[k]), 0.05)
        simplex[k + 1, k] += step
    return simplex


def fit(family, data, cfg: FitConfig | None = None) -> FitResult:
    """Maximize the log-likelihood of ``data`` in the coordinates given by ``cfg``.

    Non-convergence is reported through ``FitResult.converged``; data that no
    parameter value can explain raises :class:`InfeasibleDataError`.
    """
    cfg = cfg or FitConfig()
    model = Parametrisation.resolve(family, cfg.parametrisation)
    x = _validate_data(data)
    loglik = model.loglik_function(x)
    kinds = model.kinds

    starts = []
    for cp in _initial_classical(model.family, x):
        try:
            theta0 = model.from_classical(cp)
        except DomainError:
            continue
        ll0 = loglik(theta0)
        if ll0 > LOG_ZERO:
            starts.append((ll0, theta0))
    if not starts:
        raise InfeasibleDataError(f"no starting point gives the data a finite {model.family} likelihood")
    theta0 = max(starts, key=lambda s: s[0])[1]
    # GP3: for xi > -1 the likelihood increases strictly in mu up to min(x),
    # so the location estimate is the sample minimum and only the rest is searched
    free = np.arange(theta0.size)
    if model.family is Family.GP3:
        theta0 = theta0.copy()
        theta0[0] = float(np.min(x))
        free = free[1:]
    signs = np.where(theta0 < 0, -1.0, 1.0)
    free_kinds = [kinds[k] for k in free]

    def expand(u):
        theta = theta0.copy()
        theta[free] = _from_unconstrained(u, free_kinds, signs[free])
        return theta

    def objective(u):
        return -loglik(expand(u))

    u = _to_unconstrained(theta0[free], free_kinds)
    spread = float(np.std(x, ddof=1))
    tol = cfg.convergence_tol
    iterations = 0
    evaluations = 0
    f_prev = objective(u)
    converged = False
    message = ""
    for attempt in range(cfg.restarts):
        res = minimize(
            objective,
            u,
            method="Nelder-Mead",
            options={
                "xatol": tol,
                "fatol": tol,
                "maxiter": cfg.max_iterations,
                "maxfev": 4 * cfg.max_iterations,
                "initial_simplex": _initial_simplex(u, free_kinds, spread if attempt == 0 else 0.1 * spread),
            },
        )
        iterations += int(res.nit)
        evaluations += int(res.nfev)
        message = str(res.message)
        moved = float(np.max(np.abs(res.x - u)))
        improved = f_prev - float(res.fun)
        if res.fun <= f_prev:
            u = res.x
            f_prev = float(res.fun)
        if attempt > 0 and res.success and improved <= tol * max(1.0, abs(f_prev)) and moved <= 10 * tol:
            converged = True
            break
    theta = expand(u)
    ll = -f_prev
    if not ll > LOG_ZERO:
        raise InfeasibleDataError("optimizer never reached a point with finite likelihood")
    cp = model.to_classical(theta)

    k = len(theta)
    info = None
    se = np.full(k, np.nan)
    corr = np.full((k, k), np.nan)
    notes = []
    if free.size < k:
        notes.append("mu fixed at the sample minimum (boundary estimate); information covers the other coordinates")
    try:
        def free_loglik(t):
            full = theta.copy()
            full[free] = t
            return loglik(full)

        info = _observed_information(free_loglik, theta[free], tuple(model.names[j] for j in free), min_step=1e-5)
        cov = np.linalg.inv(info.entries)
        d = np.diag(cov)
        if np.all(d > 0) and info.is_positive_definite():
            sd = np.sqrt(d)
            se[free] = sd
            c = cov / np.outer(sd, sd)
            np.fill_diagonal(c, 1.0)
            corr[np.ix_(free, free)] = np.clip(c, -1.0, 1.0)
        else:
            notes.append("observed information is not positive definite")
            converged = False
    except (DomainError, np.linalg.LinAlgError) as exc:
        notes.append(f"observed information unavailable: {exc}")
        converged = False

    return FitResult(
        family=model.family,
        parametrisation=model.label,
        names=model.names,
        estimate=theta,
        estimate_classical=cp,
        loglik=ll,
        observed_info=info,
        std_errors=se,
        correlation=corr,
        converged=converged,
        iterations=iterations,
        n_evaluations=evaluations,
        n_obs=int(x.size),
        message=message,
        notes=notes,
    )


def _observed_information(loglik, theta, names, rel_step=1e-4, min_step=None):
    theta = np.asarray(theta, dtype=float)
    k = theta.size
    h = rel_step * np.abs(theta)
    if min_step is not None:
        h = np.maximum(h, min_step)
    elif np.any(h < rel_step * 1e-8):
        raise StepUnderflowError(
            "relative finite-difference step underflows for a coordinate near 0; pass min_step"
        )
    f0 = loglik(theta)
    cache = {}

    def f(di, dj, i, j):
        key = (i, di, j, dj) if i <= j else (j, dj, i, di)
        if key not in cache:
            t = theta.copy()
            t[i] += di * h[i]
            t[j] += dj * h[j]
            v = loglik(t)
            if not v > LOG_ZERO:
                raise DomainError("finite-difference stencil leaves the support")
            cache[key] = v
        return cache[key]

    if not f0 > LOG_ZERO:
        raise DomainError("log-likelihood is not finite at the evaluation point")
    hess = np.empty((k, k))
    for i in range(k):
        t = theta.copy()
        t[i] += h[i]
        up = loglik(t)
        t[i] -= 2 * h[i]
        dn = loglik(t)
        if not (up > LOG_ZERO and dn > LOG_ZERO):
            raise DomainError("finite-difference stencil leaves the support")
        hess[i, i] = (up - 2.0 * f0 + dn) / (h[i] * h[i])
        for j in range(i + 1, k):
            v = (f(1, 1, i, j) - f(1, -1, i, j) - f(-1, 1, i, j) + f(-1, -1, i, j)) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = v
    return FisherMatrix(names, -hess)


def observed_information(family, at, data, parametrisation=CLASSICAL, rel_step=1e-4, min_step=None):
    """Negative Hessian of the log-likelihood at ``at`` (coordinates of ``parametrisation``).

    Central differences with step ``rel_step * |theta_k|`` per coordinate.
    Without ``min_step`` a coordinate within 1e-8 of zero raises
    :class:`StepUnderflowError`.
    """
    model = Parametrisation.resolve(family, parametrisation)
    loglik = model.loglik_function(np.asarray(data, dtype=float).ravel())
    return _observed_information(loglik, at, model.names, rel_step=rel_step, min_step=min_step)


def estimate_correlation(info):
    """Correlation implied by the inverse of an information matrix.

    Returns the off-diagonal scalar for 2x2 input, else the full matrix.
    """
    m = info.entries if isinstance(info, FisherMatrix) else np.asarray(info, dtype=float)
    try:
        if np.linalg.cond(m) > 1e14:
            raise SingularMatrixError("information matrix is singular")
        cov = np.linalg.inv(m)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("information matrix is singular") from exc
    d = np.sqrt(np.diag(cov))
    corr = cov / np.outer(d, d)
    np.fill_diagonal(corr, 1.0)
    if m.shape == (2, 2):
        return float(corr[0, 1])
    return corr
