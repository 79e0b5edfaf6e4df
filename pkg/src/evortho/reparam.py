"""Orthogonal reparametrisations (charts) of the extreme-value families.

Each chart keeps one classical parameter, the *interest* parameter, and
replaces the others by new coordinates in which the expected cross
information with the interest parameter vanishes. All integration
constants are the identity.

==============  ======  ==============  ===========================================
chart           family  coordinates     map to classical
==============  ======  ==============  ===========================================
gumbel-loc      gumbel  (nu, sigma)     mu = (1 - g) sigma + nu
gumbel-scale    gumbel  (mu, rho)       sigma = (1 - g) / c mu + rho
gev2-scale      gev2    (rho, xi)       sigma = rho xi exp((1 - g) xi)
gp-scale        gp2     (nu, xi)        sigma = nu / (1 + xi)
gp-shape        gp2     (sigma, zeta)   xi = zeta - log(sigma) / 2
gp3-scale       gp3     (mu, nu, xi)    sigma = nu / (1 + xi), mu unchanged
==============  ======  ==============  ===========================================

Here g is the Euler-Mascheroni constant and c = pi^2/6 + g^2 - 2 g + 1.
The gev2-scale chart needs rho to carry the sign of xi so that sigma > 0.

Orthogonality is pairwise between the interest parameter and each new
coordinate; the new coordinates need not be orthogonal to one another.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from evortho.distributions import ClassicalParams, Family, log_likelihood
from evortho.errors import ChartDomainError, InvalidParameterError
from evortho.fisher import FisherMatrix, fisher_information
from evortho.specfun import EULER_GAMMA, PI_SQ_OVER_6

__all__ = [
    "GUMBEL_SCALE_SLOPE",
    "OrthoChart",
    "OrthoParams",
    "charts_for",
    "to_classical",
    "from_classical",
    "chart_jacobian",
    "ortho_log_likelihood",
    "ortho_fisher",
    "orthogonality_residuals",
    "orthogonality_residual",
]

_ONE_MINUS_G = 1.0 - EULER_GAMMA
GUMBEL_SCALE_SLOPE = _ONE_MINUS_G / (PI_SQ_OVER_6 + EULER_GAMMA**2 - 2.0 * EULER_GAMMA + 1.0)


class OrthoChart(str, enum.Enum):
    GUMBEL_LOC = "gumbel-loc"
    GUMBEL_SCALE = "gumbel-scale"
    GEV2_SCALE = "gev2-scale"
    GP_SCALE = "gp-scale"
    GP_SHAPE = "gp-shape"
    GP3_SCALE = "gp3-scale"

    @property
    def family(self):
        return _CHART_INFO[self][0]

    @property
    def names(self):
        """Chart coordinate names, in storage order."""
        return _CHART_INFO[self][1]

    @property
    def interest(self):
        """Name of the classical parameter the chart leaves unchanged."""
        return _CHART_INFO[self][2]

    def __str__(self):
        return self.value


_CHART_INFO = {
    OrthoChart.GUMBEL_LOC: (Family.GUMBEL, ("nu", "sigma"), "sigma"),
    OrthoChart.GUMBEL_SCALE: (Family.GUMBEL, ("mu", "rho"), "mu"),
    OrthoChart.GEV2_SCALE: (Family.GEV2, ("rho", "xi"), "xi"),
    OrthoChart.GP_SCALE: (Family.GP2, ("nu", "xi"), "xi"),
    OrthoChart.GP_SHAPE: (Family.GP2, ("sigma", "zeta"), "sigma"),
    OrthoChart.GP3_SCALE: (Family.GP3, ("mu", "nu", "xi"), "xi"),
}


def charts_for(family):
    family = Family(family)
    return [c for c in OrthoChart if c.family is family]


@dataclass(frozen=True)
class OrthoParams:
    """A point in chart coordinates; ``values`` follow ``chart.names``."""

    chart: OrthoChart
    values: tuple

    def __post_init__(self):
        chart = OrthoChart(self.chart)
        values = tuple(float(v) for v in self.values)
        if len(values) != len(chart.names):
            raise InvalidParameterError(
                f"{chart} expects coordinates {chart.names}, got {len(values)} values"
            )
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "values", values)

    @classmethod
    def of(cls, chart, **coords):
        chart = OrthoChart(chart)
        missing = set(chart.names) ^ set(coords)
        if missing:
            raise InvalidParameterError(f"{chart} expects coordinates {chart.names}")
        return cls(chart, tuple(coords[n] for n in chart.names))

    def __getitem__(self, name):
        return self.values[self.chart.names.index(name)]

    @property
    def interest(self):
        return self[self.chart.interest]

    @property
    def nuisance(self):
        """The transformed coordinates (everything except the interest one)."""
        return tuple(v for n, v in zip(self.chart.names, self.values) if n != self.chart.interest)

    def as_dict(self):
        return dict(zip(self.chart.names, self.values))

    def as_vector(self):
        return np.array(self.values)


def _positive_sigma(sigma, chart):
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise ChartDomainError(f"{chart} maps to sigma = {sigma!r}, outside sigma > 0")
    return sigma


def to_classical(op: OrthoParams) -> ClassicalParams:
    c = op.chart
    v = op.values
    if c is OrthoChart.GUMBEL_LOC:
        nu, sigma = v
        _positive_sigma(sigma, c)
        return ClassicalParams.gumbel(_ONE_MINUS_G * sigma + nu, sigma)
    if c is OrthoChart.GUMBEL_SCALE:
        mu, rho = v
        return ClassicalParams.gumbel(mu, _positive_sigma(GUMBEL_SCALE_SLOPE * mu + rho, c))
    if c is OrthoChart.GEV2_SCALE:
        rho, xi = v
        if not rho * xi > 0.0:
            raise ChartDomainError(f"{c} requires rho * xi > 0, got rho={rho!r}, xi={xi!r}")
        return ClassicalParams.gev2(_positive_sigma(rho * xi * math.exp(_ONE_MINUS_G * xi), c), xi)
    if c is OrthoChart.GP_SCALE:
        nu, xi = v
        if not xi > -1.0:
            raise ChartDomainError(f"{c} requires xi > -1, got {xi!r}")
        return ClassicalParams.gp2(_positive_sigma(nu / (1.0 + xi), c), xi)
    if c is OrthoChart.GP_SHAPE:
        sigma, zeta = v
        _positive_sigma(sigma, c)
        return ClassicalParams.gp2(sigma, zeta - 0.5 * math.log(sigma))
    mu, nu, xi = v
    if not xi > -1.0:
        raise ChartDomainError(f"{c} requires xi > -1, got {xi!r}")
    return ClassicalParams.gp3(mu, _positive_sigma(nu / (1.0 + xi), c), xi)


def from_classical(chart, cp: ClassicalParams) -> OrthoParams:
    chart = OrthoChart(chart)
    if cp.family is not chart.family:
        raise ChartDomainError(f"{chart} applies to {chart.family}, not {cp.family}")
    if chart is OrthoChart.GUMBEL_LOC:
        vals = (cp.mu - _ONE_MINUS_G * cp.sigma, cp.sigma)
    elif chart is OrthoChart.GUMBEL_SCALE:
        vals = (cp.mu, cp.sigma - GUMBEL_SCALE_SLOPE * cp.mu)
    elif chart is OrthoChart.GEV2_SCALE:
        vals = (cp.sigma / (cp.xi * math.exp(_ONE_MINUS_G * cp.xi)), cp.xi)
    elif chart is OrthoChart.GP_SCALE:
        if not cp.xi > -1.0:
            raise ChartDomainError(f"{chart} requires xi > -1, got {cp.xi!r}")
        vals = (cp.sigma * (1.0 + cp.xi), cp.xi)
    elif chart is OrthoChart.GP_SHAPE:
        vals = (cp.sigma, cp.xi + 0.5 * math.log(cp.sigma))
    else:
        if not cp.xi > -1.0:
            raise ChartDomainError(f"{chart} requires xi > -1, got {cp.xi!r}")
        vals = (cp.mu, cp.sigma * (1.0 + cp.xi), cp.xi)
    return OrthoParams(chart, vals)


def chart_jacobian(op: OrthoParams) -> np.ndarray:
    """d(classical) / d(chart): rows follow ``family.param_names``, columns ``chart.names``."""
    c = op.chart
    v = op.values
    if c is OrthoChart.GUMBEL_LOC:
        # (mu, sigma) wrt (nu, sigma)
        return np.array([[1.0, _ONE_MINUS_G], [0.0, 1.0]])
    if c is OrthoChart.GUMBEL_SCALE:
        # (mu, sigma) wrt (mu, rho)
        return np.array([[1.0, 0.0], [GUMBEL_SCALE_SLOPE, 1.0]])
    if c is OrthoChart.GEV2_SCALE:
        rho, xi = v
        e = math.exp(_ONE_MINUS_G * xi)
        return np.array([[xi * e, rho * e * (1.0 + _ONE_MINUS_G * xi)], [0.0, 1.0]])
    if c is OrthoChart.GP_SCALE:
        nu, xi = v
        a = 1.0 + xi
        return np.array([[1.0 / a, -nu / (a * a)], [0.0, 1.0]])
    if c is OrthoChart.GP_SHAPE:
        sigma, _ = v
        return np.array([[1.0, 0.0], [-0.5 / sigma, 1.0]])
    _, nu, xi = v
    a = 1.0 + xi
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0 / a, -nu / (a * a)],
            [0.0, 0.0, 1.0],
        ]
    )


def ortho_log_likelihood(op: OrthoParams, data) -> float:
    """Log-likelihood at ``op``; no Jacobian term (parameters are relabelled, not data)."""
    return log_likelihood(to_classical(op), data)


def ortho_fisher(op: OrthoParams) -> FisherMatrix:
    """Expected information in chart coordinates, J^T I J."""
    info = fisher_information(to_classical(op))
    jac = chart_jacobian(op)
    return FisherMatrix(op.chart.names, jac.T @ info.entries @ jac)


def orthogonality_residuals(op: OrthoParams) -> np.ndarray:
    """Residuals of the orthogonality PDE system at ``op``, one per transformed parameter.

    For each classical nuisance parameter ``j`` this returns
    ``sum_i I[i, j] d(theta_i)/d(psi) + I[psi, j]``, with ``I`` the classical
    information, ``psi`` the interest parameter and ``theta`` the classical
    nuisance parameters. All entries vanish for an orthogonal chart.
    """
    cp = to_classical(op)
    info = fisher_information(cp)
    jac = chart_jacobian(op)
    psi = op.chart.interest
    classical = cp.names
    psi_col = op.chart.names.index(psi)
    nuisance = [k for k, name in enumerate(classical) if name != psi]
    psi_row = classical.index(psi)
    m = info.entries
    out = []
    for j in nuisance:
        acc = m[psi_row, j]
        for i in nuisance:
            acc += m[i, j] * jac[i, psi_col]
        out.append(acc)
    return np.array(out)


def orthogonality_residual(op: OrthoParams) -> float:
    """Largest-magnitude entry of :func:`orthogonality_residuals` (signed)."""
    r = orthogonality_residuals(op)
    return float(r[np.argmax(np.abs(r))])
