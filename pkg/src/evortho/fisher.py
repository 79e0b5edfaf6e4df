"""Closed-form per-observation Fisher information matrices.

Entries are expectations of score outer products, so every matrix is
symmetric positive definite on its validity domain. Multiply by the sample
size for the information of a sample.

The GEV formulas are those of Prescott and Walden (1980); the GP formulas
those of Smith (1984), with the location entries for a known-threshold
three-parameter GP. For the GP the location score has nonzero mean (the
support depends on mu), so the mu entries are second moments of the
score rather than covariances.

Near xi = 0 the GEV closed form cancels catastrophically, so for
|xi| < XI_SERIES the entries come from their Taylor series about 0 (the
coefficients are generated from the same closed form in high precision).
"""

import math
from dataclasses import dataclass

import numpy as np

from evortho.distributions import ClassicalParams, Family
from evortho.errors import DomainError
from evortho.specfun import EULER_GAMMA, PI_SQ_OVER_6, digamma, gamma_fn

__all__ = [
    "FisherMatrix",
    "XI_MIN",
    "XI_NEAR_ZERO",
    "XI_SERIES",
    "p_of_xi",
    "q_of_xi",
    "fisher_gev3",
    "fisher_gumbel",
    "fisher_gev2",
    "fisher_gp",
    "fisher_information",
]

# E[score^2] needs Gamma(1 + 2 xi) (GEV) or 1 + 2 xi > 0 (GP)
XI_MIN = -0.5
# the GEV expressions carry poles of order up to 1/xi^4 at xi = 0
XI_NEAR_ZERO = 1e-4
# below this |xi| the GEV closed form loses digits (error ~ eps / xi^4 in the
# xi-xi entry) and the Taylor series about 0 is used instead
XI_SERIES = 0.05

_GUMBEL_SS = PI_SQ_OVER_6 + EULER_GAMMA**2 - 2.0 * EULER_GAMMA + 1.0


@dataclass(frozen=True)
class FisherMatrix:
    """Labelled symmetric information matrix."""

    labels: tuple
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != len(self.labels):
            raise ValueError("entries must be square and match the labels")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "entries", m)
        m.setflags(write=False)

    def __getitem__(self, key):
        a, b = key
        return self.entries[self.labels.index(a), self.labels.index(b)]

    @property
    def size(self):
        return len(self.labels)

    def scaled(self, factor):
        return FisherMatrix(self.labels, self.entries * factor)

    def submatrix(self, labels):
        idx = [self.labels.index(name) for name in labels]
        return FisherMatrix(labels, self.entries[np.ix_(idx, idx)])

    def is_positive_definite(self):
        return bool(np.all(np.linalg.eigvalsh(self.entries) > 0.0))

    def to_dict(self):
        return {"labels": list(self.labels), "matrix": self.entries.tolist()}


def _check_xi_min(xi, what):
    if not xi > XI_MIN:
        raise DomainError(f"{what} requires xi > {XI_MIN}, got {xi!r}")


def _check_xi_nonzero(xi, what, alternative):
    if abs(xi) < XI_NEAR_ZERO:
        raise DomainError(
            f"{what} requires |xi| >= {XI_NEAR_ZERO} (xi != 0), got {xi!r}; "
            f"use {alternative} for the xi -> 0 limit"
        )


def _check_sigma(sigma):
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive, got {sigma!r}")


# Taylor coefficients in xi of the sigma = 1 GEV entries about xi = 0, produced
# by scripts/gen_gev3_series.py; the series converge for |xi| < 1/2
_GEV3_SERIES = {
    "mu_mu": (1.0, 0.8455686701969343, 2.647361321705759, -0.5018159758263756, 5.144208153368113, -7.268376034846931, 16.421508315310785, -31.78898087000853, 64.10015027098021, -127.95904714211012, 256.0172153821233, -511.9943850830081, 1024.002407730079, -2047.9995270632355, 4096.000350385293, -8192.000032358597, 16384.00007999106, -32768.00003738755, 65536.00002920962, -131072.000018428),
    "mu_sigma": (-0.42278433509846713, -2.2355209912793192, 0.5833928950734618, -5.069959142614599, 7.268109052778186, -16.410354269592656, 31.786128224187376, -64.09804633763952, 127.9581275682713, -256.0167249936725, 511.9941441415723, -1024.0022860562726, 2047.999466270344, -4096.000319931736, 8192.00001712366, -16384.00007236928, 32768.00003357544, -65536.00002730313, 131072.0000174746, -262144.0000120824),
    "mu_xi": (0.4118403304264397, -0.2509079879131878, 3.7839071042725707, -6.3592950663535746, 15.361701908449469, -30.784164634536143, 63.08806575629266, -126.95384964327943, 255.01371541538114, -510.9924685181563, 1023.0013103145214, -2046.9989193652486, 4095.0000153106225, -8190.999849535417, 16382.99998090304, -32766.99998401686, 65535.000000611806, -131071.00000317364, 262143.00000445446, -524287.0000040272),
    "sigma_sigma": (1.8236806608528795, -0.6649698143205481, 4.995710131861085, -7.267842070709441, 16.399200223874523, -31.78327557836622, 64.09594240429881, -127.95720799443247, 256.01623460522165, -511.99390320013646, 1024.0021643824662, -2047.999405477453, 4096.000289478179, -8192.000001888726, 16384.0000647475, -32768.00002976333, 65536.00002539664, -131072.0000165212, 262144.0000116056, -524288.0000078414),
    "sigma_xi": (0.33248490716027407, -3.7096580935190566, 6.359028084284829, -15.350547862731338, 30.781311988714986, -63.08596182295196, 126.9529300694406, -255.01322502693031, 510.99222757672044, -1023.0011886407149, 2046.9988585723572, -4094.999984857065, 8190.999834300481, -16382.999973281261, 32766.999980204753, -65534.999998705316, 131071.00000222026, -262143.0000039777, 524287.00000378885, -1048575.0000031786),
    "xi_xi": (2.4236060551770287, -5.450214097860218, 14.301895501588152, -29.779348399063753, 62.0759812416051, -125.94865214444874, 254.01021544863897, -509.9905519533044, 1022.0002128989637, -2045.9983116672615, 4093.9996802359515, -8189.999666712236, 16381.999881815022, -32765.999930646176, 65533.99997201398, -131069.99998791929, 262141.9999963498, -524285.99999973626, 1048574.0000010331, -2097150.000001323),
}


def _gev3_series(xi):
    out = {}
    for name, coefs in _GEV3_SERIES.items():
        acc = 0.0
        for c in reversed(coefs):
            acc = acc * xi + c
        out[name] = acc
    return out


def p_of_xi(xi):
    """(1 + xi)^2 Gamma(1 + 2 xi), defined for xi > -1/2."""
    _check_xi_min(xi, "p(xi)")
    return (1.0 + xi) ** 2 * gamma_fn(1.0 + 2.0 * xi)


def q_of_xi(xi):
    """Gamma(2 + xi) (psi(1 + xi) + 1/xi + 1), defined for xi > -1, xi != 0."""
    if not xi > -1.0:
        raise DomainError(f"q(xi) requires xi > -1, got {xi!r}")
    if xi == 0.0:
        raise DomainError("q(xi) has a pole at xi = 0")
    return gamma_fn(2.0 + xi) * (digamma(1.0 + xi) + 1.0 / xi + 1.0)


def fisher_gev3(mu, sigma, xi):
    """Information for GEV(mu, sigma, xi); independent of ``mu``."""
    _check_sigma(sigma)
    _check_xi_min(xi, "fisher_gev3")
    _check_xi_nonzero(xi, "fisher_gev3", "fisher_gumbel")
    s2 = sigma * sigma
    if abs(xi) < XI_SERIES:
        e = _gev3_series(xi)
        i_mm, i_ms, i_mx = e["mu_mu"] / s2, e["mu_sigma"] / s2, e["mu_xi"] / sigma
        i_ss, i_sx, i_xx = e["sigma_sigma"] / s2, e["sigma_xi"] / sigma, e["xi_xi"]
        return FisherMatrix(
            ("mu", "sigma", "xi"),
            [[i_mm, i_ms, i_mx], [i_ms, i_ss, i_sx], [i_mx, i_sx, i_xx]],
        )
    p = p_of_xi(xi)
    q = q_of_xi(xi)
    g2 = gamma_fn(2.0 + xi)
    g = EULER_GAMMA
    x2 = xi * xi
    i_mm = p / s2
    i_ss = (1.0 - 2.0 * g2 + p) / (s2 * x2)
    i_xx = (PI_SQ_OVER_6 + (1.0 - g + 1.0 / xi) ** 2 - 2.0 * q / xi + p / x2) / x2
    i_ms = -(p - g2) / (s2 * xi)
    i_mx = -(q - p / xi) / (sigma * xi)
    i_sx = -(1.0 - g + (1.0 - g2) / xi - q + p / xi) / (sigma * x2)
    return FisherMatrix(
        ("mu", "sigma", "xi"),
        [[i_mm, i_ms, i_mx], [i_ms, i_ss, i_sx], [i_mx, i_sx, i_xx]],
    )


def fisher_gumbel(mu, sigma):
    _check_sigma(sigma)
    s2 = sigma * sigma
    i_ms = (EULER_GAMMA - 1.0) / s2
    return FisherMatrix(("mu", "sigma"), [[1.0 / s2, i_ms], [i_ms, _GUMBEL_SS / s2]])


def fisher_gev2(sigma, xi):
    """Information for the endpoint-at-zero GEV; valid for either sign of xi."""
    _check_sigma(sigma)
    _check_xi_nonzero(xi, "fisher_gev2", "fisher_gumbel")
    g = EULER_GAMMA
    i_ss = 1.0 / (xi * sigma) ** 2
    i_sx = -(1.0 - g) / (sigma * xi**2) - 1.0 / (sigma * xi**3)
    i_xx = _GUMBEL_SS / xi**2 + 2.0 * (1.0 - g) / xi**3 + 1.0 / xi**4
    return FisherMatrix(("sigma", "xi"), [[i_ss, i_sx], [i_sx, i_xx]])


def fisher_gp(sigma, xi, three_param=False, mu=0.0):
    """Information for GP(sigma, xi), or GP(mu, sigma, xi) with ``three_param``.

    The (sigma, xi) block is the same in both cases and nothing depends on
    ``mu``.
    """
    _check_sigma(sigma)
    _check_xi_min(xi, "fisher_gp")
    a = 1.0 + xi
    b = 1.0 + 2.0 * xi
    i_ss = 1.0 / (sigma**2 * b)
    i_xx = 2.0 / (a * b)
    i_sx = 1.0 / (sigma * a * b)
    if not three_param:
        return FisherMatrix(("sigma", "xi"), [[i_ss, i_sx], [i_sx, i_xx]])
    i_mm = a * a / (sigma**2 * b)
    i_ms = -xi / (sigma**2 * b)
    i_mx = -xi / (sigma * a * b)
    return FisherMatrix(
        ("mu", "sigma", "xi"),
        [[i_mm, i_ms, i_mx], [i_ms, i_ss, i_sx], [i_mx, i_sx, i_xx]],
    )


def fisher_information(params: ClassicalParams) -> FisherMatrix:
    """Dispatch to the closed form for ``params.family``."""
    f = params.family
    if f is Family.GEV3:
        return fisher_gev3(params.mu, params.sigma, params.xi)
    if f is Family.GUMBEL:
        return fisher_gumbel(params.mu, params.sigma)
    if f is Family.GEV2:
        return fisher_gev2(params.sigma, params.xi)
    if f is Family.GP2:
        return fisher_gp(params.sigma, params.xi)
    return fisher_gp(params.sigma, params.xi, three_param=True, mu=params.mu)
