"""Gamma-family special functions on the positive real axis.

Gamma uses the Lanczos approximation with g = 7 and nine coefficients,
extended below 0.5 by the upward recurrence. Digamma and trigamma shift the
argument above ``_ASYMPTOTIC_THRESHOLD`` with their recurrences and then sum
the Bernoulli asymptotic series. On [0.05, 50] the relative error of
:func:`gamma_fn` is below 1e-13 and the absolute errors of :func:`digamma`
and :func:`trigamma` are below 1e-13.
"""

import math

from evortho.errors import DomainError

__all__ = [
    "EULER_GAMMA",
    "PI_SQ_OVER_6",
    "gamma_fn",
    "log_gamma",
    "digamma",
    "trigamma",
    "gamma_deriv",
]

EULER_GAMMA = 0.57721566490153286060651209008240243
PI_SQ_OVER_6 = 1.64493406684822643647241516664602519

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.91893853320467274178032973640562

_ASYMPTOTIC_THRESHOLD = 10.0

# B_2k / (2k) for k = 1..7
_DIGAMMA_ASYMP = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# B_2k for k = 1..7
_TRIGAMMA_ASYMP = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)


def _check_positive(z, name):
    z = float(z)
    if not z > 0.0 or math.isinf(z):
        raise DomainError(f"{name} requires a finite argument z > 0, got {z!r}")
    return z


def _lanczos_series(z):
    # A_g(z) for Gamma(z + 1); z >= -0.5
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    return acc


def gamma_fn(z):
    """Gamma function for real ``z > 0``.

    Raises :class:`~evortho.errors.DomainError` for ``z <= 0``.
    """
    z = _check_positive(z, "gamma_fn")
    if z < 0.5:
        # Gamma(z) = Gamma(z + 1) / z keeps the Lanczos sum in its sweet spot
        return gamma_fn(z + 1.0) / z
    if z == math.floor(z) and z <= 23.0:
        return float(math.factorial(int(z) - 1))
    x = z - 1.0
    t = x + _LANCZOS_G + 0.5
    # split the power to delay overflow for large z
    half = t ** ((x + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * _lanczos_series(x)


def log_gamma(z):
    """Natural log of the Gamma function for real ``z > 0``."""
    z = _check_positive(z, "log_gamma")
    if z < 0.5:
        return log_gamma(z + 1.0) - math.log(z)
    x = z - 1.0
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(_lanczos_series(x))


def digamma(z):
    """Digamma function psi(z) = Gamma'(z) / Gamma(z) for ``z > 0``."""
    z = _check_positive(z, "digamma")
    shift = 0.0
    while z < _ASYMPTOTIC_THRESHOLD:
        shift += 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    series = 0.0
    power = inv2
    for c in _DIGAMMA_ASYMP:
        series += c * power
        power *= inv2
    return math.log(z) - 0.5 / z - series - shift


def trigamma(z):
    """Trigamma function psi_1(z), the derivative of :func:`digamma`."""
    z = _check_positive(z, "trigamma")
    shift = 0.0
    while z < _ASYMPTOTIC_THRESHOLD:
        shift += 1.0 / (z * z)
        z += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = 0.0
    power = inv2 * inv
    for b in _TRIGAMMA_ASYMP:
        series += b * power
        power *= inv2
    return inv + 0.5 * inv2 + series + shift


def gamma_deriv(n, z):
    """n-th derivative of the Gamma function, ``n`` in {0, 1, 2}.

    Uses Gamma'(z) = Gamma(z) psi(z) and
    Gamma''(z) = Gamma(z) (psi(z)**2 + psi_1(z)).
    """
    if n not in (0, 1, 2) or isinstance(n, bool):
        raise DomainError(f"gamma_deriv supports n in {{0, 1, 2}}, got {n!r}")
    g = gamma_fn(z)
    if n == 0:
        return g
    psi = digamma(z)
    if n == 1:
        return g * psi
    return g * (psi * psi + trigamma(z))
