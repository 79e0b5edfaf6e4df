"""Pure numpy log-density kernels.

Always importable. The ``loglik_*`` functions are mirrored by the compiled
``_ckernels`` module; the ``logpdf_*`` array functions exist only here.
"""

import numpy as np

# effective -inf; finite so that sums and simplex comparisons stay total
LOG_ZERO = -1e300
XI_ZERO_TOL = 1e-8


def _finish(lp, out):
    lp = np.where(out, LOG_ZERO, lp)
    return np.where(np.isfinite(lp), lp, LOG_ZERO)


def logpdf_gumbel(x, mu, sigma):
    x = np.asarray(x, dtype=float)
    if not sigma > 0:
        return np.full(x.shape, LOG_ZERO)
    z = (x - mu) / sigma
    with np.errstate(over="ignore", invalid="ignore"):
        lp = -np.log(sigma) - z - np.exp(-z)
    return _finish(lp, np.zeros(x.shape, dtype=bool))


def logpdf_gev3(x, mu, sigma, xi):
    if abs(xi) < XI_ZERO_TOL:
        return logpdf_gumbel(x, mu, sigma)
    x = np.asarray(x, dtype=float)
    if not sigma > 0:
        return np.full(x.shape, LOG_ZERO)
    xz = xi * (x - mu) / sigma
    out = xz <= -1.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lw = np.log1p(np.where(out, 0.0, xz))
        lp = -np.log(sigma) - (1.0 + 1.0 / xi) * lw - np.exp(-lw / xi)
    return _finish(lp, out)


def logpdf_gev2(x, sigma, xi):
    x = np.asarray(x, dtype=float)
    if not sigma > 0 or xi == 0:
        return np.full(x.shape, LOG_ZERO)
    r = xi * x / sigma
    out = r <= 0.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lr = np.log(np.where(out, 1.0, r))
        lp = -np.log(sigma) - (1.0 + 1.0 / xi) * lr - np.exp(-lr / xi)
    return _finish(lp, out)


def logpdf_gp(x, mu, sigma, xi):
    x = np.asarray(x, dtype=float)
    if not sigma > 0:
        return np.full(x.shape, LOG_ZERO)
    z = (x - mu) / sigma
    if abs(xi) < XI_ZERO_TOL:
        return _finish(-np.log(sigma) - z, z < 0.0)
    out = (z < 0.0) | (xi * z <= -1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        lp = -np.log(sigma) - (1.0 + 1.0 / xi) * np.log1p(np.where(out, 0.0, xi * z))
    return _finish(lp, out)


def _total(lp):
    if np.any(lp <= LOG_ZERO):
        return LOG_ZERO
    return float(lp.sum())


def loglik_gumbel(x, mu, sigma):
    return _total(logpdf_gumbel(x, mu, sigma))


def loglik_gev3(x, mu, sigma, xi):
    return _total(logpdf_gev3(x, mu, sigma, xi))


def loglik_gev2(x, sigma, xi):
    return _total(logpdf_gev2(x, sigma, xi))


def loglik_gp(x, mu, sigma, xi):
    return _total(logpdf_gp(x, mu, sigma, xi))
