# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled log-likelihood sums; same contract as ``_pykernels.loglik_*``."""

from libc.math cimport log, log1p, exp, fabs, isfinite

cdef double LOG_ZERO = -1e300
cdef double XI_ZERO_TOL = 1e-8


cpdef double loglik_gumbel(const double[::1] x, double mu, double sigma):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double z, acc = 0.0, ls
    if not sigma > 0:
        return LOG_ZERO
    ls = log(sigma)
    for i in range(n):
        z = (x[i] - mu) / sigma
        acc += -ls - z - exp(-z)
    if not isfinite(acc):
        return LOG_ZERO
    return acc


cpdef double loglik_gev3(const double[::1] x, double mu, double sigma, double xi):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double xz, lw, acc = 0.0, ls, a, inv_xi
    if fabs(xi) < XI_ZERO_TOL:
        return loglik_gumbel(x, mu, sigma)
    if not sigma > 0:
        return LOG_ZERO
    ls = log(sigma)
    inv_xi = 1.0 / xi
    a = 1.0 + inv_xi
    for i in range(n):
        xz = xi * (x[i] - mu) / sigma
        if xz <= -1.0:
            return LOG_ZERO
        lw = log1p(xz)
        acc += -ls - a * lw - exp(-lw * inv_xi)
    if not isfinite(acc):
        return LOG_ZERO
    return acc


cpdef double loglik_gev2(const double[::1] x, double sigma, double xi):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double r, lr, acc = 0.0, ls, a, inv_xi
    if not sigma > 0 or xi == 0:
        return LOG_ZERO
    ls = log(sigma)
    inv_xi = 1.0 / xi
    a = 1.0 + inv_xi
    for i in range(n):
        r = xi * x[i] / sigma
        if r <= 0.0:
            return LOG_ZERO
        lr = log(r)
        acc += -ls - a * lr - exp(-lr * inv_xi)
    if not isfinite(acc):
        return LOG_ZERO
    return acc


cpdef double loglik_gp(const double[::1] x, double mu, double sigma, double xi):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double z, acc = 0.0, ls, a
    cdef bint expo = fabs(xi) < XI_ZERO_TOL
    if not sigma > 0:
        return LOG_ZERO
    ls = log(sigma)
    a = 1.0 + 1.0 / xi if not expo else 0.0
    for i in range(n):
        z = (x[i] - mu) / sigma
        if z < 0.0:
            return LOG_ZERO
        if expo:
            acc += -ls - z
        else:
            if xi * z <= -1.0:
                return LOG_ZERO
            acc += -ls - a * log1p(xi * z)
    if not isfinite(acc):
        return LOG_ZERO
    return acc
