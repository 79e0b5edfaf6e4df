"""Independent numerical checks of the closed-form information matrices.

Three engines, none of which uses the closed forms in :mod:`evortho.fisher`:

* :func:`fisher_mc`: Monte Carlo average of score outer products, with
  per-entry standard errors;
* :func:`fisher_quad`: adaptive quadrature of the same products after the
  probability-integral transform ``u = F(x)``;
* :func:`gev3_pde_residual_scan`: evaluates the coupled equations an
  orthogonal three-parameter chart would have to satisfy.

Scores are analytic derivatives of the log-density for every family; the
finite-difference variant :func:`fd_scores` exists to cross-check them.
"""

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

from evortho.distributions import LOG_ZERO, ClassicalParams, Family, log_density, quantile, upper_quantile
from evortho.errors import DomainError, NonConvergenceError
from evortho.fisher import XI_MIN, FisherMatrix, fisher_gev3, fisher_gp

__all__ = [
    "OracleConfig",
    "MonteCarloFisher",
    "scores",
    "fd_scores",
    "fisher_mc",
    "fisher_quad",
    "gev3_pde_residual_scan",
]

MC_CHUNK = 1 << 16
# QUADPACK rejects relative tolerances below 50 machine epsilons
QUAD_MIN_REL_TOL = 50 * np.finfo(float).eps


@dataclass(frozen=True)
class OracleConfig:
    mc_samples: int = 10**6
    quadrature_rel_tol: float = 1e-8
    fd_step: float = 1e-5

    def __post_init__(self):
        if int(self.mc_samples) != self.mc_samples or self.mc_samples < 10**4:
            raise DomainError(f"mc_samples must be an integer >= 1e4, got {self.mc_samples!r}")
        object.__setattr__(self, "mc_samples", int(self.mc_samples))
        if not self.quadrature_rel_tol >= QUAD_MIN_REL_TOL:
            raise DomainError(f"quadrature_rel_tol must be >= {QUAD_MIN_REL_TOL:.3g}")
        if not 1e-9 < self.fd_step < 1e-2:
            raise DomainError(f"fd_step must lie in (1e-9, 1e-2), got {self.fd_step!r}")


class MonteCarloFisher(NamedTuple):
    info: FisherMatrix
    std_error: np.ndarray
    n_samples: int


def scores(params: ClassicalParams, x) -> np.ndarray:
    """Analytic score vectors, shape ``(len(params.names), len(x))``.

    Points off the support produce NaN.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = _raw_scores(params, x)
    off = np.asarray(log_density(params, x)) <= LOG_ZERO
    s[:, off] = np.nan
    return s


def _raw_scores(params, x):
    f = params.family
    sigma = params.sigma
    with np.errstate(all="ignore"):
        if f is Family.GUMBEL:
            z = (x - params.mu) / sigma
            a = 1.0 - np.exp(-z)
            return np.array([a / sigma, z * a / sigma - 1.0 / sigma])
        if f is Family.GEV2:
            xi = params.xi
            lr = np.log(xi * x / sigma)
            b = 1.0 - np.exp(-lr / xi)
            return np.array([b / (xi * sigma), (lr - 1.0) * b / xi**2 - 1.0 / xi])
        xi = params.xi
        z = (x - params.location) / sigma
        lw = np.log1p(xi * z)
        w = 1.0 + xi * z
        if f is Family.GEV3:
            t = np.exp(-lw / xi)
            s_mu = (1.0 + xi - t) / (sigma * w)
            s_sigma = -1.0 / sigma + z * s_mu
            s_xi = (1.0 - t) * lw / xi**2 - z * (1.0 + xi - t) / (xi * w)
            return np.array([s_mu, s_sigma, s_xi])
        s_mu = (1.0 + xi) / (sigma * w)
        s_sigma = -1.0 / sigma + z * s_mu
        s_xi = lw / xi**2 - (1.0 + 1.0 / xi) * z / w
        if f is Family.GP2:
            return np.array([s_sigma, s_xi])
        return np.array([s_mu, s_sigma, s_xi])


def fd_scores(params: ClassicalParams, x, step=1e-5) -> np.ndarray:
    """Scores by central differences of the log-density, Richardson-extrapolated.

    The step for each parameter is ``step * max(1, |theta|)``; the estimate
    combines steps ``h`` and ``h/2`` as ``(4 D(h/2) - D(h)) / 3``.
    """
    x = np.asarray(x, dtype=float)
    theta = params.as_vector()
    out = np.empty((theta.size, x.size))

    def lp(vec):
        try:
            p = ClassicalParams.from_vector(params.family, vec)
        except DomainError:
            return np.full(x.size, np.nan)
        v = np.asarray(log_density(p, x), dtype=float).reshape(-1)
        return np.where(v <= LOG_ZERO, np.nan, v)

    for k in range(theta.size):
        h = step * max(1.0, abs(theta[k]))

        def central(hk):
            up = theta.copy()
            dn = theta.copy()
            up[k] += hk
            dn[k] -= hk
            return (lp(up) - lp(dn)) / (2.0 * hk)

        out[k] = (4.0 * central(h / 2.0) - central(h)) / 3.0
    return out


def _mc_chunk(params, seed, index, size):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    u = rng.random(size)
    u[u == 0.0] = np.finfo(float).tiny
    s = scores(params, quantile(params, u))
    prod = s[:, None, :] * s[None, :, :]
    return prod.sum(axis=2), (prod * prod).sum(axis=2)


def _resolve_workers(workers):
    if workers is None:
        env = os.environ.get("EVT_ORTHO_WORKERS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def fisher_mc(params: ClassicalParams, cfg=None, seed=0, workers=None) -> MonteCarloFisher:
    """Monte Carlo information estimate with per-entry standard errors.

    Samples are drawn in fixed chunks of ``MC_CHUNK`` draws; chunk ``i`` uses
    the stream ``SeedSequence(seed, spawn_key=(i,))`` and chunk sums are
    reduced in chunk order, so the result depends on ``seed`` only, never on
    ``workers``.
    """
    cfg = cfg or OracleConfig()
    n = cfg.mc_samples
    sizes = [MC_CHUNK] * (n // MC_CHUNK)
    if n % MC_CHUNK:
        sizes.append(n % MC_CHUNK)
    jobs = [(params, seed, i, size) for i, size in enumerate(sizes)]
    workers = min(_resolve_workers(workers), len(jobs))
    if workers == 1:
        parts = [_mc_chunk(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _mc_chunk(*job), jobs))
    k = len(params.names)
    total = np.zeros((k, k))
    total_sq = np.zeros((k, k))
    for s, sq in parts:
        total += s
        total_sq += sq
    mean = total / n
    var = (total_sq / n - mean * mean) * n / (n - 1)
    se = np.sqrt(np.maximum(var, 0.0) / n)
    return MonteCarloFisher(FisherMatrix(params.names, mean), se, n)


def fisher_quad(params: ClassicalParams, cfg=None) -> FisherMatrix:
    """Information by adaptive quadrature over ``u = F(x)`` in (0, 1).

    Raises :class:`~evortho.errors.NonConvergenceError` if QUADPACK cannot
    reach ``cfg.quadrature_rel_tol``.
    """
    cfg = cfg or OracleConfig()
    k = len(params.names)
    m = np.zeros((k, k))

    # lower half in u, upper half in v = 1 - u so both endpoints resolve fully
    def lower(u, i, j):
        s = _raw_scores(params, np.array([quantile(params, u)]))
        return float(s[i, 0] * s[j, 0])

    def upper(v, i, j):
        s = _raw_scores(params, np.array([upper_quantile(params, v)]))
        return float(s[i, 0] * s[j, 0])

    for i in range(k):
        for j in range(i, k):
            total = 0.0
            for integrand in (lower, upper):
                with warnings.catch_warnings():
                    warnings.simplefilter("error", integrate.IntegrationWarning)
                    try:
                        val, _ = integrate.quad(
                            integrand,
                            0.0,
                            0.5,
                            args=(i, j),
                            epsabs=0.0,
                            epsrel=cfg.quadrature_rel_tol,
                            limit=1000,
                        )
                    except integrate.IntegrationWarning as exc:
                        raise NonConvergenceError(
                            f"quadrature for entry ({params.names[i]}, {params.names[j]}) "
                            f"of {params.family} did not converge: {exc}"
                        ) from exc
                total += val
            m[i, j] = m[j, i] = total
    return FisherMatrix(params.names, m)


def gev3_pde_residual_scan(grid, family="gev3"):
    """Evaluate the coupled orthogonality equations on a grid of (mu, sigma, xi).

    A three-parameter chart keeping xi as interest parameter must satisfy,
    at each point, the 2x2 linear system

        i_mm dmu + i_ms dsigma = -i_xm
        i_ms dmu + i_ss dsigma = -i_xs

    for the xi-derivatives ``dmu``, ``dsigma`` of the transformed location and
    scale. For each grid point this returns a record with the implied
    derivatives, the cross information of the untransformed (identity) chart,
    and the residual left in the other equation by the two single-parameter
    charts that solve one equation while holding the other parameter fixed.

    ``family="gp3"`` runs the same algebra on the three-parameter GP, where
    the implied ``dmu`` is exactly zero.
    """
    family = Family(family)
    if family not in (Family.GEV3, Family.GP3):
        raise DomainError("the residual scan applies to gev3 or gp3")
    records = []
    for mu, sigma, xi in grid:
        if not xi > XI_MIN:
            raise DomainError(f"grid point xi={xi!r} is outside xi > {XI_MIN}")
        if family is Family.GEV3:
            info = fisher_gev3(mu, sigma, xi)
        else:
            info = fisher_gp(sigma, xi, three_param=True, mu=mu)
        i_mm, i_ss, i_ms = info["mu", "mu"], info["sigma", "sigma"], info["mu", "sigma"]
        i_xm, i_xs = info["xi", "mu"], info["xi", "sigma"]
        det = i_ms * i_ms - i_ss * i_mm
        d_sigma = (i_xs * i_mm - i_xm * i_ms) / det
        d_mu = (i_xm * i_ss - i_xs * i_ms) / det
        sigma_only = i_ms * (-i_xs / i_ss) + i_xm
        mu_only = i_ms * (-i_xm / i_mm) + i_xs
        records.append(
            {
                "family": family.value,
                "mu": float(mu),
                "sigma": float(sigma),
                "xi": float(xi),
                "implied_dmu_dxi": d_mu,
                "implied_dsigma_dxi": d_sigma,
                "identity_cross_info": {"xi_mu": i_xm, "xi_sigma": i_xs},
                "sigma_only_chart_residual": sigma_only,
                "mu_only_chart_residual": mu_only,
            }
        )
    return records

