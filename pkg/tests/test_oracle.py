import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evortho.distributions import ClassicalParams, sample
from evortho.errors import DomainError, NonConvergenceError
from evortho.fisher import fisher_information
from evortho.oracle import (
    OracleConfig,
    fd_scores,
    fisher_mc,
    fisher_quad,
    gev3_pde_residual_scan,
    scores,
)

SEED = 12345


class TestConfig:
    def test_defaults(self):
        cfg = OracleConfig()
        assert (cfg.mc_samples, cfg.quadrature_rel_tol, cfg.fd_step) == (10**6, 1e-8, 1e-5)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mc_samples": 9999},
            {"mc_samples": 1.5e4 + 0.5},
            {"fd_step": 1e-9},
            {"fd_step": 1e-2},
            {"quadrature_rel_tol": 0.0},
            {"quadrature_rel_tol": 1e-15},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            OracleConfig(**kwargs)

    def test_float_count_accepted(self):
        assert OracleConfig(mc_samples=1e4).mc_samples == 10000


@pytest.mark.parametrize(
    "params,entry,expected",
    [
        (ClassicalParams.gumbel(0.0, 1.0), ("mu", "mu"), 1.0),
        (ClassicalParams.gev2(1.0, 0.2), ("sigma", "sigma"), 25.0),
        (ClassicalParams.gp2(1.0, 0.2), ("xi", "xi"), 1.1904761905),
    ],
)
def test_mc_examples(params, entry, expected):
    mc = fisher_mc(params, OracleConfig(mc_samples=10**6), seed=SEED)
    i, j = (params.names.index(e) for e in entry)
    assert abs(mc.info.entries[i, j] - expected) <= 3 * mc.std_error[i, j]


@pytest.mark.parametrize(
    "params",
    [ClassicalParams.gumbel(0.0, 1.0), ClassicalParams.gev2(1.0, -0.2), ClassicalParams.gp2(1.0, 0.2)],
)
def test_quad_examples(params):
    np.testing.assert_allclose(fisher_quad(params).entries, fisher_information(params).entries, rtol=1e-6)


@pytest.mark.parametrize(
    "params",
    [
        ClassicalParams.gumbel(0.5, 2.0),
        ClassicalParams.gev3(0.0, 1.0, 0.2),
        ClassicalParams.gev3(0.0, 0.5, -0.1),
        ClassicalParams.gev2(2.0, 0.5),
        ClassicalParams.gp2(1.0, -0.1),
        ClassicalParams.gp3(0.0, 1.0, 0.2),
    ],
)
def test_mc_and_quad_agree(params):
    mc = fisher_mc(params, OracleConfig(mc_samples=2 * 10**5), seed=SEED)
    quad = fisher_quad(params)
    assert np.all(np.abs(mc.info.entries - quad.entries) <= 3 * mc.std_error)


def test_mc_independent_of_worker_count():
    p = ClassicalParams.gev3(0.0, 1.0, 0.1)
    cfg = OracleConfig(mc_samples=3 * 10**5 + 17)
    a = fisher_mc(p, cfg, seed=7, workers=1)
    b = fisher_mc(p, cfg, seed=7, workers=3)
    np.testing.assert_array_equal(a.info.entries, b.info.entries)
    np.testing.assert_array_equal(a.std_error, b.std_error)
    assert a.n_samples == cfg.mc_samples
    c = fisher_mc(p, cfg, seed=8, workers=1)
    assert not np.array_equal(a.info.entries, c.info.entries)


def test_quad_non_convergence():
    with pytest.raises(NonConvergenceError):
        fisher_quad(ClassicalParams.gev3(0.0, 1.0, 0.2), OracleConfig(quadrature_rel_tol=2e-14))


_PARAMS = st.one_of(
    st.builds(
        ClassicalParams.gev3,
        st.floats(-3, 3),
        st.floats(0.3, 5),
        st.floats(-0.4, 0.8).filter(lambda v: abs(v) > 0.01),
    ),
    st.builds(ClassicalParams.gumbel, st.floats(-3, 3), st.floats(0.3, 5)),
    st.builds(ClassicalParams.gev2, st.floats(0.3, 5), st.floats(-0.4, 0.8).filter(lambda v: abs(v) > 0.01)),
    st.builds(ClassicalParams.gp2, st.floats(0.3, 5), st.floats(-0.4, 0.8).filter(lambda v: abs(v) > 0.01)),
    st.builds(
        ClassicalParams.gp3,
        st.floats(-3, 3),
        st.floats(0.3, 5),
        st.floats(-0.4, 0.8).filter(lambda v: abs(v) > 0.01),
    ),
)


@settings(max_examples=150, deadline=None)
@given(_PARAMS, st.integers(0, 2**32 - 1))
def test_fd_scores_match_analytic(params, seed):
    x = sample(params, 8, seed)
    # keep the points away from a finite endpoint, where scores blow up
    x = x[np.abs(fd_scores(params, x)).max(axis=0) < 1e3] if x.size else x
    np.testing.assert_allclose(fd_scores(params, x), scores(params, x), rtol=0, atol=1e-6)


class TestPdeScan:
    def test_identity_chart_leaves_cross_information(self):
        (rec,) = gev3_pde_residual_scan([(0.0, 1.0, 0.2)])
        assert abs(rec["implied_dsigma_dxi"]) > 0.1 or abs(rec["implied_dmu_dxi"]) > 0.1
        assert abs(rec["identity_cross_info"]["xi_mu"]) > 0.1
        assert abs(rec["sigma_only_chart_residual"]) > 0.1
        assert abs(rec["mu_only_chart_residual"]) > 0.01

    def test_gp3_location_derivative_vanishes(self):
        (rec,) = gev3_pde_residual_scan([(0.0, 1.0, 0.2)], family="gp3")
        assert abs(rec["implied_dmu_dxi"]) <= 1e-12
        # the scale solution reproduces d/dxi of sigma = nu / (1 + xi) at fixed nu
        assert rec["implied_dsigma_dxi"] == pytest.approx(-1.0 / 1.2, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            gev3_pde_residual_scan([(0.0, 1.0, 0.2), (0.0, 1.0, -0.5)])
        with pytest.raises(DomainError):
            gev3_pde_residual_scan([(0.0, 1.0, 0.2)], family="gumbel")
