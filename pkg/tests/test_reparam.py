import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evortho.distributions import LOG_ZERO, ClassicalParams, Family, log_likelihood
from evortho.errors import ChartDomainError, InvalidParameterError
from evortho.fisher import fisher_information
from evortho.reparam import (
    OrthoChart,
    OrthoParams,
    chart_jacobian,
    charts_for,
    from_classical,
    ortho_fisher,
    ortho_log_likelihood,
    orthogonality_residual,
    orthogonality_residuals,
    to_classical,
)

mp.mp.dps = 30
G = float(mp.euler)


def test_chart_metadata():
    assert [c.value for c in charts_for("gumbel")] == ["gumbel-loc", "gumbel-scale"]
    assert charts_for("gev3") == []
    assert OrthoChart.GEV2_SCALE.interest == "xi"
    assert OrthoChart.GP_SHAPE.interest == "sigma"
    assert OrthoChart.GP3_SCALE.names == ("mu", "nu", "xi")
    op = OrthoParams.of("gp3-scale", mu=0.0, nu=1.2, xi=0.2)
    assert op.interest == 0.2 and op.nuisance == (0.0, 1.2)
    with pytest.raises(InvalidParameterError):
        OrthoParams.of("gp-scale", nu=1.0)
    with pytest.raises(InvalidParameterError):
        OrthoParams("gp-scale", (1.0,))


class TestMapExamples:
    def test_gev2_scale(self):
        expected = float(mp.mpf("0.2") * mp.exp(mp.mpf("0.2") * (1 - mp.euler)))
        cp = to_classical(OrthoParams.of("gev2-scale", rho=1.0, xi=0.2))
        assert cp.sigma == pytest.approx(expected, rel=1e-15)
        # the rounded literal 0.2176481 agrees only to ~5e-6
        assert cp.sigma == pytest.approx(0.2176481, rel=1e-5)
        back = from_classical("gev2-scale", ClassicalParams.gev2(expected, 0.2))
        assert back["rho"] == pytest.approx(1.0, rel=1e-15)

    def test_gp_scale(self):
        assert to_classical(OrthoParams.of("gp-scale", nu=1.2, xi=0.2)).sigma == pytest.approx(1.0, rel=1e-15)
        assert from_classical("gp-scale", ClassicalParams.gp2(1.0, 0.2))["nu"] == pytest.approx(1.2)

    def test_gp_shape(self):
        assert from_classical("gp-shape", ClassicalParams.gp2(1.0, 0.2))["zeta"] == pytest.approx(0.2)

    def test_gumbel_loc(self):
        cp = to_classical(OrthoParams.of("gumbel-loc", nu=0.0, sigma=1.0))
        assert cp.mu == pytest.approx(1 - G, rel=1e-15)


class TestDomain:
    def test_gev2_sign(self):
        with pytest.raises(ChartDomainError):
            to_classical(OrthoParams.of("gev2-scale", rho=-1.0, xi=0.2))
        cp = to_classical(OrthoParams.of("gev2-scale", rho=-1.0, xi=-0.2))
        assert cp.sigma > 0

    def test_negative_sigma(self):
        with pytest.raises(ChartDomainError):
            to_classical(OrthoParams.of("gumbel-scale", mu=0.0, rho=-1.0))
        with pytest.raises(ChartDomainError):
            to_classical(OrthoParams.of("gp-scale", nu=-1.0, xi=0.2))
        with pytest.raises(ChartDomainError):
            to_classical(OrthoParams.of("gp-scale", nu=1.0, xi=-1.5))

    def test_family_mismatch(self):
        with pytest.raises(ChartDomainError):
            from_classical("gp-scale", ClassicalParams.gumbel(0, 1))


def test_loglik_examples():
    op = OrthoParams.of("gp-scale", nu=1.2, xi=0.2)
    expected = float(-(1 / mp.mpf("0.2") + 1) * mp.log(mp.mpf("1.2")))
    assert ortho_log_likelihood(op, [1.0]) == pytest.approx(expected, rel=1e-14)
    # the rounded literal -1.0939325 differs from the closed form by ~3e-6
    assert expected == pytest.approx(-1.0939325, rel=1e-5)
    gev2 = OrthoParams.of("gev2-scale", rho=1.0, xi=0.2)
    assert ortho_log_likelihood(gev2, [1.0, -2.0]) == LOG_ZERO


class TestResidualExamples:
    def test_gev2(self):
        assert abs(orthogonality_residual(OrthoParams.of("gev2-scale", rho=1.0, xi=0.2))) <= 1e-10

    def test_gumbel_loc_exact(self):
        assert abs(orthogonality_residual(OrthoParams.of("gumbel-loc", nu=0.0, sigma=1.0))) <= 1e-12

    def test_gp3_both(self):
        r = orthogonality_residuals(OrthoParams.of("gp3-scale", mu=0.0, nu=1.2, xi=0.2))
        assert r.shape == (2,)
        assert np.all(np.abs(r) <= 1e-10)


def test_identity_chain_rule_reproduces_classical_cross_terms():
    # the chain rule with J = I must give back the nonzero classical cross information
    cp = ClassicalParams.gp2(1.0, 0.2)
    info = fisher_information(cp).entries
    np.testing.assert_allclose(np.eye(2).T @ info @ np.eye(2), info)
    assert abs(info[0, 1]) > 0.5


def _classical_strategy(family, gev2_min_xi=1e-3):
    sigma = st.floats(min_value=0.1, max_value=10.0)
    mu = st.floats(min_value=-5.0, max_value=5.0)
    xi = st.floats(min_value=-0.45, max_value=1.0).filter(lambda v: abs(v) > 1e-3)
    if family is Family.GUMBEL:
        return st.builds(ClassicalParams.gumbel, mu, sigma)
    if family is Family.GEV2:
        return st.builds(ClassicalParams.gev2, sigma, xi.filter(lambda v: abs(v) >= gev2_min_xi))
    if family is Family.GP2:
        return st.builds(ClassicalParams.gp2, sigma, xi)
    return st.builds(ClassicalParams.gp3, mu, sigma, xi)


_CASES = st.sampled_from(list(OrthoChart)).flatmap(
    lambda c: st.tuples(st.just(c), _classical_strategy(c.family))
)
# gev2 information grows like xi^-4, so absolute bounds apply for |xi| >= 0.05
_ABS_CASES = st.sampled_from(list(OrthoChart)).flatmap(
    lambda c: st.tuples(st.just(c), _classical_strategy(c.family, gev2_min_xi=0.05))
)


@settings(max_examples=300, deadline=None)
@given(_CASES)
def test_round_trip(case):
    chart, cp = case
    op = from_classical(chart, cp)
    back = to_classical(op)
    np.testing.assert_allclose(back.as_vector(), cp.as_vector(), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(from_classical(chart, back).as_vector(), op.as_vector(), rtol=1e-12, atol=1e-12)


@settings(max_examples=300, deadline=None)
@given(_ABS_CASES)
def test_orthogonality_properties(case):
    chart, cp = case
    op = from_classical(chart, cp)
    assert np.all(np.abs(orthogonality_residuals(op)) <= 1e-10)
    info = ortho_fisher(op).entries
    k = chart.names.index(chart.interest)
    for j in range(len(chart.names)):
        if j != k:
            assert abs(info[k, j]) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=0.1, max_value=10.0),
    st.floats(min_value=1e-3, max_value=0.05),
    st.sampled_from([-1.0, 1.0]),
)
def test_gev2_residual_small_shape_relative_to_scale(sigma, mag, sign):
    cp = ClassicalParams.gev2(sigma, sign * mag)
    op = from_classical("gev2-scale", cp)
    scale = np.max(np.abs(fisher_information(cp).entries)) * max(1.0, np.max(np.abs(chart_jacobian(op))))
    assert abs(orthogonality_residual(op)) <= 1e-14 * scale


@settings(max_examples=100, deadline=None)
@given(_CASES)
def test_jacobian_matches_finite_differences(case):
    chart, cp = case
    op = from_classical(chart, cp)
    v = op.as_vector()
    jac = chart_jacobian(op)
    for k in range(v.size):
        h = 1e-6 * max(1.0, abs(v[k]))
        up, dn = v.copy(), v.copy()
        up[k] += h
        dn[k] -= h
        col = (to_classical(OrthoParams(chart, up)).as_vector() - to_classical(OrthoParams(chart, dn)).as_vector()) / (2 * h)
        np.testing.assert_allclose(jac[:, k], col, rtol=1e-6, atol=1e-7)


@settings(max_examples=100, deadline=None)
@given(_CASES, st.integers(min_value=0, max_value=2**32 - 1))
def test_likelihood_equality(case, seed):
    from evortho.distributions import sample

    chart, cp = case
    x = sample(cp, 20, seed)
    op = from_classical(chart, cp)
    expected = log_likelihood(cp, x)
    got = ortho_log_likelihood(op, x)
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-12) or (
        expected == LOG_ZERO and got == LOG_ZERO
    )
    assert math.isfinite(got)
