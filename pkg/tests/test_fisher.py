import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from evortho.distributions import ClassicalParams
from evortho.errors import DomainError
from evortho.fisher import (
    FisherMatrix,
    fisher_gev2,
    fisher_gev3,
    fisher_gp,
    fisher_gumbel,
    fisher_information,
    p_of_xi,
    q_of_xi,
)
from evortho.oracle import OracleConfig, fisher_mc
from evortho.specfun import gamma_deriv

mp.mp.dps = 30


def test_p_q_examples():
    assert p_of_xi(0.0) == 1.0
    assert p_of_xi(0.2) == pytest.approx(float(mp.mpf("1.44") * mp.gamma("1.4")), rel=1e-13)
    assert p_of_xi(0.2) == pytest.approx(1.277659897, abs=1e-9)
    q = mp.gamma("2.2") * (mp.digamma("1.2") + 5 + 1)
    assert q_of_xi(0.2) == pytest.approx(float(q), rel=1e-12)
    assert q_of_xi(0.2) == pytest.approx(6.2927, abs=1e-3)


def test_p_q_domains():
    with pytest.raises(DomainError):
        p_of_xi(-0.5)
    with pytest.raises(DomainError):
        q_of_xi(0.0)
    with pytest.raises(DomainError):
        q_of_xi(-1.0)


class TestGev3:
    def test_mu_mu_entry(self):
        assert fisher_gev3(0, 1, 0.2)["mu", "mu"] == pytest.approx(1.277659897, abs=1e-9)
        assert fisher_gev3(0, 2, 0.2)["mu", "mu"] == pytest.approx(fisher_gev3(0, 1, 0.2)["mu", "mu"] / 4)

    def test_against_monte_carlo_one_percent(self):
        cp = ClassicalParams.gev3(0.0, 1.0, 0.2)
        # seed fixed project-wide for MC checks; the sigma-xi entry has ~5% MC
        # relative SE at 1e6 draws, so the 1% bound is seed-dependent there
        mc = fisher_mc(cp, OracleConfig(mc_samples=10**6), seed=12345)
        np.testing.assert_allclose(fisher_gev3(0, 1, 0.2).entries, mc.info.entries, rtol=0.01)
        z = np.abs(fisher_gev3(0, 1, 0.2).entries - mc.info.entries) / mc.std_error
        assert np.all(z <= 3.0)

    def test_domain(self):
        with pytest.raises(DomainError, match="xi > -0.5"):
            fisher_gev3(0, 1, -0.5)
        with pytest.raises(DomainError, match="fisher_gumbel"):
            fisher_gev3(0, 1, 5e-5)
        with pytest.raises(DomainError):
            fisher_gev3(0, -1, 0.2)

    def test_independent_of_mu(self):
        np.testing.assert_array_equal(fisher_gev3(-3, 1.5, 0.3).entries, fisher_gev3(4, 1.5, 0.3).entries)

    def test_tends_to_gumbel(self):
        # the (mu, sigma) block moves by O(xi) away from the Gumbel matrix
        near = fisher_gev3(0, 1, 1e-4).submatrix(("mu", "sigma")).entries
        np.testing.assert_allclose(near, fisher_gumbel(0, 1).entries, rtol=1e-3)

    @pytest.mark.parametrize("xi", [1e-4, -1e-4, 3e-3, -0.02, 0.049, 0.05, -0.05, 0.08])
    def test_near_zero_against_high_precision(self, xi):
        x = mp.mpf(xi)
        g = mp.euler
        p = (1 + x) ** 2 * mp.gamma(1 + 2 * x)
        g2 = mp.gamma(2 + x)
        q = g2 * (mp.digamma(1 + x) + 1 / x + 1)
        mm, ss = p, (1 - 2 * g2 + p) / x**2
        xx = (mp.pi**2 / 6 + (1 - g + 1 / x) ** 2 - 2 * q / x + p / x**2) / x**2
        ms, mx = -(p - g2) / x, -(q - p / x) / x
        sx = -(1 - g + (1 - g2) / x - q + p / x) / x**2
        expected = np.array([[mm, ms, mx], [ms, ss, sx], [mx, sx, xx]], dtype=float)
        np.testing.assert_allclose(fisher_gev3(0, 1, xi).entries, expected, rtol=1e-9)

    def test_series_switch_is_continuous(self):
        below = fisher_gev3(0, 1, np.nextafter(0.05, 0)).entries
        at = fisher_gev3(0, 1, 0.05).entries
        np.testing.assert_allclose(below, at, rtol=1e-9)


class TestGumbel:
    def test_values(self):
        m = fisher_gumbel(0, 1).entries
        np.testing.assert_allclose(m, [[1, -0.4227843351], [-0.4227843351, 1.8236806608]], atol=1e-10)
        g = mp.euler
        assert m[1, 1] == pytest.approx(float(mp.pi**2 / 6 + g**2 - 2 * g + 1), rel=1e-15)
        np.testing.assert_array_equal(fisher_gumbel(5, 1).entries, m)
        np.testing.assert_allclose(fisher_gumbel(0, 2).entries, m / 4, rtol=1e-15)


class TestGev2:
    def test_values(self):
        m = fisher_gev2(1, 0.2).entries
        g, x = mp.euler, mp.mpf("0.2")
        xx = (mp.pi**2 / 6 + 1 - 2 * g + g**2) / x**2 + 2 * (1 - g) / x**3 + 1 / x**4
        np.testing.assert_allclose(m, [[25, -135.5696084], [-135.5696084, float(xx)]], rtol=1e-9)
        # the rounded literal 776.2884569 differs from the formula by 4.6e-7 relative
        assert m[1, 1] == pytest.approx(776.2884569, rel=1e-6)
        assert fisher_gev2(2, 0.2)["sigma", "sigma"] == pytest.approx(6.25)

    def test_negative_branch(self):
        pos, neg = fisher_gev2(1, 0.2), fisher_gev2(1, -0.2)
        assert neg["sigma", "sigma"] == pytest.approx(25.0)
        g = float(mp.euler)
        assert neg["sigma", "xi"] == pytest.approx(-(1 - g) / 0.04 + 1 / 0.008, rel=1e-13)
        assert np.sign(neg["sigma", "xi"]) != np.sign(pos["sigma", "xi"])
        assert neg.is_positive_definite()

    def test_domain(self):
        with pytest.raises(DomainError, match="fisher_gumbel"):
            fisher_gev2(1, 0.0)


class TestGp:
    def test_two_param(self):
        m = fisher_gp(1, 0.2).entries
        np.testing.assert_allclose(m, [[0.7142857143, 0.5952380952], [0.5952380952, 1.1904761905]], atol=1e-10)
        np.testing.assert_allclose(fisher_gp(1, 0.0).entries, [[1, 1], [1, 2]], rtol=1e-15)

    def test_three_param(self):
        m3 = fisher_gp(1, 0.2, three_param=True)
        assert m3["mu", "mu"] == pytest.approx(1.44 / 1.4, rel=1e-14)
        np.testing.assert_array_equal(m3.submatrix(("sigma", "xi")).entries, fisher_gp(1, 0.2).entries)
        np.testing.assert_array_equal(m3.entries, fisher_gp(1, 0.2, three_param=True, mu=7.0).entries)

    def test_domain(self):
        with pytest.raises(DomainError):
            fisher_gp(1, -0.5)


def test_dispatch():
    assert fisher_information(ClassicalParams.gp3(0, 1, 0.2)).labels == ("mu", "sigma", "xi")
    assert fisher_information(ClassicalParams.gev2(1, 0.2)).labels == ("sigma", "xi")
    assert fisher_information(ClassicalParams.gumbel(0, 1)).labels == ("mu", "sigma")


def test_fisher_matrix_type():
    m = FisherMatrix(("a", "b"), [[2.0, 1.0], [1.0, 3.0]])
    assert m["b", "a"] == 1.0
    assert m.size == 2
    assert m.scaled(2)["a", "a"] == 4.0
    assert m.to_dict() == {"labels": ["a", "b"], "matrix": [[2.0, 1.0], [1.0, 3.0]]}
    with pytest.raises(ValueError):
        m.entries[0, 0] = 5.0
    with pytest.raises(ValueError):
        FisherMatrix(("a",), [[1.0, 0.0], [0.0, 1.0]])


_GRID = [(s, x) for s in (0.5, 1.0, 2.0) for x in (-0.3, -0.1, 0.1, 0.2, 0.5)]


@pytest.mark.parametrize("sigma,xi", _GRID)
def test_positive_definite_and_symmetric(sigma, xi):
    for m in (
        fisher_gev3(0.0, sigma, xi),
        fisher_gev2(sigma, xi),
        fisher_gp(sigma, xi),
        fisher_gp(sigma, xi, three_param=True),
        fisher_gumbel(0.0, sigma),
    ):
        np.testing.assert_array_equal(m.entries, m.entries.T)
        assert np.all(np.diag(m.entries) > 0)
        assert np.min(np.linalg.eigvalsh(m.entries)) > 0


# powers of 1/sigma carried by each entry: one per sigma or mu index
_POWERS = {"mu": 1, "sigma": 1, "xi": 0}


@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=0.2, max_value=5.0),
    st.floats(min_value=0.2, max_value=5.0),
    st.floats(min_value=-0.45, max_value=1.0).filter(lambda v: abs(v) > 1e-2),
)
def test_sigma_scaling(sigma, k, xi):
    for f in (
        lambda s: fisher_gev3(0.0, s, xi),
        lambda s: fisher_gev2(s, xi),
        lambda s: fisher_gp(s, xi, three_param=True),
        lambda s: fisher_gumbel(0.0, s),
    ):
        a, b = f(sigma), f(k * sigma)
        for i, li in enumerate(a.labels):
            for j, lj in enumerate(a.labels):
                power = _POWERS[li] + _POWERS[lj]
                assert b.entries[i, j] == pytest.approx(a.entries[i, j] / k**power, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_gamma_moment_identity(n, k):
    # E[Y^k (log Y)^n] for Y ~ Exp(1) equals Gamma^(n)(k + 1)
    def integrand(y):
        return y**k * math.log(y) ** n * math.exp(-y)

    val = sum(integrate.quad(integrand, a, b, epsabs=1e-13, limit=200)[0] for a, b in ((0, 1), (1, np.inf)))
    assert val == pytest.approx(gamma_deriv(n, k + 1.0), rel=1e-9, abs=1e-12)
