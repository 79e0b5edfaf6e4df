"""Regenerate the near-zero Taylor coefficients of the GEV information entries.

The closed-form GEV entries cancel catastrophically as xi -> 0 (relative
error ~ eps / xi^4 for the xi-xi entry). Each entry, with sigma = 1, is
analytic on |xi| < 1/2, so its Taylor coefficients at 0 are obtained here
by the trapezoid rule for the Cauchy integral on |xi| = 1/4, in 60-digit
arithmetic. Prints a Python literal to paste into ``evortho/fisher.py``.

Usage: python3 scripts/gen_gev3_series.py
"""

import mpmath as mp

mp.mp.dps = 60
ORDER = 20
NODES = 128
RADIUS = mp.mpf("0.25")
NAMES = ("mu_mu", "mu_sigma", "mu_xi", "sigma_sigma", "sigma_xi", "xi_xi")


def entries(x):
    g = mp.euler
    p = (1 + x) ** 2 * mp.gamma(1 + 2 * x)
    g2 = mp.gamma(2 + x)
    q = g2 * (mp.digamma(1 + x) + 1 / x + 1)
    return (
        p,
        -(p - g2) / x,
        -(q - p / x) / x,
        (1 - 2 * g2 + p) / x**2,
        -(1 - g + (1 - g2) / x - q + p / x) / x**2,
        (mp.pi**2 / 6 + (1 - g + 1 / x) ** 2 - 2 * q / x + p / x**2) / x**2,
    )


def main():
    pts = [RADIUS * mp.exp(2j * mp.pi * (k + 0.5) / NODES) for k in range(NODES)]
    vals = [entries(z) for z in pts]
    print("_GEV3_SERIES = {")
    for e, name in enumerate(NAMES):
        coefs = [mp.re(sum(v[e] * z ** (-n) for v, z in zip(vals, pts)) / NODES) for n in range(ORDER)]
        body = ", ".join(repr(float(c)) for c in coefs)
        print(f'    "{name}": ({body}),')
    print("}")


if __name__ == "__main__":
    main()
