"""Time the compiled and numpy log-likelihood kernels, plus one full fit.

Usage: python3 benchmarks/bench_kernels.py [--n 100] [--repeat 2000]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from evortho import _kernels
from evortho.distributions import ClassicalParams, sample

CASES = {
    "gumbel": (ClassicalParams.gumbel(1.0, 1.0), lambda k, x: k.loglik_gumbel(x, 1.0, 1.0)),
    "gev3": (ClassicalParams.gev3(0.0, 1.0, 0.2), lambda k, x: k.loglik_gev3(x, 0.0, 1.0, 0.2)),
    "gev2": (ClassicalParams.gev2(1.0, 0.2), lambda k, x: k.loglik_gev2(x, 1.0, 0.2)),
    "gp2": (ClassicalParams.gp2(1.0, 0.2), lambda k, x: k.loglik_gp(x, 0.0, 1.0, 0.2)),
}


def bench_kernels(n, repeat):
    rows = []
    for name, (cp, call) in CASES.items():
        x = _kernels.as_data(sample(cp, n, np.random.default_rng(0)))
        row = {"kernel": name}
        for backend in _kernels.available_backends():
            k = _kernels.get_backend(backend)
            t = min(timeit.repeat(lambda: call(k, x), number=repeat, repeat=3)) / repeat
            row[backend] = t
        rows.append(row)
    return rows


def bench_fit(n):
    code = (
        "import timeit, numpy as np;"
        "from evortho.distributions import ClassicalParams, sample;"
        "from evortho.mle import fit, FitConfig;"
        f"x = sample(ClassicalParams.gev2(1.0, 0.2), {n}, np.random.default_rng(1));"
        "print(min(timeit.repeat(lambda: fit('gev2', x), number=20, repeat=3)) / 20)"
    )
    out = {}
    for backend in _kernels.available_backends():
        env = dict(os.environ, EVT_ORTHO_BACKEND=backend)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out[backend] = float(res.stdout)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    backends = _kernels.available_backends()
    print(f"log-likelihood kernels, n = {args.n} (seconds per call)")
    print(f"{'kernel':<8}" + "".join(f"{b:>12}" for b in backends) + ("    speedup" if len(backends) > 1 else ""))
    for row in bench_kernels(args.n, args.repeat):
        line = f"{row['kernel']:<8}" + "".join(f"{row[b]:>12.3e}" for b in backends)
        if len(backends) > 1:
            line += f"{row['python'] / row['cython']:>10.1f}x"
        print(line)
    fits = bench_fit(args.n)
    print(f"\nfull gev2 fit, n = {args.n} (seconds per fit)")
    for b, t in fits.items():
        print(f"{b:<8}{t:>12.3e}")


if __name__ == "__main__":
    main()
