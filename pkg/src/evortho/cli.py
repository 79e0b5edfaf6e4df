"""Command-line interface: ``evortho <subcommand> [flags]``.

Subcommands: fisher, transform, fit, verify, simulate, plot. The resolved
configuration of every run is echoed to stderr as one JSON line. Exit codes:
0 success, 1 verification failure, 2 usage or domain error.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from evortho import _kernels
from evortho.distributions import ClassicalParams, Family
from evortho.errors import EvorthoError
from evortho.fisher import fisher_information
from evortho.mle import CLASSICAL, FitConfig, fit
from evortho.oracle import OracleConfig, fisher_mc, fisher_quad
from evortho.reparam import (
    OrthoChart,
    OrthoParams,
    chart_jacobian,
    from_classical,
    ortho_fisher,
    orthogonality_residuals,
    to_classical,
)
from evortho.report import plot_campaign
from evortho.simulate import SimulationConfig, default_config, resolve_workers, run_campaign

__all__ = ["main", "build_parser", "DEFAULT_SIGMAS", "DEFAULT_XIS"]

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

COORDINATES = ("mu", "sigma", "xi", "rho", "nu", "zeta")
DEFAULT_SIGMAS = (0.5, 1.0, 2.0)
DEFAULT_XIS = (-0.3, -0.1, 0.1, 0.2, 0.5)
QUAD_REL_TOL = 1e-6
MC_SE_MULTIPLE = 3.0


class UsageError(Exception):
    pass


def _count(text):
    """Parse a positive count, accepting float spellings such as ``1e4``."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v == int(v) and v >= 1):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(v)


def _add_coordinates(p):
    for name in COORDINATES:
        p.add_argument(f"--{name}", type=float, help=f"value of {name}")


def _add_workers(p):
    p.add_argument(
        "--workers",
        type=_count,
        help="parallel workers (default: $EVT_ORTHO_WORKERS, else CPU count); never changes results",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="evortho",
        description="Fisher information, orthogonal charts and MLE for extreme-value families.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fisher", help="print a per-observation Fisher matrix as JSON")
    p.add_argument("--family", choices=[f.value for f in Family])
    p.add_argument("--chart", choices=[c.value for c in OrthoChart], help="evaluate in chart coordinates")
    _add_coordinates(p)

    p = sub.add_parser("transform", help="map a point between classical and chart coordinates")
    p.add_argument("--chart", required=True, choices=[c.value for c in OrthoChart])
    p.add_argument(
        "--direction",
        choices=["to-chart", "to-classical"],
        default="to-chart",
        help="to-chart reads classical flags, to-classical reads chart flags",
    )
    _add_coordinates(p)

    p = sub.add_parser("fit", help="maximum-likelihood fit of newline-delimited data")
    p.add_argument("--family", required=True, choices=[f.value for f in Family])
    p.add_argument("--chart", choices=[c.value for c in OrthoChart], help="fit in chart coordinates")
    p.add_argument("--data", default="-", help="data file, or - for stdin (default)")
    p.add_argument("--max-iterations", type=_count, default=500)
    p.add_argument("--tol", type=float, default=1e-8, help="convergence tolerance")
    p.add_argument("--restarts", type=_count, default=3)

    p = sub.add_parser("verify", help="check closed-form matrices against quadrature and Monte Carlo")
    p.add_argument(
        "--families", nargs="+", choices=[f.value for f in Family], default=[f.value for f in Family]
    )
    p.add_argument("--sigmas", nargs="+", type=float, default=list(DEFAULT_SIGMAS))
    p.add_argument("--xis", nargs="+", type=float, default=list(DEFAULT_XIS))
    p.add_argument("--mc-samples", type=_count, default=10**6, help="Monte Carlo draws (e.g. 1e6)")
    p.add_argument("--no-mc", action="store_true", help="skip the Monte Carlo oracle")
    p.add_argument("--quad-tol", type=float, default=1e-8, help="quadrature relative tolerance")
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--output", help="also write the JSON report here")
    _add_workers(p)

    p = sub.add_parser("simulate", help="run a replication campaign")
    p.add_argument("--config", help="JSON campaign config; flags override its values")
    p.add_argument("--family", choices=["gev2", "gp2", "gumbel"])
    p.add_argument("--d", type=_count, help="number of replications")
    p.add_argument("--n", type=_count, help="sample size per replication")
    p.add_argument("--seed", type=int)
    p.add_argument("--charts", nargs="+", choices=[c.value for c in OrthoChart])
    p.add_argument("--mu", type=float, help="true mu (gumbel)")
    p.add_argument("--sigma", type=float, help="true sigma")
    p.add_argument("--xi", type=float, help="true xi (gev2, gp2)")
    p.add_argument("--out", default="campaign", help="output directory (default: ./campaign)")
    _add_workers(p)

    p = sub.add_parser("plot", help="render violin plots from campaign outputs")
    p.add_argument("campaigns", nargs="+", help="campaign directories holding replications.csv and summary.json")
    p.add_argument("--out-dir", help="where to write figures (default: each campaign directory)")
    return parser


def _echo(config):
    print("config: " + json.dumps(config, sort_keys=True), file=sys.stderr)


def _emit(doc):
    print(json.dumps(doc, indent=2, sort_keys=True))


def _coords(args, names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"missing --{' --'.join(missing)}")
    extra = [n for n in COORDINATES if n not in names and getattr(args, n) is not None]
    if extra:
        raise UsageError(f"unexpected --{' --'.join(extra)} (expected {', '.join(names)})")
    return {n: getattr(args, n) for n in names}


def cmd_fisher(args):
    if args.chart:
        chart = OrthoChart(args.chart)
        if args.family and Family(args.family) is not chart.family:
            raise UsageError(f"chart {chart} belongs to {chart.family}")
        op = OrthoParams.of(chart, **_coords(args, chart.names))
        _echo({"command": "fisher", "chart": chart.value, "point": op.as_dict()})
        info = ortho_fisher(op)
    else:
        if not args.family:
            raise UsageError("give --family or --chart")
        family = Family(args.family)
        cp = ClassicalParams(family, **_coords(args, family.param_names))
        _echo({"command": "fisher", "family": family.value, "point": cp.as_dict()})
        info = fisher_information(cp)
    _emit(info.to_dict())


def cmd_transform(args):
    chart = OrthoChart(args.chart)
    if args.direction == "to-chart":
        cp = ClassicalParams(chart.family, **_coords(args, chart.family.param_names))
        op = from_classical(chart, cp)
    else:
        op = OrthoParams.of(chart, **_coords(args, chart.names))
        cp = to_classical(op)
    _echo({"command": "transform", "chart": chart.value, "direction": args.direction})
    _emit(
        {
            "chart": chart.value,
            "interest": chart.interest,
            "classical": cp.as_dict(),
            "chart_coordinates": op.as_dict(),
            "jacobian": chart_jacobian(op).tolist(),
            "orthogonality_residuals": orthogonality_residuals(op).tolist(),
        }
    )


def _read_data(source):
    text = sys.stdin.read() if source == "-" else Path(source).read_text(encoding="utf-8")
    values = []
    for k, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise UsageError(f"line {k} of the data is not a number: {line!r}") from None
    return np.array(values)


def cmd_fit(args):
    if args.chart and OrthoChart(args.chart).family is not Family(args.family):
        raise UsageError(f"chart {args.chart} does not apply to {args.family}")
    cfg = FitConfig(
        parametrisation=args.chart or CLASSICAL,
        max_iterations=args.max_iterations,
        convergence_tol=args.tol,
        restarts=args.restarts,
    )
    data = _read_data(args.data)
    _echo(
        {
            "command": "fit",
            "family": args.family,
            "parametrisation": args.chart or CLASSICAL,
            "max_iterations": cfg.max_iterations,
            "convergence_tol": cfg.convergence_tol,
            "restarts": cfg.restarts,
            "n_obs": int(data.size),
            "backend": _kernels.BACKEND,
        }
    )
    _emit(fit(args.family, data, cfg).to_dict())


def verification_grid(families, sigmas, xis):
    """Classical parameter points of the verification grid (``mu = 0`` where present)."""
    points = []
    for fam in families:
        fam = Family(fam)
        for sigma in sigmas:
            if fam is Family.GUMBEL:
                points.append(ClassicalParams.gumbel(0.0, sigma))
                continue
            for xi in xis:
                if fam is Family.GEV2:
                    points.append(ClassicalParams.gev2(sigma, xi))
                elif fam is Family.GP2:
                    points.append(ClassicalParams.gp2(sigma, xi))
                else:
                    points.append(ClassicalParams(fam, sigma, mu=0.0, xi=xi))
    return points


def verify_point(cp, oracle_cfg, use_mc=True, seed=12345, workers=1):
    """Deviation record of one grid point: worst relative quadrature error and worst MC z-score."""
    analytic = fisher_information(cp).entries
    quad = fisher_quad(cp, oracle_cfg).entries
    scale = np.max(np.abs(quad))
    denom = np.where(np.abs(quad) > 1e-12 * scale, np.abs(quad), scale)
    rel = float(np.max(np.abs(analytic - quad) / denom))
    rec = {
        "family": cp.family.value,
        "params": cp.as_dict(),
        "quad_max_rel_dev": rel,
        "quad_ok": rel <= QUAD_REL_TOL,
    }
    ok = rec["quad_ok"]
    if use_mc:
        mc = fisher_mc(cp, oracle_cfg, seed=seed, workers=workers)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.abs(analytic - mc.info.entries) / mc.std_error
        zmax = float(np.max(z))
        rec["mc_samples"] = mc.n_samples
        rec["mc_max_abs_z"] = zmax
        rec["mc_ok"] = bool(zmax <= MC_SE_MULTIPLE)
        ok = ok and rec["mc_ok"]
    rec["ok"] = bool(ok)
    return rec


def cmd_verify(args):
    oracle_cfg = OracleConfig(mc_samples=args.mc_samples, quadrature_rel_tol=args.quad_tol)
    workers = resolve_workers(args.workers)
    _echo(
        {
            "command": "verify",
            "families": args.families,
            "sigmas": args.sigmas,
            "xis": args.xis,
            "mc_samples": None if args.no_mc else oracle_cfg.mc_samples,
            "quadrature_rel_tol": oracle_cfg.quadrature_rel_tol,
            "seed": args.seed,
            "workers": workers,
            "quad_tolerance": QUAD_REL_TOL,
            "mc_tolerance_se": MC_SE_MULTIPLE,
        }
    )
    records = []
    for cp in verification_grid(args.families, args.sigmas, args.xis):
        records.append(verify_point(cp, oracle_cfg, use_mc=not args.no_mc, seed=args.seed, workers=workers))
    failed = [r for r in records if not r["ok"]]
    report = {
        "n_points": len(records),
        "n_failed": len(failed),
        "worst_quad_rel_dev": max(r["quad_max_rel_dev"] for r in records),
        "worst_mc_abs_z": None if args.no_mc else max(r["mc_max_abs_z"] for r in records),
        "points": records,
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK if not failed else EXIT_VERIFY_FAILED


def _simulation_config(args):
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
    if args.family:
        if "family" in doc and doc["family"] != args.family:
            doc.pop("true_params", None)
            doc.pop("charts", None)
        doc["family"] = args.family
    for key in ("d", "n", "seed"):
        if getattr(args, key) is not None:
            doc[key] = getattr(args, key)
    if args.charts:
        doc["charts"] = args.charts
    family = Family(doc.get("family", "gev2"))
    true = dict(doc.get("true_params", default_config(family).true_params.as_dict()))
    for name in ("mu", "sigma", "xi"):
        value = getattr(args, name)
        if value is not None:
            if name not in family.param_names:
                raise UsageError(f"{family} has no parameter {name}")
            true[name] = value
    doc["true_params"] = true
    return SimulationConfig.from_dict(doc)


def cmd_simulate(args):
    cfg = _simulation_config(args)
    workers = resolve_workers(args.workers)
    _echo({"command": "simulate", **cfg.to_dict(), "workers": workers, "out": args.out})
    out = run_campaign(cfg, workers=workers)
    csv_path, json_path = out.write(args.out)
    print(f"{'parametrisation':<16} {'across-corr':>12} {'median|cc|':>11} {'converged':>10}")
    for label in cfg.parametrisations:
        corr = out.across_replication_correlation[label]
        med = out.median_abs_cross_correlation[label]
        print(
            f"{label:<16} {('n/a' if corr is None else f'{corr:+.4f}'):>12} "
            f"{('n/a' if med is None else f'{med:.4f}'):>11} {out.convergence_rate[label]:>10.3f}"
        )
        if out.convergence_rate[label] < 1.0:
            failed = round((1.0 - out.convergence_rate[label]) * cfg.d)
            print(f"  note: {failed} of {cfg.d} {label} fits did not converge", file=sys.stderr)
    print(f"wrote {csv_path} and {json_path}")


def cmd_plot(args):
    _echo({"command": "plot", "campaigns": args.campaigns, "out_dir": args.out_dir})
    for d in args.campaigns:
        d = Path(d)
        csv_path, json_path = d / "replications.csv", d / "summary.json"
        if not csv_path.is_file() or not json_path.is_file():
            raise UsageError(f"{d} does not hold replications.csv and summary.json")
        family = json.loads(json_path.read_text(encoding="utf-8"))["config"]["family"]
        out_dir = Path(args.out_dir) if args.out_dir else d
        out_dir.mkdir(parents=True, exist_ok=True)
        path = plot_campaign(csv_path, json_path, out_dir / f"violins_{family}.svg")
        print(f"wrote {path}")


_COMMANDS = {
    "fisher": cmd_fisher,
    "transform": cmd_transform,
    "fit": cmd_fit,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "plot": cmd_plot,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        code = _COMMANDS[args.command](args)
    except (UsageError, EvorthoError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
