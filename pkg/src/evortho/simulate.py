"""Replication campaigns comparing classical and orthogonal fits.

A campaign draws ``d`` datasets of size ``n`` from a two-parameter family and
fits every dataset in the classical coordinates and in each requested chart
(a paired design: all parametrisations see the same data). It reports, per
parametrisation,

* the across-replication correlation of the two estimate coordinates,
* the median absolute per-replication cross-correlation (from the inverse
  observed information),
* the convergence rate.

Replication ``r`` draws its data from ``SeedSequence(seed, spawn_key=(r,))``,
so results are independent of worker count and scheduling. Records are
sorted by ``(replication_id, parametrisation order)`` before anything is
written.
"""

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from evortho import _kernels
from evortho.distributions import ClassicalParams, Family, sample
from evortho.errors import DegenerateDataError, DomainError, EvorthoError
from evortho.fisher import fisher_information
from evortho.mle import CLASSICAL, FitConfig, estimate_correlation, fit
from evortho.reparam import OrthoChart, charts_for

__all__ = [
    "SCHEMA_VERSION",
    "CSV_COLUMNS",
    "SimulationConfig",
    "ReplicationRecord",
    "SimulationOutput",
    "default_config",
    "run_campaign",
    "across_replication_correlation",
    "resolve_workers",
]

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "replication_id",
    "family",
    "parametrisation",
    "param1_name",
    "param1_hat",
    "param2_name",
    "param2_hat",
    "cross_correlation",
    "converged",
)
INVARIANCE_TOL = 1e-3
CAMPAIGN_FAMILIES = (Family.GEV2, Family.GP2, Family.GUMBEL)

_DEFAULT_TRUE = {
    Family.GEV2: {"sigma": 1.0, "xi": 0.2},
    Family.GP2: {"sigma": 1.0, "xi": 0.2},
    Family.GUMBEL: {"mu": 1.0, "sigma": 1.0},
}


def resolve_workers(workers=None):
    """Explicit value, else ``EVT_ORTHO_WORKERS``, else the CPU count."""
    if workers is None:
        env = os.environ.get("EVT_ORTHO_WORKERS")
        workers = int(env) if env else (os.cpu_count() or 1)
    workers = int(workers)
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    return workers


@dataclass(frozen=True)
class SimulationConfig:
    family: Family
    true_params: ClassicalParams
    d: int = 1000
    n: int = 100
    seed: int = 20240601
    charts: tuple = ()
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        if family not in CAMPAIGN_FAMILIES:
            raise DomainError(f"campaigns support {[f.value for f in CAMPAIGN_FAMILIES]}, not {family}")
        if self.true_params.family is not family:
            raise DomainError("true_params belong to a different family")
        if self.schema_version != SCHEMA_VERSION:
            raise DomainError(f"unsupported schema_version {self.schema_version}")
        if int(self.d) != self.d or self.d < 2:
            raise DomainError(f"d must be an integer >= 2, got {self.d!r}")
        if int(self.n) != self.n or self.n < 5:
            raise DomainError(f"n must be an integer >= 5, got {self.n!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))
        charts = tuple(OrthoChart(c) for c in self.charts)
        valid = charts_for(family)
        for c in charts:
            if c not in valid:
                raise DomainError(f"chart {c} does not apply to {family}")
        if len(set(charts)) != len(charts):
            raise DomainError("charts must not repeat")
        object.__setattr__(self, "charts", charts)

    @property
    def parametrisations(self):
        return (CLASSICAL,) + tuple(c.value for c in self.charts)

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "family": self.family.value,
            "true_params": self.true_params.as_dict(),
            "d": self.d,
            "n": self.n,
            "seed": self.seed,
            "charts": [c.value for c in self.charts],
        }

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        unknown = set(doc) - {"schema_version", "family", "true_params", "d", "n", "seed", "charts"}
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        family = Family(doc.get("family", "gev2"))
        base = default_config(family)
        true = doc.get("true_params", base.true_params.as_dict())
        try:
            params = ClassicalParams(family, **true)
        except TypeError as exc:
            raise DomainError(f"true_params for {family} must be {family.param_names}") from exc
        return cls(
            family=family,
            true_params=params,
            d=doc.get("d", base.d),
            n=doc.get("n", base.n),
            seed=doc.get("seed", base.seed),
            charts=tuple(doc.get("charts", base.charts)),
            schema_version=doc.get("schema_version", SCHEMA_VERSION),
        )


def default_config(family, **overrides):
    """Default campaign: true values (1, 0.2) or (1, 1), every chart of the family."""
    family = Family(family)
    if family not in CAMPAIGN_FAMILIES:
        raise DomainError(f"no default campaign for {family}")
    kwargs = {
        "family": family,
        "true_params": ClassicalParams(family, **_DEFAULT_TRUE[family]),
        "charts": tuple(charts_for(family)),
    }
    kwargs.update(overrides)
    return SimulationConfig(**kwargs)


@dataclass(frozen=True)
class ReplicationRecord:
    replication_id: int
    family: Family
    parametrisation: str
    names: tuple
    estimates: tuple
    cross_correlation: float
    converged: bool
    classical: tuple

    def csv_row(self):
        return [
            str(self.replication_id),
            self.family.value,
            self.parametrisation,
            self.names[0],
            _fmt(self.estimates[0]),
            self.names[1],
            _fmt(self.estimates[1]),
            _fmt(self.cross_correlation),
            "true" if self.converged else "false",
        ]


def _fmt(v):
    return repr(float(v)) if math.isfinite(v) else "nan"


def _replication_data(cfg, r):
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(r,)))
    return sample(cfg.true_params, cfg.n, rng)


def _run_replication(cfg, r):
    x = _replication_data(cfg, r)
    out = []
    for label in cfg.parametrisations:
        model_names = (
            cfg.family.param_names if label == CLASSICAL else OrthoChart(label).names
        )
        try:
            res = fit(cfg.family, x, FitConfig(parametrisation=label))
        except EvorthoError:
            nan = math.nan
            out.append(
                ReplicationRecord(r, cfg.family, label, model_names, (nan, nan), nan, False, (nan, nan))
            )
            continue
        out.append(
            ReplicationRecord(
                replication_id=r,
                family=cfg.family,
                parametrisation=label,
                names=res.names,
                estimates=tuple(float(v) for v in res.estimate),
                cross_correlation=float(res.cross_correlation),
                converged=bool(res.converged),
                classical=tuple(float(v) for v in res.estimate_classical.as_vector()),
            )
        )
    return out


def _run_block(cfg, ids):
    records = []
    for r in ids:
        records.extend(_run_replication(cfg, r))
    return records


def across_replication_correlation(estimates) -> float:
    """Pearson correlation between the two coordinates of a list of estimate pairs."""
    a = np.asarray(estimates, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2 or a.shape[0] < 2:
        raise DegenerateDataError("need at least two estimate pairs")
    c = a - a.mean(axis=0)
    sxx = float(np.dot(c[:, 0], c[:, 0]))
    syy = float(np.dot(c[:, 1], c[:, 1]))
    if not (sxx > 0.0 and syy > 0.0):
        raise DegenerateDataError("estimate coordinates have zero variance")
    r = float(np.dot(c[:, 0], c[:, 1])) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _safe_corr(pairs):
    try:
        return across_replication_correlation(pairs)
    except DegenerateDataError:
        return None


@dataclass
class SimulationOutput:
    config: SimulationConfig
    records: list
    across_replication_correlation: dict
    across_replication_correlation_all: dict
    median_abs_cross_correlation: dict
    convergence_rate: dict
    invariance_flagged_fraction: dict
    backend: str = field(default_factory=lambda: _kernels.BACKEND)

    @property
    def per_replication(self):
        return self.records

    def records_for(self, parametrisation):
        return [r for r in self.records if r.parametrisation == parametrisation]

    def summary(self):
        cfg = self.config
        fisher = fisher_information(cfg.true_params)
        return {
            "schema_version": SCHEMA_VERSION,
            "config": cfg.to_dict(),
            "backend": self.backend,
            "asymptotic_classical_correlation": estimate_correlation(fisher),
            "parametrisations": {
                label: {
                    "across_replication_correlation": self.across_replication_correlation[label],
                    "across_replication_correlation_all_fits": self.across_replication_correlation_all[label],
                    "median_abs_cross_correlation": self.median_abs_cross_correlation[label],
                    "convergence_rate": self.convergence_rate[label],
                    "invariance_flagged_fraction": self.invariance_flagged_fraction.get(label),
                }
                for label in cfg.parametrisations
            },
        }

    def csv_text(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in self.records:
            writer.writerow(rec.csv_row())
        return buf.getvalue()

    def summary_text(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def write(self, outdir):
        """Write ``replications.csv`` and ``summary.json`` into ``outdir``."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        csv_path = outdir / "replications.csv"
        json_path = outdir / "summary.json"
        csv_path.write_text(self.csv_text(), encoding="utf-8")
        json_path.write_text(self.summary_text(), encoding="utf-8")
        return csv_path, json_path


def _summarize(cfg, records):
    by_label = {label: [] for label in cfg.parametrisations}
    for rec in records:
        by_label[rec.parametrisation].append(rec)
    corr, corr_all, med, rate = {}, {}, {}, {}
    for label, recs in by_label.items():
        ok = [r for r in recs if r.converged]
        finite = [r for r in recs if all(math.isfinite(v) for v in r.estimates)]
        corr[label] = _safe_corr([r.estimates for r in ok])
        corr_all[label] = _safe_corr([r.estimates for r in finite])
        cc = [abs(r.cross_correlation) for r in ok if math.isfinite(r.cross_correlation)]
        med[label] = float(np.median(cc)) if cc else None
        rate[label] = len(ok) / cfg.d
    classical = {r.replication_id: r for r in by_label[CLASSICAL]}
    flagged = {}
    for label in cfg.parametrisations[1:]:
        both = [
            (classical[r.replication_id], r)
            for r in by_label[label]
            if r.converged and classical[r.replication_id].converged
        ]
        bad = sum(
            1
            for c, o in both
            if max(abs(a - b) for a, b in zip(c.classical, o.classical)) > INVARIANCE_TOL
        )
        flagged[label] = bad / len(both) if both else None
    return corr, corr_all, med, rate, flagged


def run_campaign(cfg: SimulationConfig, workers=None, block_size=25) -> SimulationOutput:
    """Run all ``cfg.d`` replications, in worker processes when ``workers > 1``."""
    workers = resolve_workers(workers)
    ids = list(range(cfg.d))
    blocks = [ids[i : i + block_size] for i in range(0, len(ids), block_size)]
    if workers == 1 or len(blocks) == 1:
        parts = [_run_block(cfg, b) for b in blocks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(blocks))) as pool:
            parts = list(pool.map(_run_block, [cfg] * len(blocks), blocks))
    order = {label: k for k, label in enumerate(cfg.parametrisations)}
    records = sorted(
        (rec for part in parts for rec in part),
        key=lambda rec: (rec.replication_id, order[rec.parametrisation]),
    )
    corr, corr_all, med, rate, flagged = _summarize(cfg, records)
    return SimulationOutput(cfg, records, corr, corr_all, med, rate, flagged)
