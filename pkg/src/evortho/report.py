"""Violin plots of per-replication cross-correlations, written as plain SVG.

Densities come from a Gaussian kernel estimate on a fixed grid of 256
points over [-1, 1]. Each grid value is the kernel mass of the cell around
the point divided by the cell width, so the grid sum times the spacing is
the kernel mass inside the grid even when the bandwidth is narrower than a
cell (which happens for tightly concentrated correlations).

The SVG is built from strings with fixed numeric formatting and no
timestamps, so equal specs give equal bytes.
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
from scipy.special import ndtr

from evortho.errors import DegenerateDataError, DomainError

__all__ = [
    "GRID_SIZE",
    "kde_grid",
    "silverman_bandwidth",
    "kde",
    "ViolinGroup",
    "ViolinSpec",
    "render_violins",
    "violin_spec_from_campaign",
    "plot_campaign",
]

GRID_SIZE = 256
# symmetric by construction: (2k - 255) / 255 is exact under negation
_GRID = (2.0 * np.arange(GRID_SIZE) - (GRID_SIZE - 1)) / (GRID_SIZE - 1)
_STEP = 2.0 / (GRID_SIZE - 1)


def kde_grid():
    return _GRID.copy()


def silverman_bandwidth(values):
    """0.9 min(sd, IQR / 1.34) m^(-1/5), falling back to sd when the IQR is 0."""
    v = np.asarray(values, dtype=float)
    sd = float(np.std(v, ddof=1))
    q75, q25 = np.percentile(v, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * v.size ** (-0.2)


def kde(values, bandwidth_rule="silverman"):
    """Gaussian kernel density on the 256-point grid over [-1, 1].

    Returns ``(grid, density)``.
    """
    if bandwidth_rule != "silverman":
        raise DomainError(f"unknown bandwidth rule {bandwidth_rule!r}")
    v = np.asarray(values, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise DomainError("kde values must be finite")
    if np.unique(v).size < 2:
        raise DegenerateDataError("kde needs at least two distinct values")
    h = silverman_bandwidth(v)
    lo = (_GRID[:, None] - 0.5 * _STEP - v[None, :]) / h
    hi = (_GRID[:, None] + 0.5 * _STEP - v[None, :]) / h
    # ndtr(hi) - ndtr(lo) loses precision in the upper tail; mirror there
    mass = np.where(lo > 0, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))
    return _GRID.copy(), mass.mean(axis=1) / _STEP


@dataclass(frozen=True)
class ViolinGroup:
    label: str
    values: tuple
    header_annotation: float | None = None


@dataclass(frozen=True)
class ViolinSpec:
    groups: tuple
    y_range: tuple = (-1.0, 1.0)
    bandwidth_rule: str = "silverman"
    title: str = ""
    y_label: str = "cross-correlation"

    def __post_init__(self):
        groups = tuple(
            g if isinstance(g, ViolinGroup) else ViolinGroup(**g) for g in self.groups
        )
        if not groups:
            raise DomainError("a violin spec needs at least one group")
        if tuple(self.y_range) != (-1.0, 1.0):
            raise DomainError("y_range is fixed to [-1, 1]")
        if self.bandwidth_rule != "silverman":
            raise DomainError(f"unknown bandwidth rule {self.bandwidth_rule!r}")
        lo, hi = self.y_range
        clean = []
        for g in groups:
            vals = tuple(float(v) for v in g.values)
            if not vals:
                raise DomainError(f"group {g.label!r} is empty")
            bad = [v for v in vals if not (lo <= v <= hi)]
            if bad:
                raise DomainError(f"group {g.label!r} has {len(bad)} values outside [{lo}, {hi}]")
            clean.append(ViolinGroup(str(g.label), vals, g.header_annotation))
        object.__setattr__(self, "groups", tuple(clean))
        object.__setattr__(self, "y_range", (lo, hi))


# layout, in SVG user units
_SLOT = 150
_LEFT = 70
_TOP = 70
_PLOT_H = 360
_HALF_WIDTH = 55


def _num(v):
    return f"{v:.2f}"


def _y(v):
    return _TOP + (1.0 - v) / 2.0 * _PLOT_H


def _violin_path(cx, values):
    grid, dens = kde(values)
    lo, hi = min(values), max(values)
    keep = (grid >= lo) & (grid <= hi)
    ys = np.concatenate([[lo], grid[keep], [hi]])
    ds = np.interp(ys, grid, dens)
    peak = float(ds.max())
    widths = ds / peak * _HALF_WIDTH if peak > 0 else np.zeros_like(ds)
    right = [(cx + w, _y(y)) for y, w in zip(ys, widths)]
    left = [(cx - w, _y(y)) for y, w in zip(ys[::-1], widths[::-1])]
    pts = right + left
    return "M" + " L".join(f"{_num(x)},{_num(y)}" for x, y in pts) + " Z"


def _svg_text(spec):
    n = len(spec.groups)
    width = _LEFT + n * _SLOT + 20
    height = _TOP + _PLOT_H + 60
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        "<style>",
        "text { font-family: sans-serif; font-size: 12px; fill: #222; }",
        ".title { font-size: 14px; font-weight: bold; }",
        ".header { font-size: 12px; font-weight: bold; }",
        ".axis { stroke: #222; stroke-width: 1; }",
        ".grid { stroke: #bbb; stroke-width: 0.5; stroke-dasharray: 3,3; }",
        ".violin { fill: #7aa6c2; fill-opacity: 0.75; stroke: #2d5f7e; stroke-width: 1; }",
        "</style>",
    ]
    if spec.title:
        out.append(f'<text class="title" x="{width / 2:.1f}" y="20" text-anchor="middle">{escape(spec.title)}</text>')
    x0, x1 = _LEFT, _LEFT + n * _SLOT
    out.append(f'<line class="axis" x1="{x0}" y1="{_num(_y(-1.0))}" x2="{x0}" y2="{_num(_y(1.0))}"/>')
    for tick in (-1.0, -0.5, 0.0, 0.5, 1.0):
        ty = _num(_y(tick))
        out.append(f'<line class="grid" x1="{x0}" y1="{ty}" x2="{x1}" y2="{ty}"/>')
        out.append(f'<line class="axis" x1="{x0 - 5}" y1="{ty}" x2="{x0}" y2="{ty}"/>')
        out.append(f'<text x="{x0 - 8}" y="{ty}" dy="4" text-anchor="end">{tick:.1f}</text>')
    mid = _num(_y(0.0))
    out.append(
        f'<text x="18" y="{mid}" text-anchor="middle" transform="rotate(-90 18 {mid})">'
        f"{escape(spec.y_label)}</text>"
    )
    for k, g in enumerate(spec.groups):
        cx = _LEFT + (k + 0.5) * _SLOT
        header = "n/a" if g.header_annotation is None else f"{g.header_annotation:.3f}"
        out.append(f'<text class="header" x="{cx:.1f}" y="{_TOP - 12}" text-anchor="middle">{header}</text>')
        out.append(f'<path class="violin" d="{_violin_path(cx, g.values)}"/>')
        out.append(
            f'<text x="{cx:.1f}" y="{_TOP + _PLOT_H + 22}" text-anchor="middle">{escape(g.label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_violins(spec: ViolinSpec, path):
    """Write ``spec`` as an SVG file at ``path`` and return the path."""
    path = Path(path)
    path.write_text(_svg_text(spec), encoding="utf-8")
    return path


def violin_spec_from_campaign(csv_path, summary_path):
    """Build the violin spec of one campaign from its CSV and JSON outputs.

    Only converged replications with a finite cross-correlation are drawn;
    header annotations are the across-replication correlations.
    """
    summary = json.loads(Path(summary_path).read_text(encoding="utf-8"))
    config = summary["config"]
    labels = list(summary["parametrisations"])
    labels.sort(key=lambda s: (s != "classical", config["charts"].index(s) if s in config["charts"] else -1))
    values = {label: [] for label in labels}
    with open(csv_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            cc = float(row["cross_correlation"])
            if row["converged"] == "true" and math.isfinite(cc):
                values[row["parametrisation"]].append(cc)
    groups = tuple(
        ViolinGroup(
            label,
            tuple(values[label]),
            summary["parametrisations"][label]["across_replication_correlation"],
        )
        for label in labels
    )
    title = f"{config['family']}: d = {config['d']}, n = {config['n']}"
    return ViolinSpec(groups, title=title)


def plot_campaign(csv_path, summary_path, out_path):
    return render_violins(violin_spec_from_campaign(csv_path, summary_path), out_path)
