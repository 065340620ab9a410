"""Figure construction and rendering.

One figure per report kind: log-log error curves with shaded 10-90 percent
bands, grouped timing bars on a log time axis, and a two-panel positivity
view (PSD fraction and mean negative eigenvalue).  Colors and markers are
pinned per estimator tag so the same estimator looks the same in every
figure.
"""

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import KINDS, Report, read_report

# tag -> (color, marker); tags outside this table draw from FALLBACKS in
# first-appearance order, which keeps a single report deterministic.
ESTIMATOR_STYLES = {
    "li": ("#1f77b4", "o"),
    "li-pos": ("#ff7f0e", "s"),
    "cls": ("#2ca02c", "^"),
    "mle": ("#d62728", "D"),
    "nn-bloch": ("#9467bd", "*"),
    "nn-chol": ("#8c564b", "v"),
}
FALLBACKS = (("#e377c2", "P"), ("#7f7f7f", "X"), ("#bcbd22", "h"), ("#17becf", "d"))

PNG_DPI = 150
SVG_HASHSALT = "tomoplots"


def style_for(tag, index):
    if tag in ESTIMATOR_STYLES:
        return ESTIMATOR_STYLES[tag]
    return FALLBACKS[index % len(FALLBACKS)]


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple  # report CSV paths, merged into one figure
    kind: str  # accuracy | timing | positivity
    out_base: str  # output path without extension; .png and .svg are added
    dim: int = None  # optional dimension filter

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("no input reports")
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}, expected one of {KINDS}")
        if not self.out_base:
            raise ValueError("empty output path")


def _sampled_series(report, tag, column):
    """Series without exact-probability rows, which a log axis cannot hold."""
    return [(n, v) for n, v in report.series(tag, column) if n > 0]


def figure_accuracy(report):
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    drew = False
    for i, tag in enumerate(report.estimators()):
        color, marker = style_for(tag, i)
        pts = _sampled_series(report, tag, "mean_hs")
        if not pts:
            continue
        trials = [n for n, _ in pts]
        ax.plot(trials, [v for _, v in pts], marker=marker, color=color, label=tag)
        lo = [v for _, v in _sampled_series(report, tag, "q10")]
        hi = [v for _, v in _sampled_series(report, tag, "q90")]
        ax.fill_between(trials, lo, hi, color=color, alpha=0.2, linewidth=0)
        drew = True
    if not drew:
        raise ValueError("accuracy report holds only exact-probability rows")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("number of trials")
    ax.set_ylabel("HS distance")
    ax.set_title(f"dimension {report.dim}")
    ax.legend()
    return fig


def figure_timing(report):
    tags = report.estimators()
    grid = sorted({int(row["trials"]) for row in report.rows})
    by_tag = {tag: dict(report.series(tag, "mean_seconds")) for tag in tags}
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    x = np.arange(len(grid))
    width = 0.8 / len(tags)
    for i, tag in enumerate(tags):
        color, _ = style_for(tag, i)
        heights = [by_tag[tag].get(n, np.nan) for n in grid]
        ax.bar(x + (i - (len(tags) - 1) / 2) * width, heights, width,
               color=color, label=tag)
    ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels(["exact" if n == 0 else str(n) for n in grid])
    ax.set_xlabel("number of trials")
    ax.set_ylabel("seconds per estimate")
    ax.set_title(f"dimension {report.dim}")
    ax.legend()
    return fig


def figure_positivity(report):
    fig, (ax_frac, ax_eig) = plt.subplots(1, 2, figsize=(9.6, 4.2))
    drew = False
    for i, tag in enumerate(report.estimators()):
        color, marker = style_for(tag, i)
        frac = _sampled_series(report, tag, "psd_fraction")
        eig = _sampled_series(report, tag, "mean_negative_eig")
        if not frac:
            continue
        ax_frac.plot([n for n, _ in frac], [v for _, v in frac],
                     marker=marker, color=color, label=tag)
        ax_eig.plot([n for n, _ in eig], [v for _, v in eig],
                    marker=marker, color=color, label=tag)
        drew = True
    if not drew:
        raise ValueError("positivity report holds only exact-probability rows")
    for ax in (ax_frac, ax_eig):
        ax.set_xscale("log")
        ax.set_xlabel("number of trials")
    ax_frac.set_ylabel("PSD fraction")
    ax_frac.set_ylim(-0.02, 1.02)
    ax_eig.set_ylabel("mean negative eigenvalue")
    ax_frac.legend()
    fig.suptitle(f"dimension {report.dim}")
    fig.tight_layout()
    return fig


BUILDERS = {
    "accuracy": figure_accuracy,
    "timing": figure_timing,
    "positivity": figure_positivity,
}


def load_merged(spec):
    """Read and concatenate the spec's reports, enforcing consistency."""
    reports = [read_report(path) for path in spec.inputs]
    for path, rep in zip(spec.inputs, reports):
        if rep.kind != spec.kind:
            raise ValueError(f"{path} is a {rep.kind} report, figure wants {spec.kind}")
        if rep.columns != reports[0].columns:
            raise ValueError(f"{path} columns {rep.columns} differ from {reports[0].columns}")
        if rep.dim != reports[0].dim:
            raise ValueError(f"reports mix dimensions {rep.dim} and {reports[0].dim}")
    dim = reports[0].dim
    if spec.dim is not None and dim != spec.dim:
        raise ValueError(f"reports have dimension {dim}, filter wants {spec.dim}")
    rows = tuple(row for rep in reports for row in rep.rows)
    return Report(kind=spec.kind, dim=dim, columns=reports[0].columns, rows=rows)


def render(spec):
    """Write <out_base>.png and .svg; returns the written paths.

    Byte-deterministic for identical inputs: fixed dpi, a fixed SVG hash
    salt, no embedded dates.
    """
    report = load_merged(spec)
    fig = BUILDERS[spec.kind](report)
    out_dir = os.path.dirname(spec.out_base)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    png = spec.out_base + ".png"
    svg = spec.out_base + ".svg"
    try:
        with plt.rc_context({"svg.hashsalt": SVG_HASHSALT}):
            fig.savefig(png, dpi=PNG_DPI, metadata={"Software": "tomoplots"})
            fig.savefig(svg, metadata={"Date": None})
    finally:
        plt.close(fig)
    return [png, svg]
