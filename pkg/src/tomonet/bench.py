"""Benchmark experiments over a shared pool of test states.

Every experiment draws the same Ginibre test states and, per (state, trial
count) pair, a single frequency vector that all estimators then see, so
comparisons are paired.  Results are written as CSV with a self-describing
header comment line.
"""

import time
from dataclasses import dataclass, field, fields as dataclass_fields

import numpy as np

from .estimators import SolverOptions, constrained_ls, linear_inversion, mle
from .measurement import born_probabilities, measurement_matrix, sample_frequencies
from .neuralnet import predict_state_bloch, predict_state_cholesky
from .datagen import format_float
from .qcore import (
    EIG_FLOOR,
    from_bloch,
    gell_mann_basis,
    hs_distance,
    min_eigenvalue,
    positivize,
    random_density_ginibre,
)

REPORT_FORMAT = 1

ALL_ESTIMATORS = ("li", "li-pos", "cls", "mle", "nn-bloch", "nn-chol")
# Estimators whose output is positive by construction; pointless in a
# positivity experiment.
PSD_GUARANTEED = ("li-pos", "cls", "mle", "nn-chol")


@dataclass
class ExperimentConfig:
    povm: object
    estimators: tuple
    trial_grid: tuple  # trial counts; 0 means exact probabilities
    n_states: int = 100
    seed: int = 0
    solver: SolverOptions = field(default_factory=SolverOptions)
    bloch_model: object = None
    chol_model: object = None

    def __post_init__(self):
        if not self.estimators:
            raise ValueError("no estimators configured")
        for tag in self.estimators:
            if tag not in ALL_ESTIMATORS:
                raise ValueError(f"unknown estimator {tag!r}, expected one of {ALL_ESTIMATORS}")
        if not self.trial_grid:
            raise ValueError("empty trial grid")
        grid = tuple(int(n) for n in self.trial_grid)
        if any(n < 0 for n in grid):
            raise ValueError(f"trial counts must be nonnegative, got {grid}")
        if len(set(grid)) != len(grid):
            raise ValueError(f"duplicate trial counts in {grid}")
        if self.n_states < 1:
            raise ValueError(f"n_states must be positive, got {self.n_states}")
        if "nn-bloch" in self.estimators and self.bloch_model is None:
            raise ValueError("estimator 'nn-bloch' needs a trained Bloch-head model")
        if "nn-chol" in self.estimators and self.chol_model is None:
            raise ValueError("estimator 'nn-chol' needs a trained factor-head model")


@dataclass
class AccuracyRow:
    estimator: str
    trials: int
    mean_hs: float
    q10: float
    q90: float
    n_states: int


@dataclass
class TimingRow:
    estimator: str
    trials: int
    mean_seconds: float
    n_samples: int


@dataclass
class PositivityRow:
    estimator: str
    trials: int
    mean_negative_eig: float
    psd_fraction: float
    n_states: int


@dataclass
class TableEntry:
    state: np.ndarray
    probabilities: np.ndarray
    frequencies: dict  # trial count -> frequency values


def frequency_table(config):
    """The shared test pool: per state, one frequency draw per trial count.

    Derived seeds make the table a pure function of (seed, n_states, grid),
    so separate experiments with the same config see identical draws.
    """
    d = config.povm.dim
    children = np.random.SeedSequence(config.seed).spawn(config.n_states + 1)
    state_rng = np.random.default_rng(children[0])
    entries = []
    for i in range(config.n_states):
        rho = random_density_ginibre(d, state_rng)
        p = born_probabilities(rho, config.povm)
        samp = np.random.default_rng(children[i + 1])
        freqs = {}
        for n in config.trial_grid:
            freqs[int(n)] = p if n == 0 else sample_frequencies(p, int(n), samp).values
        entries.append(TableEntry(state=rho, probabilities=p, frequencies=freqs))
    return entries


def build_estimators(config):
    """Map estimator tags to callables taking a frequency vector to a state."""
    basis = gell_mann_basis(config.povm.dim)
    cmat = measurement_matrix(config.povm, basis)
    fns = {}
    for tag in config.estimators:
        if tag == "li":
            fns[tag] = lambda f, c=cmat, b=basis: from_bloch(linear_inversion(f, c), b)
        elif tag == "li-pos":
            fns[tag] = lambda f, c=cmat, b=basis: positivize(from_bloch(linear_inversion(f, c), b))
        elif tag == "cls":
            fns[tag] = lambda f, c=cmat, b=basis: constrained_ls(f, c, b, config.solver).estimate
        elif tag == "mle":
            fns[tag] = lambda f: mle(f, config.povm, config.solver).estimate
        elif tag == "nn-bloch":
            fns[tag] = lambda f, b=basis: predict_state_bloch(config.bloch_model, b, f)
        elif tag == "nn-chol":
            fns[tag] = lambda f: predict_state_cholesky(config.chol_model, f)
    return fns


def run_accuracy(config):
    """Mean Hilbert-Schmidt error with an empirical 10-90 percent band."""
    fns = build_estimators(config)
    table = frequency_table(config)
    rows = []
    for tag in config.estimators:
        fn = fns[tag]
        for n in config.trial_grid:
            errs = np.array([hs_distance(fn(e.frequencies[int(n)]), e.state) for e in table])
            q10, q90 = np.quantile(errs, [0.1, 0.9])
            rows.append(AccuracyRow(tag, int(n), float(errs.mean()), float(q10), float(q90), errs.size))
    return rows


def run_timing(config):
    """Mean wall time per estimate; one untimed warm-up call per estimator."""
    fns = build_estimators(config)
    table = frequency_table(config)
    rows = []
    for tag in config.estimators:
        fn = fns[tag]
        fn(table[0].frequencies[int(config.trial_grid[0])])
        for n in config.trial_grid:
            times = []
            for e in table:
                f = e.frequencies[int(n)]
                t0 = time.perf_counter()
                fn(f)
                times.append(time.perf_counter() - t0)
            rows.append(TimingRow(tag, int(n), float(np.mean(times)), len(times)))
    return rows


def run_positivity(config):
    """Positivity statistics for the estimators that can fail positivity."""
    for tag in config.estimators:
        if tag in PSD_GUARANTEED:
            raise ValueError(
                f"estimator {tag!r} is positive by construction; "
                f"the positivity experiment only accepts 'li' and 'nn-bloch'"
            )
    fns = build_estimators(config)
    table = frequency_table(config)
    rows = []
    for tag in config.estimators:
        fn = fns[tag]
        for n in config.trial_grid:
            eigs = np.array([min_eigenvalue(fn(e.frequencies[int(n)])) for e in table])
            rows.append(
                PositivityRow(
                    tag,
                    int(n),
                    float(np.minimum(eigs, 0.0).mean()),
                    float(np.mean(eigs >= EIG_FLOOR)),
                    eigs.size,
                )
            )
    return rows


def write_report(path, kind, dim, rows):
    """CSV with a `# tomonet-report` header comment declaring the schema."""
    if not rows:
        raise ValueError("refusing to write an empty report")
    cols = [f.name for f in dataclass_fields(rows[0])]
    lines = [f"# tomonet-report format={REPORT_FORMAT} kind={kind} dim={dim}"]
    lines.append(",".join(cols))
    for row in rows:
        parts = []
        for c in cols:
            v = getattr(row, c)
            parts.append(format_float(v) if isinstance(v, float) else str(v))
        lines.append(",".join(parts))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_report(path):
    """Parse a report CSV into (header fields, list of row dicts of strings)."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# tomonet-report"):
        raise ValueError(f"{path} is not a tomonet report")
    meta = {}
    for tok in lines[0].split()[2:]:
        key, _, value = tok.partition("=")
        meta[key] = value
    if int(meta.get("format", "-1")) != REPORT_FORMAT:
        raise ValueError(f"unsupported report format {meta.get('format')} in {path}")
    cols = lines[1].split(",")
    rows = []
    for i, ln in enumerate(lines[2:]):
        parts = ln.split(",")
        if len(parts) != len(cols):
            raise ValueError(f"{path}: row {i} has {len(parts)} fields, expected {len(cols)}")
        rows.append(dict(zip(cols, parts)))
    return meta, rows


def merge_reports(reports):
    """Join rows from several reports on (estimator, trials).

    Returns (dim, column names, merged row dicts); value columns keep their
    original string form so merging never reformats numbers.
    """
    if not reports:
        raise ValueError("nothing to merge")
    dims = {meta.get("dim") for meta, _ in reports}
    if len(dims) != 1:
        raise ValueError(f"reports mix dimensions {sorted(dims)}")
    keys = []
    merged = {}
    cols = ["estimator", "trials"]
    for meta, rows in reports:
        for row in rows:
            key = (row["estimator"], row["trials"])
            if key not in merged:
                merged[key] = {"estimator": key[0], "trials": key[1]}
                keys.append(key)
            for col, value in row.items():
                if col in ("estimator", "trials"):
                    continue
                if col not in cols:
                    cols.append(col)
                merged[key][col] = value
    return dims.pop(), cols, [merged[k] for k in keys]
