"""Parsing of tomonet report CSVs.

A report is a comma-separated table with one `#`-prefixed header comment
declaring the schema version, the report kind and the state dimension:

    # tomonet-report format=1 kind=accuracy dim=3
    estimator,trials,mean_hs,q10,q90,n_states
    li,9,2.60614...,1.67787...,3.71681...,8

This module is the only knowledge tomoplots has of the producer; everything
arrives through files of this shape.
"""

from dataclasses import dataclass

SCHEMA_VERSION = 1
KINDS = ("accuracy", "timing", "positivity")


@dataclass(frozen=True)
class Report:
    kind: str
    dim: int
    columns: tuple
    rows: tuple  # tuple of dicts, column name -> string value

    def estimators(self):
        """Estimator tags in first-appearance order."""
        seen = []
        for row in self.rows:
            tag = row["estimator"]
            if tag not in seen:
                seen.append(tag)
        return seen

    def series(self, tag, column):
        """(trials, value) pairs for one estimator, in row order."""
        out = []
        for row in self.rows:
            if row["estimator"] == tag:
                out.append((int(row["trials"]), float(row[column])))
        return out


def read_report(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# tomonet-report"):
        raise ValueError(f"{path} is not a tomonet report")
    meta = {}
    for token in lines[0].split()[2:]:
        key, _, value = token.partition("=")
        meta[key] = value
    version = meta.get("format")
    if version != str(SCHEMA_VERSION):
        raise ValueError(f"{path}: unsupported schema version {version}, expected {SCHEMA_VERSION}")
    kind = meta.get("kind")
    if kind not in KINDS and kind != "summary":
        raise ValueError(f"{path}: unknown report kind {kind!r}")
    if "dim" not in meta:
        raise ValueError(f"{path}: header lacks a dim field")
    if len(lines) < 2:
        raise ValueError(f"{path}: missing column row")
    columns = tuple(lines[1].split(","))
    if "estimator" not in columns or "trials" not in columns:
        raise ValueError(f"{path}: columns {columns} lack estimator/trials")
    rows = []
    for i, line in enumerate(lines[2:]):
        parts = line.split(",")
        if len(parts) != len(columns):
            raise ValueError(f"{path}: row {i} has {len(parts)} fields, expected {len(columns)}")
        rows.append(dict(zip(columns, parts)))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return Report(kind=kind, dim=int(meta["dim"]), columns=columns, rows=tuple(rows))
