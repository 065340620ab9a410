"""Reproducible dataset generation and every on-disk format.

Text formats throughout, all floats printed with 17 significant digits so a
write/read cycle reproduces each IEEE-754 double bit-exactly.  A dataset
directory holds manifest.json, the generating povm.dat (content-hashed in the
manifest), and line-oriented train.dat / val.dat record files.  Trained
models are stored in a single self-describing text file.
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .measurement import Povm, born_probabilities, sample_frequencies
from .neuralnet import MlpParams
from .qcore import (
    cholesky_vector,
    gell_mann_basis,
    random_density_ginibre,
    state_to_cholesky,
    to_bloch,
)

FORMAT_VERSION = 1
BASIS_TAG = "gellmann-orthonormal"


def format_float(x):
    """17 significant digits: enough for a bit-exact decimal round trip."""
    return f"{float(x):.17g}"


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()


def _header_fields(line, kind):
    tokens = line.split()
    if not tokens or tokens[0] != kind:
        raise ValueError(f"expected a {kind!r} header, got {line!r}")
    fields = {}
    for tok in tokens[1:]:
        key, _, value = tok.partition("=")
        fields[key] = value
    version = int(fields.get("format", "-1"))
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported {kind} format version {version}, expected {FORMAT_VERSION}")
    return fields


def save_povm(path, povm):
    """One header line, then one line of interleaved re/im entries per element."""
    elems = povm.elements
    m, d = elems.shape[0], elems.shape[1]
    lines = [f"povm format={FORMAT_VERSION} dim={d} outcomes={m}"]
    for k in range(m):
        flat = elems[k].reshape(-1)
        parts = []
        for z in flat:
            parts.append(format_float(z.real))
            parts.append(format_float(z.imag))
        lines.append(" ".join(parts))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_povm(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    fields = _header_fields(lines[0], "povm")
    d = int(fields["dim"])
    m = int(fields["outcomes"])
    if len(lines) - 1 < m:
        raise ValueError(f"{path}: expected {m} elements, file ends after {len(lines) - 1}")
    elems = np.empty((m, d, d), dtype=complex)
    for k in range(m):
        parts = lines[1 + k].split()
        if len(parts) != 2 * d * d:
            raise ValueError(f"{path}: element {k} has {len(parts)} fields, expected {2 * d * d}")
        vals = np.array([float(p) for p in parts])
        elems[k] = (vals[0::2] + 1j * vals[1::2]).reshape(d, d)
    return Povm(elems).validate()


@dataclass
class DatasetRecord:
    """One training example: frequencies in, both state targets out."""

    state_id: int
    trials: int  # 0 = exact probabilities
    frequencies: np.ndarray
    bloch: np.ndarray
    cholesky: np.ndarray


def generate_records(povm, count, sampled_fraction=0.25, trial_range=None, seed=0):
    """Generate `count` records with per-record derived seeds.

    Each record draws a fresh Ginibre state and its exact outcome
    distribution.  A deterministic subset (the first ceil(fraction * count)
    positions of a seeded index shuffle) carries sampled frequencies at a
    trial count drawn log-uniformly from trial_range; the rest keep the exact
    distribution with trials = 0.  Record i depends only on (seed, i), so the
    output is independent of generation order.
    """
    d = povm.dim
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if not 0.0 <= sampled_fraction <= 1.0:
        raise ValueError(f"sampled_fraction must lie in [0, 1], got {sampled_fraction}")
    if trial_range is None:
        trial_range = (d * d, 100_000)
    n_min, n_max = int(trial_range[0]), int(trial_range[1])
    if n_min < 1 or n_max < n_min:
        raise ValueError(f"bad trial range {trial_range}")
    basis = gell_mann_basis(d)
    children = np.random.SeedSequence(seed).spawn(count + 1)
    n_sampled = min(count, math.ceil(sampled_fraction * count - 1e-9))
    shuffled = np.random.default_rng(children[0]).permutation(count)
    sampled = set(int(i) for i in shuffled[:n_sampled])
    records = []
    for i in range(count):
        rng = np.random.default_rng(children[i + 1])
        rho = random_density_ginibre(d, rng)
        p = born_probabilities(rho, povm)
        if i in sampled:
            n_trials = int(round(math.exp(rng.uniform(math.log(n_min), math.log(n_max)))))
            n_trials = min(max(n_trials, n_min), n_max)
            freq = sample_frequencies(p, n_trials, rng)
            values, trials = freq.values, freq.trials
        else:
            values, trials = p, 0
        records.append(
            DatasetRecord(
                state_id=i,
                trials=trials,
                frequencies=values,
                bloch=to_bloch(rho, basis),
                cholesky=cholesky_vector(state_to_cholesky(rho)),
            )
        )
    return records


def split_dataset(records, train_fraction, seed=0):
    """Seeded shuffle, then split round(train_fraction * n) / rest."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(records)
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise ValueError(f"split {n_train}/{n - n_train} leaves an empty part")
    order = np.random.default_rng(seed).permutation(n)
    train = [records[int(i)] for i in order[:n_train]]
    val = [records[int(i)] for i in order[n_train:]]
    return train, val


def save_records(path, records, dim, n_outcomes):
    lines = [f"records format={FORMAT_VERSION} dim={dim} outcomes={n_outcomes} count={len(records)}"]
    for rec in records:
        parts = [str(rec.state_id), str(rec.trials)]
        for arr in (rec.frequencies, rec.bloch, rec.cholesky):
            parts.extend(format_float(v) for v in arr)
        lines.append(" ".join(parts))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_records(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    fields = _header_fields(lines[0], "records")
    d = int(fields["dim"])
    m = int(fields["outcomes"])
    count = int(fields["count"])
    if len(lines) - 1 < count:
        raise ValueError(f"{path}: truncated at record {len(lines) - 1} of {count}")
    n_fields = 2 + m + 2 * d * d
    records = []
    for i in range(count):
        parts = lines[1 + i].split()
        if len(parts) != n_fields:
            raise ValueError(f"{path}: record {i} has {len(parts)} fields, expected {n_fields}")
        vals = np.array([float(p) for p in parts[2:]])
        records.append(
            DatasetRecord(
                state_id=int(parts[0]),
                trials=int(parts[1]),
                frequencies=vals[:m],
                bloch=vals[m:m + d * d],
                cholesky=vals[m + d * d:],
            )
        )
    return records, fields


def records_to_arrays(records, head):
    """Stack records into (inputs, targets) arrays for the given head."""
    if head not in ("bloch", "cholesky"):
        raise ValueError(f"unknown head {head!r}, expected 'bloch' or 'cholesky'")
    x = np.stack([rec.frequencies for rec in records])
    y = np.stack([rec.bloch if head == "bloch" else rec.cholesky for rec in records])
    return x, y


def generate_dataset(out_dir, povm_path, count, sampled_fraction=0.25, trial_range=None,
                     train_fraction=0.8, seed=0):
    """Generate, split and write a dataset directory; returns the manifest."""
    povm = load_povm(povm_path)
    os.makedirs(out_dir, exist_ok=True)
    povm_out = os.path.join(out_dir, "povm.dat")
    with open(povm_path, "rb") as src:
        payload = src.read()
    with open(povm_out, "wb") as dst:
        dst.write(payload)
    if trial_range is None:
        trial_range = (povm.dim * povm.dim, 100_000)
    records = generate_records(povm, count, sampled_fraction, trial_range, seed)
    train, val = split_dataset(records, train_fraction, seed)
    save_records(os.path.join(out_dir, "train.dat"), train, povm.dim, povm.n_outcomes)
    save_records(os.path.join(out_dir, "val.dat"), val, povm.dim, povm.n_outcomes)
    manifest = {
        "format_version": FORMAT_VERSION,
        "dimension": povm.dim,
        "outcomes": povm.n_outcomes,
        "povm_file": "povm.dat",
        "povm_sha256": sha256_file(povm_out),
        "record_count": count,
        "train_count": len(train),
        "val_count": len(val),
        "sampled_fraction": sampled_fraction,
        "trial_min": int(trial_range[0]),
        "trial_max": int(trial_range[1]),
        "train_fraction": train_fraction,
        "master_seed": seed,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def load_dataset(data_dir):
    """Load a dataset directory, verifying version, hash and record counts."""
    with open(os.path.join(data_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported dataset format version {version}, expected {FORMAT_VERSION}")
    povm_path = os.path.join(data_dir, manifest["povm_file"])
    digest = sha256_file(povm_path)
    if digest != manifest["povm_sha256"]:
        raise ValueError(f"povm hash mismatch: manifest {manifest['povm_sha256']}, file {digest}")
    povm = load_povm(povm_path)
    train, _ = load_records(os.path.join(data_dir, "train.dat"))
    val, _ = load_records(os.path.join(data_dir, "val.dat"))
    if len(train) != manifest["train_count"] or len(val) != manifest["val_count"]:
        raise ValueError(
            f"record counts {len(train)}/{len(val)} disagree with manifest "
            f"{manifest['train_count']}/{manifest['val_count']}"
        )
    return manifest, povm, train, val


def save_model(path, params, dim, head, seed):
    """Self-describing text dump of trained parameters.

    Header carries the format version, state dimension, output head, basis
    convention and training seed; each layer follows as a shape line, the
    weight rows, and the bias row.
    """
    if head not in ("bloch", "cholesky"):
        raise ValueError(f"unknown head {head!r}, expected 'bloch' or 'cholesky'")
    lines = [
        f"model format={FORMAT_VERSION} dim={dim} head={head} basis={BASIS_TAG} "
        f"seed={seed} in_width={params.in_width} layers={len(params.weights)}"
    ]
    for w, b, act in zip(params.weights, params.biases, params.activations):
        lines.append(f"layer {act} {w.shape[0]} {w.shape[1]}")
        for row in w:
            lines.append(" ".join(format_float(v) for v in row))
        lines.append(" ".join(format_float(v) for v in b))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path):
    """Load a model file; predictions of the result are bit-identical to the
    saved network's.  Returns (params, header fields)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    fields = _header_fields(lines[0], "model")
    n_layers = int(fields["layers"])
    weights, biases, acts = [], [], []
    pos = 1
    for k in range(n_layers):
        if pos >= len(lines):
            raise ValueError(f"{path}: truncated before layer {k}")
        parts = lines[pos].split()
        if len(parts) != 4 or parts[0] != "layer":
            raise ValueError(f"{path}: bad layer header at line {pos + 1}: {lines[pos]!r}")
        act, n_out, n_in = parts[1], int(parts[2]), int(parts[3])
        if len(lines) < pos + 1 + n_out + 1:
            raise ValueError(f"{path}: truncated inside layer {k}")
        w = np.empty((n_out, n_in))
        for r in range(n_out):
            row = lines[pos + 1 + r].split()
            if len(row) != n_in:
                raise ValueError(f"{path}: layer {k} row {r} has {len(row)} fields, expected {n_in}")
            w[r] = [float(v) for v in row]
        brow = lines[pos + 1 + n_out].split()
        if len(brow) != n_out:
            raise ValueError(f"{path}: layer {k} bias has {len(brow)} fields, expected {n_out}")
        weights.append(w)
        biases.append(np.array([float(v) for v in brow]))
        acts.append(act)
        pos += n_out + 2
    params = MlpParams(weights, biases, acts)
    if params.in_width != int(fields["in_width"]):
        raise ValueError(f"{path}: header in_width {fields['in_width']} does not match layer shapes")
    return params, fields
