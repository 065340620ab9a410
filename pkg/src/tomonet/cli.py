"""Command-line entry point.

Subcommands: gen-povm, gen-data, train, accuracy, timing, positivity, report.
A --config file holds key=value lines that act as defaults; flags given on
the command line win.  Exit code 0 on success, 2 for usage errors, 1 for
runtime failures (with a message on stderr).
"""

import argparse
import sys

import numpy as np

from .bench import ExperimentConfig, REPORT_FORMAT, merge_reports, read_report, run_accuracy, run_positivity, run_timing, write_report
from .datagen import (
    BASIS_TAG,
    generate_dataset,
    load_dataset,
    load_model,
    load_povm,
    records_to_arrays,
    save_model,
    save_povm,
)
from .estimators import SolverOptions
from .measurement import random_srm
from .neuralnet import TrainConfig, mlp_layers, train


def _expand_config(argv):
    """Insert key=value lines from a --config file as flags after the
    subcommand, so explicit command-line flags override them."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None or not argv:
        return argv
    tokens = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}: expected key=value, got {line!r}")
            tokens.extend([f"--{key.strip()}", value.strip()])
    return [argv[0]] + tokens + argv[1:]


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--config", help="file of key=value defaults for this subcommand")


def _parse_grid(text):
    try:
        grid = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"bad trial grid {text!r}; expected comma-separated integers")
    if not grid:
        raise ValueError("empty trial grid")
    return grid


def _load_model_checked(path, expect_head, dim):
    params, meta = load_model(path)
    if meta.get("head") != expect_head:
        raise ValueError(f"{path} holds a {meta.get('head')!r} head, expected {expect_head!r}")
    if int(meta.get("dim", -1)) != dim:
        raise ValueError(f"{path} was trained for dimension {meta.get('dim')}, measurement has {dim}")
    if meta.get("basis") != BASIS_TAG:
        raise ValueError(f"{path} uses basis {meta.get('basis')!r}, expected {BASIS_TAG!r}")
    return params


def _experiment_config(args, kind):
    povm = load_povm(args.povm)
    estimators = tuple(tok.strip() for tok in args.estimators.split(",") if tok.strip())
    bloch_model = None
    chol_model = None
    if "nn-bloch" in estimators:
        if args.bloch_model is None:
            raise ValueError("estimator 'nn-bloch' needs --bloch-model")
        bloch_model = _load_model_checked(args.bloch_model, "bloch", povm.dim)
    if "nn-chol" in estimators:
        if args.chol_model is None:
            raise ValueError("estimator 'nn-chol' needs --chol-model")
        chol_model = _load_model_checked(args.chol_model, "cholesky", povm.dim)
    return ExperimentConfig(
        povm=povm,
        estimators=estimators,
        trial_grid=_parse_grid(args.grid),
        n_states=args.states,
        seed=args.seed,
        solver=SolverOptions(max_iter=args.max_iter, tol=args.tol),
        bloch_model=bloch_model,
        chol_model=chol_model,
    )


def cmd_gen_povm(args):
    if args.dim < 2:
        raise ValueError(f"dimension must be at least 2, got {args.dim}")
    povm = random_srm(args.dim, np.random.default_rng(args.seed), args.outcomes)
    save_povm(args.out, povm)
    print(f"wrote {args.out}: dim={povm.dim} outcomes={povm.n_outcomes}")
    return 0


def cmd_gen_data(args):
    povm = load_povm(args.povm)
    n_min = args.trial_min if args.trial_min is not None else povm.dim * povm.dim
    n_max = args.trial_max if args.trial_max is not None else 100_000
    manifest = generate_dataset(
        args.out,
        args.povm,
        args.count,
        sampled_fraction=args.fraction,
        trial_range=(n_min, n_max),
        train_fraction=args.train_fraction,
        seed=args.seed,
    )
    print(f"wrote {args.out}: {manifest['train_count']} train / {manifest['val_count']} val records")
    return 0


def cmd_train(args):
    manifest, povm, train_recs, val_recs = load_dataset(args.data)
    head = args.head
    x_train, y_train = records_to_arrays(train_recs, head)
    x_val, y_val = records_to_arrays(val_recs, head)
    hidden = tuple(int(tok) for tok in args.hidden.split(",") if tok.strip())
    layers = mlp_layers(hidden, povm.dim * povm.dim)
    config = TrainConfig(
        learning_rate=args.lr,
        batches_per_epoch=args.batches,
        max_epochs=args.epochs,
        patience=args.patience,
        seed=args.seed,
    )
    params, history = train(layers, (x_train, y_train), (x_val, y_val), config)
    save_model(args.out, params, povm.dim, head, args.seed)
    print(
        f"wrote {args.out}: head={head} best epoch {history.best_epoch}/{len(history.val_loss)} "
        f"val loss {history.best_val_loss:.6g}"
    )
    return 0


def cmd_accuracy(args):
    config = _experiment_config(args, "accuracy")
    rows = run_accuracy(config)
    write_report(args.out, "accuracy", config.povm.dim, rows)
    print(f"wrote {args.out}: {len(rows)} rows")
    return 0


def cmd_timing(args):
    config = _experiment_config(args, "timing")
    rows = run_timing(config)
    write_report(args.out, "timing", config.povm.dim, rows)
    print(f"wrote {args.out}: {len(rows)} rows")
    return 0


def cmd_positivity(args):
    config = _experiment_config(args, "positivity")
    rows = run_positivity(config)
    write_report(args.out, "positivity", config.povm.dim, rows)
    print(f"wrote {args.out}: {len(rows)} rows")
    return 0


def cmd_report(args):
    reports = [read_report(path) for path in args.inputs]
    dim, cols, rows = merge_reports(reports)
    lines = [f"# tomonet-report format={REPORT_FORMAT} kind=summary dim={dim}"]
    lines.append(",".join(cols))
    for row in rows:
        lines.append(",".join(str(row.get(c, "")) for c in cols))
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.out}: {len(rows)} rows")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="tomonet", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("gen-povm", help="generate a square-root measurement")
    sub.add_argument("--dim", type=int, required=True)
    sub.add_argument("--outcomes", type=int, default=None, help="default dim^2")
    sub.add_argument("--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_gen_povm)

    sub = subs.add_parser("gen-data", help="generate a training dataset directory")
    sub.add_argument("--povm", required=True)
    sub.add_argument("--count", type=int, required=True)
    sub.add_argument("--fraction", type=float, default=0.25, help="fraction with sampled frequencies")
    sub.add_argument("--trial-min", type=int, default=None, help="default dim^2")
    sub.add_argument("--trial-max", type=int, default=None, help="default 100000")
    sub.add_argument("--train-fraction", type=float, default=0.8)
    sub.add_argument("--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_gen_data)

    sub = subs.add_parser("train", help="train one network head on a dataset")
    sub.add_argument("--data", required=True, help="dataset directory")
    sub.add_argument("--head", choices=("bloch", "cholesky"), required=True)
    sub.add_argument("--hidden", default="128,96", help="comma-separated hidden widths")
    sub.add_argument("--epochs", type=int, default=500)
    sub.add_argument("--batches", type=int, default=100)
    sub.add_argument("--patience", type=int, default=200)
    sub.add_argument("--lr", type=float, default=0.001)
    sub.add_argument("--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_train)

    for kind, func, default_est in (
        ("accuracy", cmd_accuracy, "li,li-pos,cls,mle"),
        ("timing", cmd_timing, "li,li-pos,cls,mle"),
        ("positivity", cmd_positivity, "li"),
    ):
        sub = subs.add_parser(kind, help=f"run the {kind} experiment")
        sub.add_argument("--povm", required=True)
        sub.add_argument("--states", type=int, default=100)
        sub.add_argument("--grid", required=True, help="comma-separated trial counts, 0 = exact")
        sub.add_argument("--estimators", default=default_est)
        sub.add_argument("--bloch-model", default=None)
        sub.add_argument("--chol-model", default=None)
        sub.add_argument("--max-iter", type=int, default=5000)
        sub.add_argument("--tol", type=float, default=1e-10)
        sub.add_argument("--out", required=True)
        _add_common(sub)
        sub.set_defaults(func=func)

    sub = subs.add_parser("report", help="merge experiment CSVs into one summary")
    sub.add_argument("inputs", nargs="+")
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
