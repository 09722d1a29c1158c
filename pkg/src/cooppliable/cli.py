"""Command-line interface: ``simulate``, ``fit`` and ``bench``.

Settings come from flags; ``--config FILE`` reads a JSON object whose keys
are flag names (dashes or underscores) and supplies defaults that explicit
flags override. The ``COOPPLIABLE_WORKERS`` environment variable sets the
worker count of ``bench``.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bench import METHODS, run_benchmark, run_method, write_outputs
from .coop import RhoGrid
from .core import prepare
from .cv import FoldSpec, make_folds
from .io import (CsvFormatError, ingest_csv, model_to_dict, prediction_hash, read_groups,
                 save_json, write_dataset, write_matrix)
from .metrics import count_effects, test_mse
from .simgen import PRESET_NAMES, generate, preset
from .solver import SolverConfig


def parse_rho_grid(text):
    """``"a..b"`` for the integers a to b, or a comma-separated list."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            values = tuple(float(v) for v in range(lo, hi + 1))
        else:
            values = tuple(float(v) for v in text.split(","))
        return RhoGrid(values)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"invalid rho grid {text!r}; use 'a..b' for integers or a comma list"
            + (f" ({exc})" if str(exc) else "")) from None


def _solver_args(p):
    p.add_argument("--alpha", type=float, default=0.5, help="mixing weight of the l1 interaction penalty")
    p.add_argument("--n-lambda", type=int, default=50, help="length of the lambda path")
    p.add_argument("--lambda-min-ratio", type=float, default=None,
                   help="smallest lambda as a fraction of lambda_max")
    p.add_argument("--kkt-tol", type=float, default=1e-4, help="KKT certification tolerance")
    p.add_argument("--max-iter", type=int, default=10000, help="coordinate descent sweep limit")
    p.add_argument("--rho-grid", type=parse_rho_grid, default=RhoGrid(),
                   help="agreement weights, 'a..b' or comma list (default 0..9)")
    p.add_argument("--folds", type=int, default=5, help="number of CV folds")
    p.add_argument("--seed", type=int, default=0, help="seed for folds (and simulation)")


def _solver_config(args):
    return SolverConfig(n_lambda=args.n_lambda, lambda_min_ratio=args.lambda_min_ratio,
                        alpha=args.alpha, max_iter=args.max_iter, kkt_tol=args.kkt_tol)


def build_parser():
    parser = argparse.ArgumentParser(prog="cooppliable", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of default settings")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a simulated dataset")
    s.add_argument("--preset", choices=PRESET_NAMES, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n", type=int, help="override the training size")
    s.add_argument("--n-test", type=int, help="override the test size")
    s.add_argument("--p", type=int, help="override p1 = p2")
    s.add_argument("--p-u", type=int, help="override the number of latent factors")
    s.add_argument("--literal-step2", action="store_true",
                   help="build source 2 from source 1 columns")
    s.add_argument("--out", required=True, help="output directory")

    f = sub.add_parser("fit", help="fit one method to CSV data")
    f.add_argument("--method", choices=METHODS, required=True)
    f.add_argument("--data", required=True,
                   help="directory with train/ (and optional test/) or the CSV files directly")
    f.add_argument("--out", required=True, help="output directory")
    f.add_argument("--categorical", default="",
                   help="comma-separated z.csv columns to expand into indicators")
    f.add_argument("--reference-coding", action="store_true",
                   help="drop the first level of each categorical column")
    f.add_argument("--no-standardize", action="store_true", help="center without scaling")
    f.add_argument("--standardize-z", action="store_true", help="also scale modifiers")
    _solver_args(f)

    b = sub.add_parser("bench", help="replicated simulation benchmark")
    b.add_argument("--presets", default="lowdim-1", help="comma-separated preset names")
    b.add_argument("--methods", default=",".join(METHODS), help="comma-separated method names")
    b.add_argument("--replicates", type=int, default=10)
    b.add_argument("--n", type=int, help="override the training size")
    b.add_argument("--n-test", type=int, help="override the test size")
    b.add_argument("--p", type=int, help="override p1 = p2")
    b.add_argument("--p-u", type=int, help="override the number of latent factors")
    b.add_argument("--workers", type=int, default=None,
                   help="worker processes (default from COOPPLIABLE_WORKERS, else 1)")
    b.add_argument("--level", choices=("main", "interaction"), default="main",
                   help="effects scored in selection.tsv")
    b.add_argument("--out", required=True, help="output directory")
    _solver_args(b)
    return parser


def _overrides(args):
    out = {}
    if args.n is not None:
        out["n"] = args.n
    if args.n_test is not None:
        out["n_test"] = args.n_test
    if args.p is not None:
        out["p1"] = out["p2"] = args.p
    if args.p_u is not None:
        out["p_u"] = args.p_u
    return out


def cmd_simulate(args):
    overrides = _overrides(args)
    if args.literal_step2:
        overrides["literal_step2"] = True
    sc = preset(args.preset, seed=args.seed, **overrides)
    train, test, truth = generate(sc)
    out = Path(args.out)
    write_dataset(out / "train", train)
    if test is not None:
        write_dataset(out / "test", test)
    save_json(out / "truth.json", dict(truth.to_dict(), scenario=sc.name, seed=sc.seed,
                                       target_snr=sc.target_snr, version=__version__))
    print(f"{sc.name} seed {sc.seed}: {train.n} train rows, {0 if test is None else test.n} "
          f"test rows, realized SNR {truth.snr:.3f}")
    return 0


def _data_dirs(path):
    path = Path(path)
    if (path / "train").is_dir():
        test = path / "test"
        return path / "train", test if test.is_dir() else None
    return path, None


def _interaction_rows(model):
    rows = []
    for source, c in ((1, model.coefs1), (2, model.coefs2)):
        for j, k in np.argwhere(c.theta != 0):
            rows.append((source, j + 1, k + 1, c.theta[j, k]))
    return rows


def cmd_fit(args):
    train_dir, test_dir = _data_dirs(args.data)
    categorical = [c for c in args.categorical.split(",") if c]
    raw = ingest_csv(train_dir, categorical, args.reference_coding)
    data, prep = prepare(raw, standardize=not args.no_standardize,
                         standardize_z=args.standardize_z)
    groups = read_groups(train_dir)
    folds = make_folds(data.n, FoldSpec(args.folds, seed=args.seed, grouping=groups))
    config = _solver_config(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit = run_method(args.method, data, config, args.rho_grid, folds, prep)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    model = fit.model
    train_pred = model.predict(raw)
    rho = getattr(fit, "rho", None)
    if hasattr(fit, "cv_surface"):
        surface = {"rhos": fit.rhos.tolist(), "lambdas": fit.lambdas.tolist(),
                   "mean": fit.cv_surface.tolist(), "se": fit.cv_se.tolist()}
        lam = fit.lam
    elif fit.cv is not None:
        surface = {"rhos": [], "lambdas": [fit.cv.lambdas.tolist()],
                   "mean": [fit.cv.mean_error.tolist()], "se": [fit.cv.se_error.tolist()]}
        lam = fit.lam
    else:
        s1, s2 = fit.extra["single"]
        surface = {"source1": {"lambdas": s1.cv.lambdas.tolist(),
                               "mean": s1.cv.mean_error.tolist()},
                   "source2": {"lambdas": s2.cv.lambdas.tolist(),
                               "mean": s2.cv.mean_error.tolist()}}
        lam = [s1.lam, s2.lam]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    extra = {"train_prediction_sha256": prediction_hash(train_pred), "version": __version__,
             "seed": args.seed, "folds": folds.tolist()}
    save_json(out / "model.json", model_to_dict(args.method, model, rho, lam, config.alpha,
                                                surface, extra))
    n_main, n_int = count_effects(fit)
    metrics = {"method": args.method, "n_main": n_main, "n_interaction": n_int,
               "selected_rho": rho, "lambda": lam,
               "train_mse": float(np.mean((raw.y - train_pred) ** 2))}
    if test_dir is not None:
        test = ingest_csv(test_dir, categorical, args.reference_coding)
        metrics["test_mse"] = test_mse(model, test)
    save_json(out / "metrics.json", metrics)
    rows = _interaction_rows(model)
    write_matrix(out / "interactions.csv", np.array(rows, dtype=float).reshape(len(rows), 4),
                 ["source", "feature", "modifier", "theta"])
    summary = ", ".join(f"{k} = {v}" for k, v in metrics.items() if k != "method")
    print(f"{args.method}: {summary}")
    return 0


def cmd_bench(args):
    presets = [p for p in args.presets.split(",") if p]
    methods = [m for m in args.methods.split(",") if m]
    bad = [p for p in presets if p not in PRESET_NAMES] + [m for m in methods if m not in METHODS]
    if bad:
        raise ValueError(f"unknown preset or method: {', '.join(bad)}")
    results = run_benchmark(presets, args.replicates, methods, _solver_config(args),
                            args.rho_grid, _overrides(args), args.seed, args.workers, args.folds)
    table = write_outputs(args.out, results, args.level)
    for row in table:
        print("\t".join(str(v) for v in row))
    failed = [r for res in results["scenarios"].values() for r in res["records"] if "error" in r]
    for r in failed:
        print(f"failed: {r['scenario']} seed {r['seed']} {r['method']}: {r['error']}",
              file=sys.stderr)
    return 0


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{known.config}: expected a JSON object")
    defaults = {k.replace("-", "_"): v for k, v in cfg.items()}
    if "rho_grid" in defaults:
        g = defaults["rho_grid"]
        defaults["rho_grid"] = RhoGrid(tuple(g)) if isinstance(g, list) else parse_rho_grid(str(g))
    for action in parser._subparsers._group_actions:
        for sub in action.choices.values():
            sub.set_defaults(**defaults)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        handler = {"simulate": cmd_simulate, "fit": cmd_fit, "bench": cmd_bench}[args.command]
        return handler(args)
    except (CsvFormatError, FileNotFoundError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
