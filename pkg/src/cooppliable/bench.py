"""Replicated simulation benchmark over methods and preset scenarios."""
from __future__ import annotations

import dataclasses
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import fit_early_fusion, fit_late_fusion, fit_single
from .coop import RhoGrid, fit_adaptive_coop, fit_coop
from .core import prepare
from .cv import FoldSpec, make_folds
from .metrics import count_effects, selected_mask, selection_scores, summarize_experiment, test_mse
from .simgen import SimTruth, generate, preset
from .solver import SolverConfig

METHODS = ("only-x1", "only-x2", "early", "late", "coop", "adaptive-coop")
WORKERS_ENV = "COOPPLIABLE_WORKERS"


def run_method(method, data, config=SolverConfig(), rho_grid=RhoGrid(), folds=None,
               preprocessing=None):
    """Fit one method on prepared data; returns an object with ``.model``."""
    kw = dict(config=config, preprocessing=preprocessing, folds=folds)
    if method == "only-x1":
        return fit_single(data, 1, **kw)
    if method == "only-x2":
        return fit_single(data, 2, **kw)
    if method == "early":
        return fit_early_fusion(data, **kw)
    if method == "late":
        return fit_late_fusion(data, **kw)
    if method == "coop":
        return fit_coop(data, rho_grid, **kw)
    if method == "adaptive-coop":
        return fit_adaptive_coop(data, rho_grid, **kw)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def selected_rho(fit):
    return float(fit.rho) if hasattr(fit, "rho") else None


def run_replicate(scenario, methods=METHODS, config=SolverConfig(), rho_grid=RhoGrid(),
                  n_folds=5):
    """All methods on one simulated replicate, sharing folds and preprocessing.

    Returns ``(records, truth)``; each record holds the method name, test
    MSE, effect counts, selected rho (cooperative methods only), selection
    masks and the wall time.
    """
    train, test, truth = generate(scenario)
    if test is None:
        raise ValueError("the benchmark needs a test set (n_test > 0)")
    data, prep = prepare(train)
    folds = make_folds(data.n, FoldSpec(n_folds, seed=scenario.seed))
    records = []
    for method in methods:
        t0 = time.perf_counter()
        base = {"scenario": scenario.name, "seed": scenario.seed, "method": method}
        try:
            fit = run_method(method, data, config, rho_grid, folds, prep)
        except Exception as exc:  # recorded per cell; the run continues
            records.append(dict(base, error=f"{type(exc).__name__}: {exc}",
                                seconds=time.perf_counter() - t0))
            continue
        n_main, n_int = count_effects(fit)
        records.append(dict(
            base, mse=test_mse(fit.model, test), n_main=n_main, n_interaction=n_int,
            rho=selected_rho(fit),
            main_mask=selected_mask(fit, "main").tolist(),
            interaction_mask=selected_mask(fit, "interaction").tolist(),
            seconds=time.perf_counter() - t0,
        ))
    return records, truth


def _replicate_task(args):
    name, seed, overrides, methods, config, rho_grid, n_folds = args
    records, truth = run_replicate(preset(name, seed=seed, **overrides), methods, config,
                                   rho_grid, n_folds)
    return records, truth.to_dict()


def default_workers():
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        workers = int(value)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {value!r}") from None
    return max(workers, 1)


def run_benchmark(presets, replicates, methods=METHODS, config=SolverConfig(),
                  rho_grid=RhoGrid(), overrides=None, seed=0, workers=None, n_folds=5):
    """Run ``replicates`` seeds (``seed``, ``seed + 1``, ...) of every preset.

    Returns ``{"config": {...}, "scenarios": {preset: {"records": [...],
    "truths": [...]}}}``; records of failed cells carry an ``error`` string
    instead of results. With more than
    one worker the replicates run in separate processes; results do not
    depend on the worker count.
    """
    workers = default_workers() if workers is None else max(int(workers), 1)
    tasks = [(name, seed + r, dict(overrides or {}), tuple(methods), config, rho_grid, n_folds)
             for name in presets for r in range(replicates)]
    if workers == 1:
        outputs = [_replicate_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(workers) as pool:
            outputs = list(pool.map(_replicate_task, tasks))
    results = {name: {"records": [], "truths": []} for name in presets}
    results = {"config": {"presets": list(presets), "replicates": replicates,
                          "methods": list(methods), "seed": seed,
                          "overrides": dict(overrides or {}),
                          "solver": dataclasses.asdict(config),
                          "rho_grid": list(RhoGrid(tuple(rho_grid)).values),
                          "n_folds": n_folds, "version": __version__},
               "scenarios": results}
    for task, (records, truth) in zip(tasks, outputs):
        results["scenarios"][task[0]]["records"].extend(records)
        results["scenarios"][task[0]]["truths"].append(truth)
    return results


def selection_table(records, truth, level="main"):
    """Rows ``(method, cutoff, sensitivity, specificity)`` for cutoffs 0..R.

    The truth pattern is the same in every replicate of a preset, so one
    :class:`SimTruth` serves all of them.
    """
    key = "main_mask" if level == "main" else "interaction_mask"
    rows = []
    by_method = {}
    for r in ok_records(records):
        by_method.setdefault(r["method"], []).append(np.asarray(r[key], dtype=bool))
    for method, masks in by_method.items():
        for cutoff in range(len(masks) + 1):
            sens, spec = selection_scores(masks, truth, cutoff, level)
            rows.append((method, cutoff, sens, spec))
    return rows


def ok_records(records):
    return [r for r in records if "error" not in r]


def _tsv(path, header, rows):
    with open(path, "w") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_cell(v) for v in row) + "\n")


def _cell(v):
    if isinstance(v, float):
        return "nan" if np.isnan(v) else f"{v:.6g}"
    return str(v)


def write_outputs(out_dir, results, level="main"):
    """Write results.json, table.tsv, rho_hist.tsv and selection.tsv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.json", "w") as fh:
        json.dump(results, fh, indent=1)
        fh.write("\n")
    table, hist, sel = [], [], []
    for name, res in results["scenarios"].items():
        for row in summarize_experiment(ok_records(res["records"])):
            table.append((name, row["method"], row["replicates"], row["mse_mean"],
                          row["mse_sd"], row["n_main"], row["n_interaction"]))
            for rho, count in row["rho_counts"].items():
                hist.append((name, row["method"], rho, count))
        truth = SimTruth.from_dict(res["truths"][0])
        for method, cutoff, sens, spec in selection_table(res["records"], truth, level):
            sel.append((name, method, cutoff, sens, spec))
    _tsv(out / "table.tsv", ("scenario", "method", "replicates", "mse_mean", "mse_sd",
                             "n_main", "n_interaction"), table)
    _tsv(out / "rho_hist.tsv", ("scenario", "method", "rho", "count"), hist)
    _tsv(out / "selection.tsv", ("scenario", "method", "cutoff", "sensitivity",
                                 "specificity"), sel)
    return table
