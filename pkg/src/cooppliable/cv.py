"""Fold construction and cross-validated lambda selection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PliableCoefs, predict
from .solver import SolverConfig, fit_path, lambda_path


@dataclass(frozen=True)
class FoldSpec:
    n_folds: int = 5
    seed: int = 0
    grouping: np.ndarray = None

    def __post_init__(self):
        if self.n_folds < 2:
            raise ValueError("need at least two folds")


def make_folds(n, spec=FoldSpec()):
    """Assign each of ``n`` observations to a fold.

    Without grouping the sizes differ by at most one. With grouping, whole
    groups are placed (largest first, after a seeded shuffle) into the
    currently smallest fold.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.grouping is None:
        if n < spec.n_folds:
            raise ValueError(f"{spec.n_folds} folds requested for {n} observations")
        folds = np.empty(n, dtype=np.intp)
        folds[rng.permutation(n)] = np.arange(n) % spec.n_folds
        return folds
    groups = np.asarray(spec.grouping)
    if groups.shape != (n,):
        raise ValueError("grouping must have one id per observation")
    labels, inverse, counts = np.unique(groups, return_inverse=True, return_counts=True)
    if len(labels) < spec.n_folds:
        raise ValueError(f"{spec.n_folds} folds requested but only {len(labels)} groups")
    order = rng.permutation(len(labels))
    order = order[np.argsort(-counts[order], kind="stable")]
    sizes = np.zeros(spec.n_folds, dtype=np.intp)
    group_fold = np.empty(len(labels), dtype=np.intp)
    for g in order:
        f = int(np.argmin(sizes))
        group_fold[g] = f
        sizes[f] += counts[g]
    return group_fold[inverse]


@dataclass(frozen=True)
class CvResult:
    """Cross-validation summary along a fixed lambda path.

    ``oof`` holds out-of-fold predictions (n_obs, n_lambda) for the response
    rows, indexed by observation.
    """

    lambdas: np.ndarray
    mean_error: np.ndarray
    se_error: np.ndarray
    fold_errors: np.ndarray
    folds: np.ndarray
    oof: np.ndarray

    @property
    def index_min(self):
        # argmin returns the first minimizer: the largest lambda on ties
        return int(np.argmin(self.mean_error))

    @property
    def lambda_min(self):
        return float(self.lambdas[self.index_min])

    @property
    def error_min(self):
        return float(self.mean_error[self.index_min])


def path_predictions(fit, X, Z):
    """Predictions (rows, n_lambda) of every path point."""
    out = np.empty((X.shape[0], len(fit)))
    for i in range(len(fit)):
        out[:, i] = predict(PliableCoefs(fit.betas[i], fit.thetas[i]), X, Z)
    return out


def cv_fit(problem, folds, config=SolverConfig(), lambdas=None):
    """Cross-validate a pliable fit over a lambda path fixed on the full data.

    ``folds`` assigns a fold to each observation (``problem.obs_index``
    values); all rows of an observation, agreement twins included, share
    that fold. Held-out error is measured on response rows only.
    """
    folds = np.asarray(folds)
    n_obs = int(problem.obs_index.max()) + 1
    if folds.shape != (n_obs,):
        raise ValueError(f"folds must assign all {n_obs} observations")
    if lambdas is None:
        lambdas = lambda_path(problem, config)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    fold_ids = np.unique(folds)
    oof = np.full((n_obs, len(lambdas)), np.nan)
    errs = np.empty((len(fold_ids), len(lambdas)))
    weights = np.empty(len(fold_ids))
    for fi, f in enumerate(fold_ids):
        held = np.nonzero(folds == f)[0]
        kept = np.nonzero(folds != f)[0]
        test_rows = np.isin(problem.obs_index, held) & problem.response_mask
        if not test_rows.any():
            raise ValueError(f"fold {f} has no held-out response rows")
        train = problem.observation_rows(kept)
        try:
            fit = fit_path(train, lambdas, config)
        except Exception as exc:
            raise type(exc)(f"fold {f}: {exc}") from exc
        pred = path_predictions(fit, problem.X[test_rows], problem.Z[test_rows])
        resid = problem.y[test_rows][:, None] - pred
        errs[fi] = np.mean(resid ** 2, axis=0)
        weights[fi] = test_rows.sum()
        oof[problem.obs_index[test_rows]] = pred
    w = weights / weights.sum()
    mean = w @ errs
    k = len(fold_ids)
    var = (w @ (errs - mean) ** 2) * k / (k - 1)
    se = np.sqrt(var / k)
    return CvResult(lambdas, mean, se, errs, folds, oof)
