"""Cooperative pliable lasso via the stacked (augmented) design.

For an agreement weight ``rho`` the two-source objective is rewritten as a
single pliable lasso on::

    X~ = [[ X1,            X2          ],      Z~ = [[Z],     y~ = [[y],
          [-sqrt(rho) X1,  sqrt(rho) X2]]             [0]]           [0]]

The zero block in ``Z~`` keeps the interaction terms out of the agreement
rows, so only main-effect predictions are pulled together.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CoopFit, PliableCoefs, PliableProblem, Preprocessing
from .cv import FoldSpec, cv_fit, make_folds
from .solver import SolverConfig, fit_path, lambda_path


@dataclass(frozen=True)
class RhoGrid:
    values: tuple = tuple(float(r) for r in range(10))

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size == 0:
            raise ValueError("rho grid is empty")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise ValueError("rho values must be finite and nonnegative")
        if np.any(np.diff(v) < 0):
            raise ValueError("rho values must be nondecreasing")
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def identity_preprocessing(data):
    """Record for data that were prepared elsewhere (no shift, unit scales)."""
    z = lambda m: np.zeros(m)  # noqa: E731
    o = lambda m: np.ones(m)  # noqa: E731
    f = lambda m: np.zeros(m, dtype=bool)  # noqa: E731
    return Preprocessing(z(data.p1), o(data.p1), z(data.p2), o(data.p2), z(data.K),
                         o(data.K), 0.0, f(data.p1), f(data.p2), f(data.K))


def build_augmented(data, rho, alpha=0.5, penalty_factors=None):
    """Stack the agreement rows under the data rows.

    Returns a :class:`PliableProblem` on ``2n`` rows whose objective equals
    the cooperative objective at the corresponding split coefficients.
    """
    if not rho >= 0:
        raise ValueError(f"rho must be nonnegative, got {rho}")
    n = data.n
    s = math.sqrt(rho)
    X = np.block([[data.X1, data.X2], [-s * data.X1, s * data.X2]])
    Z = np.vstack([data.Z, np.zeros_like(data.Z)])
    y = np.concatenate([data.y, np.zeros(n)])
    obs = np.concatenate([np.arange(n), np.arange(n)])
    mask = np.concatenate([np.ones(n, dtype=bool), np.zeros(n, dtype=bool)])
    return PliableProblem(X, Z, y, penalty_factors, alpha, obs, mask)


def cv_select(problem, folds, config):
    """Cross-validate along the full-data lambda path, then refit the full path.

    Returns ``(cv_result, full_path_fit)``; the selected solution is
    ``full_path_fit.coefs(cv_result.index_min)``.
    """
    lambdas = lambda_path(problem, config)
    cv = cv_fit(problem, folds, config, lambdas)
    fit = fit_path(problem, lambdas, config)
    return cv, fit


def _resolve_folds(data, cv_spec, folds):
    if folds is None:
        return make_folds(data.n, cv_spec)
    folds = np.asarray(folds)
    if folds.shape != (data.n,):
        raise ValueError("folds must have one entry per observation")
    return folds


def _grid_fit(data, rho_grid, config, folds, preprocessing, penalty_factors, extra):
    rhos = np.array(RhoGrid(tuple(rho_grid)).values)
    results = []
    for rho in rhos:
        problem = build_augmented(data, rho, config.alpha, penalty_factors)
        try:
            cv = cv_fit(problem, folds, config, lambda_path(problem, config))
        except Exception as exc:
            raise type(exc)(f"rho = {rho:g}: {exc}") from exc
        results.append(cv)
    best_err = np.array([cv.error_min for cv in results])
    # first minimizer = smallest rho on ties
    i = int(np.argmin(best_err))
    rho = float(rhos[i])
    cv = results[i]
    problem = build_augmented(data, rho, config.alpha, penalty_factors)
    fit = fit_path(problem, cv.lambdas, config)
    coefs = fit.coefs(cv.index_min)
    c1, c2 = coefs.split(data.p1)
    return CoopFit(
        beta1=c1.beta, theta1=c1.theta, beta2=c2.beta, theta2=c2.theta,
        rho=rho, lam=cv.lambda_min, alpha=config.alpha, rhos=rhos,
        lambdas=np.vstack([r.lambdas for r in results]),
        cv_surface=np.vstack([r.mean_error for r in results]),
        cv_se=np.vstack([r.se_error for r in results]),
        preprocessing=preprocessing if preprocessing is not None else identity_preprocessing(data),
        folds=folds, path=fit, penalty_factors=problem.penalty_factors,
        extra=dict(extra, cv=cv),
    )


def fit_coop(data, rho_grid=RhoGrid(), config=SolverConfig(), cv_spec=FoldSpec(),
             preprocessing=None, folds=None):
    """Cooperative pliable lasso with a single lambda for both sources.

    For each rho the augmented problem is cross-validated on the same folds;
    the (rho, lambda) pair with the smallest CV error is refit on all rows.

    Parameters
    ----------
    data : MultiViewData
        Prepared (centered) data.
    rho_grid : RhoGrid or iterable of float
    config : SolverConfig
    cv_spec : FoldSpec
        Used to build folds when ``folds`` is not given.
    preprocessing : Preprocessing, optional
        Stored on the result for prediction on raw inputs.
    folds : array, optional
        Explicit fold assignment per observation.

    Returns
    -------
    CoopFit
    """
    folds = _resolve_folds(data, cv_spec, folds)
    return _grid_fit(data, rho_grid, config, folds, preprocessing, None, {})


def fit_adaptive_coop(data, rho_grid=RhoGrid(), config=SolverConfig(), cv_spec=FoldSpec(),
                      preprocessing=None, folds=None):
    """Cooperative fit with source-specific shrinkage.

    Each source is first cross-validated alone (same folds) giving
    ``lambda1`` and ``lambda2``; the augmented problems then use penalty
    factor 1 on source-1 features and ``lambda2 / lambda1`` on source-2
    features. The single-source step does not depend on rho and is done
    once.
    """
    folds = _resolve_folds(data, cv_spec, folds)
    lam1 = cv_fit(PliableProblem(data.X1, data.Z, data.y, alpha=config.alpha), folds,
                  config).lambda_min
    lam2 = cv_fit(PliableProblem(data.X2, data.Z, data.y, alpha=config.alpha), folds,
                  config).lambda_min
    if not (lam1 > 0 and np.isfinite(lam1) and np.isfinite(lam2)):
        raise ValueError(f"degenerate penalty ratio: lambda1 = {lam1}, lambda2 = {lam2}")
    ratio = lam2 / lam1
    pf = np.concatenate([np.ones(data.p1), np.full(data.p2, ratio)])
    return _grid_fit(data, rho_grid, config, folds, preprocessing, pf,
                     {"lambda1": lam1, "lambda2": lam2, "ratio": ratio})
