"""Comparison methods: single-source fits, early fusion and late fusion."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .coop import _resolve_folds, cv_select, identity_preprocessing
from .core import PliableCoefs, PliableProblem, TwoSourceModel
from .cv import FoldSpec
from .solver import SolverConfig


@dataclass(frozen=True)
class SelectedFit:
    """A cross-validated pliable path on one design and its chosen point."""

    sources: tuple
    fit: object
    cv: object
    model: TwoSourceModel
    folds: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def lam(self):
        return self.cv.lambda_min

    @property
    def coefs(self):
        return self.fit.coefs(self.cv.index_min)

    def predict(self, data, preprocessed=False):
        return self.model.predict(data, preprocessed)


def _zero(p, K):
    return PliableCoefs.zeros(p, K)


def fit_single(data, source, config=SolverConfig(), cv_spec=FoldSpec(), preprocessing=None,
               folds=None):
    """Cross-validated pliable fit on one source (1 or 2) with the shared ``Z``."""
    if source not in (1, 2):
        raise ValueError("source must be 1 or 2")
    folds = _resolve_folds(data, cv_spec, folds)
    X = data.X1 if source == 1 else data.X2
    cv, fit = cv_select(PliableProblem(X, data.Z, data.y, alpha=config.alpha), folds, config)
    coefs = fit.coefs(cv.index_min)
    if source == 1:
        pair = (coefs, _zero(data.p2, data.K))
    else:
        pair = (_zero(data.p1, data.K), coefs)
    prep = preprocessing if preprocessing is not None else identity_preprocessing(data)
    return SelectedFit((source,), fit, cv, TwoSourceModel(*pair, prep), folds)


def fit_early_fusion(data, config=SolverConfig(), cv_spec=FoldSpec(), preprocessing=None,
                     folds=None):
    """Cross-validated pliable fit on the concatenated design ``[X1, X2]``."""
    folds = _resolve_folds(data, cv_spec, folds)
    problem = PliableProblem(np.hstack([data.X1, data.X2]), data.Z, data.y, alpha=config.alpha)
    cv, fit = cv_select(problem, folds, config)
    c1, c2 = fit.coefs(cv.index_min).split(data.p1)
    prep = preprocessing if preprocessing is not None else identity_preprocessing(data)
    return SelectedFit((1, 2), fit, cv, TwoSourceModel(c1, c2, prep), folds)


def combiner_weights(F, y, tol=1e-10):
    """Least-squares weights for stacking two prediction columns (no intercept).

    Returns ``(weights, fallback)``. When both columns are nonzero but
    collinear the weights fall back to (0.5, 0.5) and ``fallback`` is True.
    A zero column gets weight 0 (minimum-norm solution).
    """
    F = np.asarray(F, dtype=np.float64)
    norms = np.linalg.norm(F, axis=0)
    nonzero = norms > 0
    if nonzero.all():
        sv = np.linalg.svd(F / norms, compute_uv=False)
        if sv[-1] <= tol * sv[0]:
            return np.array([0.5, 0.5]), True
    if not nonzero.any():
        return np.array([0.5, 0.5]), True
    w, *_ = np.linalg.lstsq(F, y, rcond=None)
    return w, False


def fit_late_fusion(data, config=SolverConfig(), cv_spec=FoldSpec(), preprocessing=None,
                    folds=None):
    """Per-source pliable fits combined by a two-weight linear stacker.

    The stacker is fit on out-of-fold predictions at each source's
    CV-selected lambda, never on in-sample fits.
    """
    folds = _resolve_folds(data, cv_spec, folds)
    s1 = fit_single(data, 1, config, folds=folds)
    s2 = fit_single(data, 2, config, folds=folds)
    F = np.column_stack([s1.cv.oof[:, s1.cv.index_min], s2.cv.oof[:, s2.cv.index_min]])
    w, fallback = combiner_weights(F, data.y)
    if fallback:
        warnings.warn("late fusion: collinear source predictions, using equal weights",
                      RuntimeWarning)
    prep = preprocessing if preprocessing is not None else identity_preprocessing(data)
    model = TwoSourceModel(s1.coefs, s2.coefs, prep, (float(w[0]), float(w[1])))
    return SelectedFit((1, 2), None, None, model, folds,
                       {"single": (s1, s2), "weights": w, "fallback": fallback,
                        "out_of_fold": True, "oof_predictions": F})
