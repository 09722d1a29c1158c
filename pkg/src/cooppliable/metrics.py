"""Test error, sparsity counts, selection scores and experiment summaries."""
from __future__ import annotations

import math
from collections import Counter

import numpy as np

from .core import CoopFit, PliableCoefs, TwoSourceModel


def test_mse(model, data):
    """Mean squared prediction error of ``model`` on raw ``data``."""
    if data.n == 0:
        raise ValueError("empty test set")
    resid = data.y - model.predict(data)
    return float(np.mean(resid ** 2))


test_mse.__test__ = False  # not a pytest test despite the name


def _coef_blocks(obj):
    if isinstance(obj, PliableCoefs):
        return [obj]
    if isinstance(obj, CoopFit):
        return [PliableCoefs(obj.beta1, obj.theta1), PliableCoefs(obj.beta2, obj.theta2)]
    if isinstance(obj, TwoSourceModel):
        return [obj.coefs1, obj.coefs2]
    if hasattr(obj, "model"):
        return _coef_blocks(obj.model)
    raise TypeError(f"cannot count effects of {type(obj).__name__}")


def count_effects(obj):
    """``(n_main, n_interaction)``: exact-nonzero counts summed over sources."""
    blocks = _coef_blocks(obj)
    n_main = sum(int(np.count_nonzero(c.beta)) for c in blocks)
    n_int = sum(int(np.count_nonzero(c.theta)) for c in blocks)
    return n_main, n_int


def selected_mask(obj, level="main"):
    """Pooled selection indicator over both sources."""
    blocks = _coef_blocks(obj)
    if level == "main":
        return np.concatenate([c.beta != 0 for c in blocks])
    if level == "interaction":
        return np.concatenate([(c.theta != 0).ravel() for c in blocks])
    raise ValueError("level must be 'main' or 'interaction'")


def confusion(selected, truth_mask):
    selected = np.asarray(selected, dtype=bool)
    truth_mask = np.asarray(truth_mask, dtype=bool)
    tp = int(np.sum(selected & truth_mask))
    fp = int(np.sum(selected & ~truth_mask))
    tn = int(np.sum(~selected & ~truth_mask))
    fn = int(np.sum(~selected & truth_mask))
    return tp, fp, tn, fn


def selection_scores(fits, truth, cutoff, level="main"):
    """Sensitivity and specificity of the across-replicate selection.

    A variable counts as selected when it is nonzero in strictly more than
    ``cutoff`` of the replicate fits. Sensitivity is ``nan`` when the truth
    has no relevant variables (and specificity likewise when it has no
    irrelevant ones).

    Parameters
    ----------
    fits : list
        Replicate fits (anything :func:`count_effects` accepts) or
        precomputed selection masks.
    truth : SimTruth
    cutoff : int
        In ``[0, len(fits)]``.
    """
    if not 0 <= cutoff <= len(fits):
        raise ValueError(f"cutoff must lie in [0, {len(fits)}]")
    masks = [f if isinstance(f, np.ndarray) else selected_mask(f, level) for f in fits]
    counts = np.sum(masks, axis=0)
    truth_mask = truth.main_mask if level == "main" else truth.interaction_mask
    if counts.shape != truth_mask.shape:
        raise ValueError("replicate fits and truth have different dimensions")
    tp, fp, tn, fn = confusion(counts > cutoff, truth_mask)
    sens = tp / (tp + fn) if tp + fn else math.nan
    spec = tn / (tn + fp) if tn + fp else math.nan
    return sens, spec


def round_half_up(x):
    return int(math.floor(x + 0.5))


def summarize_experiment(results):
    """Aggregate replicate results into per-method rows.

    ``results`` is an iterable of dicts with keys ``method``, ``mse``,
    ``n_main``, ``n_interaction`` and optionally ``rho``.
    """
    by_method = {}
    for r in results:
        by_method.setdefault(r["method"], []).append(r)
    rows = []
    for method, rs in by_method.items():
        mse = np.array([r["mse"] for r in rs], dtype=float)
        rhos = [r["rho"] for r in rs if r.get("rho") is not None]
        rows.append({
            "method": method,
            "replicates": len(rs),
            "mse_mean": float(mse.mean()),
            "mse_sd": float(mse.std(ddof=1)) if len(rs) > 1 else 0.0,
            "n_main": round_half_up(np.mean([r["n_main"] for r in rs])),
            "n_interaction": round_half_up(np.mean([r["n_interaction"] for r in rs])),
            "rho_counts": dict(sorted(Counter(rhos).items())),
        })
    return rows
