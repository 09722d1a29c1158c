import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from conftest import random_data
from cooppliable.coop import build_augmented
from cooppliable.core import PliableProblem, predict
from cooppliable.cv import CvResult, FoldSpec, cv_fit, make_folds
from cooppliable.solver import SolverConfig, fit_path, lambda_path

CFG = SolverConfig(n_lambda=8)


def test_folds_are_balanced_and_seeded():
    f = make_folds(23, FoldSpec(5, seed=3))
    assert sorted(np.bincount(f)) == [4, 4, 5, 5, 5]
    assert_array_equal(f, make_folds(23, FoldSpec(5, seed=3)))
    assert not np.array_equal(f, make_folds(23, FoldSpec(5, seed=4)))


def test_grouped_folds_keep_groups_whole():
    groups = np.repeat(np.arange(9), [5, 1, 3, 2, 4, 2, 1, 3, 2])
    f = make_folds(len(groups), FoldSpec(3, seed=0, grouping=groups))
    for g in np.unique(groups):
        assert len(np.unique(f[groups == g])) == 1
    sizes = np.bincount(f)
    assert sizes.max() - sizes.min() <= 5
    with pytest.raises(ValueError, match="only 2 groups"):
        make_folds(4, FoldSpec(3, grouping=np.array([0, 0, 1, 1])))


def test_fold_spec_validation():
    with pytest.raises(ValueError):
        FoldSpec(1)
    with pytest.raises(ValueError, match="5 folds requested for 3"):
        make_folds(3, FoldSpec(5))


def test_cv_matches_manual_fold_loop(rng):
    d = random_data(rng, n=30)
    prob = PliableProblem(np.hstack([d.X1, d.X2]), d.Z, d.y)
    folds = make_folds(d.n, FoldSpec(3, seed=1))
    lams = lambda_path(prob, CFG)
    cv = cv_fit(prob, folds, CFG, lams)
    errs = []
    for f in range(3):
        tr, te = folds != f, folds == f
        fit = fit_path(PliableProblem(prob.X[tr], prob.Z[tr], prob.y[tr]), lams, CFG)
        pred = np.column_stack([predict(fit.coefs(i), prob.X[te], prob.Z[te])
                                for i in range(len(lams))])
        assert_allclose(cv.oof[te], pred)
        errs.append(np.mean((prob.y[te][:, None] - pred) ** 2, axis=0))
    w = np.bincount(folds) / d.n
    assert_allclose(cv.mean_error, w @ np.array(errs))
    assert cv.lambda_min == lams[cv.index_min]


def test_augmented_cv_keeps_twins_in_their_fold(rng):
    d = random_data(rng, n=30)
    prob = build_augmented(d, 2.0)
    folds = make_folds(d.n, FoldSpec(3, seed=0))
    cv = cv_fit(prob, folds, CFG)
    # one out-of-fold prediction per observation, from response rows only
    assert cv.oof.shape == (d.n, CFG.n_lambda)
    assert np.isfinite(cv.oof).all()
    held = folds == 0
    train = prob.observation_rows(np.flatnonzero(~held))
    assert not np.isin(np.flatnonzero(held), train.obs_index).any()


def test_ties_pick_the_largest_lambda():
    cv = CvResult(np.array([3.0, 2.0, 1.0]), np.array([5.0, 4.0, 4.0]), np.zeros(3),
                  np.zeros((2, 3)), np.zeros(4), np.zeros((4, 3)))
    assert cv.index_min == 1 and cv.lambda_min == 2.0


def test_folds_must_cover_observations(rng):
    d = random_data(rng, n=20)
    prob = PliableProblem(d.X1, d.Z, d.y)
    with pytest.raises(ValueError, match="all 20 observations"):
        cv_fit(prob, np.zeros(10, dtype=int), CFG)
