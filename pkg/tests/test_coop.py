import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from conftest import random_data
from cooppliable.baselines import fit_early_fusion
from cooppliable.coop import RhoGrid, build_augmented, fit_adaptive_coop, fit_coop
from cooppliable.core import (MultiViewData, PliableCoefs, PliableProblem, coop_objective,
                              pliable_objective)
from cooppliable.cv import FoldSpec, make_folds
from cooppliable.solver import SolverConfig, fit_path

CFG = SolverConfig(n_lambda=10)


def test_rho_grid_validation():
    assert RhoGrid().values == tuple(float(r) for r in range(10))
    for bad in ((), (-1.0,), (2.0, 1.0), (np.inf,)):
        with pytest.raises(ValueError):
            RhoGrid(bad)


def test_augmented_layout(rng):
    d = random_data(rng, n=10)
    prob = build_augmented(d, 4.0)
    assert prob.X.shape == (20, d.p1 + d.p2)
    assert_allclose(prob.X[10:, :d.p1], -2.0 * d.X1)
    assert_allclose(prob.X[10:, d.p1:], 2.0 * d.X2)
    assert not prob.Z[10:].any() and not prob.y[10:].any()
    assert prob.n_obs == 10
    with pytest.raises(ValueError):
        build_augmented(d, -0.1)


@pytest.mark.parametrize("seed", range(5))
def test_augmentation_identity(seed):
    rng = np.random.default_rng(seed)
    d = random_data(rng, n=15)
    rho, lam, alpha = rng.uniform(0, 5), rng.uniform(0.01, 1), rng.uniform()
    pf = rng.uniform(0.5, 2, d.p1 + d.p2)
    c1 = PliableCoefs(rng.standard_normal(d.p1), rng.standard_normal((d.p1, d.K)))
    c2 = PliableCoefs(rng.standard_normal(d.p2), rng.standard_normal((d.p2, d.K)))
    lhs = coop_objective(d, c1, c2, rho, lam, alpha, pf)
    rhs = pliable_objective(build_augmented(d, rho, alpha, pf), PliableCoefs.concat(c1, c2), lam)
    assert rhs == pytest.approx(lhs, rel=1e-10)


def test_rho_one_without_interactions_splits_into_half_response_fits(rng):
    # With Z = 0 the agreement penalty at rho = 1 decouples the sources:
    # each solves a pliable fit of y / 2 on its own features at lambda / 2.
    d = random_data(rng, n=30)
    d = MultiViewData(d.X1, d.X2, np.zeros_like(d.Z), d.y)
    lams = np.array([0.6, 0.3, 0.1])
    cfg = SolverConfig(conv_tol=1e-10)
    coop = fit_path(build_augmented(d, 1.0), lams, cfg)
    one = fit_path(PliableProblem(d.X1, d.Z, d.y / 2), lams / 2, cfg)
    two = fit_path(PliableProblem(d.X2, d.Z, d.y / 2), lams / 2, cfg)
    assert_allclose(coop.betas[:, :d.p1], one.betas, atol=1e-6)
    assert_allclose(coop.betas[:, d.p1:], two.betas, atol=1e-6)


def test_rho_zero_is_early_fusion_bit_for_bit(rng):
    d = random_data(rng, n=30)
    folds = make_folds(d.n, FoldSpec(3, seed=2))
    coop = fit_coop(d, [0.0], CFG, folds=folds)
    early = fit_early_fusion(d, CFG, folds=folds)
    assert_array_equal(coop.path.betas, early.fit.betas)
    assert_array_equal(coop.path.thetas, early.fit.thetas)
    assert_array_equal(coop.beta1, early.model.coefs1.beta)
    assert coop.lam == early.lam


def test_grid_selection_and_surface(rng):
    d = random_data(rng, n=30)
    fit = fit_coop(d, RhoGrid((0.0, 1.0, 3.0)), CFG, FoldSpec(3, seed=0))
    assert fit.cv_surface.shape == (3, CFG.n_lambda) == fit.lambdas.shape
    i, j = np.unravel_index(np.argmin(fit.cv_surface), fit.cv_surface.shape)
    assert fit.rho == fit.rhos[i] and fit.lam == fit.lambdas[i, j]
    assert PliableCoefs(fit.beta1, fit.theta1).hierarchy_ok()


def test_ties_pick_the_smallest_rho(rng):
    d = random_data(rng, n=30)
    fit = fit_coop(d, RhoGrid((2.0, 2.0)), CFG, FoldSpec(3, seed=0))
    assert fit.extra["cv"].mean_error.tolist() == fit.cv_surface[0].tolist()


def test_adaptive_penalty_factors(rng):
    d = random_data(rng, n=30)
    fit = fit_adaptive_coop(d, RhoGrid((0.0, 1.0)), CFG, FoldSpec(3, seed=0))
    ratio = fit.extra["lambda2"] / fit.extra["lambda1"]
    assert fit.extra["ratio"] == pytest.approx(ratio)
    assert_allclose(fit.penalty_factors, np.r_[np.ones(d.p1), np.full(d.p2, ratio)])


def test_folds_shape_checked(rng):
    d = random_data(rng, n=30)
    with pytest.raises(ValueError, match="one entry per observation"):
        fit_coop(d, [0.0], CFG, folds=np.zeros(5, dtype=int))
