import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from cooppliable.core import PliableCoefs, PliableProblem, pliable_objective
from cooppliable.solver import (ConvergenceError, DegeneratePathError, SolverConfig, fit_path,
                                kkt_check, kkt_violations, lambda_path, oracle_solve,
                                prox_pliable, soft_threshold)


def _problem(rng, n=40, p=6, K=2, alpha=0.5, pf=None):
    X = rng.standard_normal((n, p))
    Z = rng.standard_normal((n, K))
    y = 2 * X[:, 0] + X[:, 1] * Z[:, 0] - X[:, 2] + 0.5 * rng.standard_normal(n)
    return PliableProblem(X, Z, y - y.mean(), pf, alpha)


def test_soft_threshold():
    assert_allclose(soft_threshold(np.array([-3.0, -0.5, 0.0, 2.0]), 1.0), [-2, 0, 0, 1])
    with pytest.raises(ValueError):
        soft_threshold(1.0, -1.0)


def _prox_value(b, t, u_b, u_t, A, B):
    return (0.5 * ((b - u_b) ** 2 + np.sum((t - u_t) ** 2))
            + A * (np.hypot(b, np.linalg.norm(t)) + np.linalg.norm(t)) + B * np.sum(np.abs(t)))


@pytest.mark.parametrize("seed", range(6))
def test_prox_is_a_minimizer(seed):
    rng = np.random.default_rng(seed)
    u_b, u_t = rng.standard_normal(), 2 * rng.standard_normal(3)
    A, B = rng.uniform(0, 1), rng.uniform(0, 1)
    b, t = prox_pliable(u_b, u_t, A, B)
    best = _prox_value(b, t, u_b, u_t, A, B)
    # the prox objective is strongly convex; no nearby point may do better
    for _ in range(2000):
        db = 0.05 * rng.standard_normal()
        dt = 0.05 * rng.standard_normal(3)
        assert _prox_value(b + db, t + dt, u_b, u_t, A, B) >= best - 1e-12


def test_prox_zero_and_beta_only_regions():
    b, t = prox_pliable(0.5, np.array([0.1, -0.1]), 1.0, 0.0)
    assert b == 0.0 and not t.any()
    # theta killed by the l1 part, beta shrunk by the outer group
    b, t = prox_pliable(3.0, np.array([0.2, -0.1]), 1.0, 0.5)
    assert b == pytest.approx(2.0) and not t.any()


def test_orthogonal_design_with_inert_modifier_is_a_lasso():
    # Z = 0 removes every interaction; the fit reduces to a lasso with
    # penalty (1 - alpha) lambda, solved in closed form for X'X / n = I.
    n, p = 16, 4
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((n, p)))
    X = Q * np.sqrt(n)
    y = X @ np.array([3.0, -1.0, 0.2, 0.0]) + 0.1 * np.random.default_rng(1).standard_normal(n)
    prob = PliableProblem(X, np.zeros((n, 1)), y, alpha=0.4)
    lams = np.array([2.0, 1.0, 0.3])
    fit = fit_path(prob, lams, SolverConfig(alpha=0.4, conv_tol=1e-10))
    for i, lam in enumerate(lams):
        assert_allclose(fit.betas[i], soft_threshold(X.T @ y / n, 0.6 * lam), atol=1e-8)
        assert not fit.thetas[i].any()


def test_lambda_max_is_the_first_zero_solution(rng):
    prob = _problem(rng)
    lams = lambda_path(prob, SolverConfig(n_lambda=5))
    lmax = lams[0]
    zero = PliableCoefs.zeros(prob.p, prob.K)
    assert not kkt_check(prob, zero, lmax)
    assert kkt_check(prob, zero, lmax * 0.99)
    fit = fit_path(prob, lams)
    assert not fit.betas[0].any() and fit.betas[1].any()


def test_lambda_path_shape_and_ratio(rng):
    prob = _problem(rng, n=40, p=6)
    lams = lambda_path(prob, SolverConfig(n_lambda=7))
    assert len(lams) == 7 and np.all(np.diff(lams) < 0)
    assert lams[-1] / lams[0] == pytest.approx(0.01)
    wide = _problem(rng, n=10, p=20)
    lams = lambda_path(wide, SolverConfig(n_lambda=3))
    assert lams[-1] / lams[0] == pytest.approx(0.05)


def test_degenerate_paths(rng):
    prob = _problem(rng)
    with pytest.raises(DegeneratePathError, match="no signal"):
        lambda_path(PliableProblem(prob.X, prob.Z, np.zeros(prob.X.shape[0])))
    with pytest.raises(DegeneratePathError, match="alpha = 1"):
        lambda_path(PliableProblem(prob.X, prob.Z, prob.y, alpha=1.0))


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.5, 0.9])
def test_matches_oracle(alpha):
    rng = np.random.default_rng(int(alpha * 10))
    pf = rng.uniform(0.5, 2.0, 6)
    prob = _problem(rng, alpha=alpha, pf=pf)
    lams = lambda_path(prob, SolverConfig(n_lambda=8))[[1, 3, 6]]
    fit = fit_path(prob, lams, SolverConfig(alpha=alpha))
    for i, lam in enumerate(lams):
        oracle = oracle_solve(prob, lam)
        f_cd = pliable_objective(prob, fit.coefs(i), lam)
        f_or = pliable_objective(prob, oracle, lam)
        assert abs(f_cd - f_or) <= 1e-6 * (1 + abs(f_or))
        assert_allclose(fit.betas[i], oracle.beta, atol=1e-3)


def test_every_path_point_is_certified_and_hierarchical(rng):
    prob = _problem(rng, p=10, K=3)
    fit = fit_path(prob)
    for i, lam in enumerate(fit.lambdas):
        c = fit.coefs(i)
        assert not kkt_check(prob, c, lam)
        assert c.hierarchy_ok()
    assert fit.converged.all()


def test_violations_detect_a_perturbed_solution(rng):
    prob = _problem(rng)
    lam = lambda_path(prob, SolverConfig(n_lambda=5))[2]
    fit = fit_path(prob, [lam])
    c = fit.coefs(0)
    assert np.max(kkt_violations(prob, c, lam)) < 1e-4
    moved = PliableCoefs(c.beta + 0.1, c.theta)
    assert np.max(kkt_violations(prob, moved, lam)) > 1e-3


def test_warm_start_at_the_solution_stays_put(rng):
    prob = _problem(rng)
    lam = lambda_path(prob, SolverConfig(n_lambda=5))[3]
    first = fit_path(prob, [lam], SolverConfig(conv_tol=1e-9))
    again = fit_path(prob, [lam], SolverConfig(conv_tol=1e-9), init=first.coefs(0))
    assert_allclose(again.betas, first.betas, atol=1e-5)


def test_sweeps_never_increase_the_objective(rng):
    prob = _problem(rng, p=8, K=3, alpha=0.2)
    fit_path(prob, config=SolverConfig(alpha=0.2, n_lambda=15), debug=True)


def test_sweep_limit_raises(rng):
    prob = _problem(rng, p=8, K=3)
    lams = lambda_path(prob)[[-1]]
    with pytest.raises(ConvergenceError, match="no convergence"):
        fit_path(prob, lams, SolverConfig(max_iter=1, conv_tol=1e-12))


def test_rejects_increasing_lambdas(rng):
    with pytest.raises(ValueError, match="decreasing"):
        fit_path(_problem(rng), [0.1, 0.2])


def test_agreement_rows_without_response_are_handled(rng):
    # rows with zero design and zero response change nothing
    prob = _problem(rng)
    n = prob.X.shape[0]
    padded = PliableProblem(np.vstack([prob.X, np.zeros((5, prob.p))]),
                            np.vstack([prob.Z, np.ones((5, prob.K))]),
                            np.concatenate([prob.y, np.zeros(5)]),
                            obs_index=np.concatenate([np.arange(n), np.arange(5)]),
                            response_mask=np.r_[np.ones(n, bool), np.zeros(5, bool)])
    lams = lambda_path(prob, SolverConfig(n_lambda=6))
    assert_array_equal(fit_path(padded, lams).betas, fit_path(prob, lams).betas)
