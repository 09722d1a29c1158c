"""Blockwise coordinate descent for the pliable lasso.

For block ``j`` with penalty factor ``w`` the subproblem is::

    (1 / 2n) ||r - X_j b - W_j t||^2
        + (1 - alpha) lam w (||(b, t)|| + ||t||) + alpha lam w ||t||_1

with ``W_j = X_j * Z`` and ``r`` the partial residual. Writing
``a = X_j' r / n``, ``c = W_j' r / n``, ``A = (1 - alpha) lam w`` and
``B = alpha lam w`` the block is screened as follows:

* zero block iff ``a^2 + max(||S(c, B)|| - A, 0)^2 <= A^2``;
* otherwise ``b = S(a, A) / (X_j'X_j / n)`` with ``t = 0`` is accepted iff
  ``||S(c - b W_j'X_j / n, B)|| <= A``;
* otherwise the full block is solved by accelerated proximal gradient.

``S`` is soft-thresholding. Both tests come from the subgradient
equations; ties resolve toward the sparser model.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import PliableCoefs, pliable_objective, predict


class ConvergenceError(RuntimeError):
    """Raised when the solver exhausts ``max_iter`` without converging."""


class DegeneratePathError(ValueError):
    """Raised when no positive lambda_max exists (e.g. a zero response)."""


@dataclass(frozen=True)
class SolverConfig:
    n_lambda: int = 50
    lambda_min_ratio: float = None
    alpha: float = 0.5
    max_iter: int = 10000
    conv_tol: float = 1e-5
    kkt_tol: float = 1e-4
    block_tol: float = 1e-10
    block_max_iter: int = 20000
    kkt_refine: int = 8

    def __post_init__(self):
        if self.n_lambda < 1 or self.max_iter < 1 or self.block_max_iter < 1:
            raise ValueError("iteration counts must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        for name in ("conv_tol", "kkt_tol", "block_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.lambda_min_ratio is not None and not 0 < self.lambda_min_ratio < 1:
            raise ValueError("lambda_min_ratio must lie in (0, 1)")

    def min_ratio(self, n_obs, p):
        if self.lambda_min_ratio is not None:
            return self.lambda_min_ratio
        return 0.01 if n_obs > p else 0.05


def soft_threshold(x, t):
    """``sign(x) * max(|x| - t, 0)``; works elementwise on arrays."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def prox_pliable(beta, theta, step_A, step_B):
    """Proximal operator of ``A (||(b, t)|| + ||t||) + B ||t||_1`` for one block.

    The three norms are nested (coordinates inside ``t`` inside ``(b, t)``),
    so composing their individual proxes from the innermost outwards is
    exact.
    """
    theta = soft_threshold(np.asarray(theta, dtype=np.float64), step_B)
    nt = np.linalg.norm(theta)
    theta = theta * max(0.0, 1.0 - step_A / nt) if nt > 0 else theta
    ng = math.sqrt(beta * beta + theta @ theta)
    if ng <= step_A:
        return 0.0, np.zeros_like(theta)
    s = 1.0 - step_A / ng
    return beta * s, theta * s


# --------------------------------------------------------------------------
# numba kernels
# --------------------------------------------------------------------------

@njit(cache=True)
def _soft(x, t):
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


@njit(cache=True)
def _block_grad(X, Z, r, j, n_obs, c):
    N, K = Z.shape
    a = 0.0
    for k in range(K):
        c[k] = 0.0
    for i in range(N):
        xr = X[i, j] * r[i]
        a += xr
        for k in range(K):
            c[k] += xr * Z[i, k]
    for k in range(K):
        c[k] /= n_obs
    return a / n_obs


@njit(cache=True)
def _zero_ok(a, c, A, B):
    s = 0.0
    for k in range(c.shape[0]):
        v = _soft(c[k], B)
        s += v * v
    t = math.sqrt(s) - A
    if t < 0.0:
        t = 0.0
    return a * a + t * t <= A * A


@njit(cache=True)
def _prox_block(v, A, B):
    K = v.shape[0] - 1
    s = 0.0
    for k in range(1, K + 1):
        v[k] = _soft(v[k], B)
        s += v[k] * v[k]
    nt = math.sqrt(s)
    if nt > 0.0:
        f = 1.0 - A / nt
        if f < 0.0:
            f = 0.0
        for k in range(1, K + 1):
            v[k] *= f
    s = v[0] * v[0]
    for k in range(1, K + 1):
        s += v[k] * v[k]
    ng = math.sqrt(s)
    if ng <= A:
        for k in range(K + 1):
            v[k] = 0.0
    else:
        f = 1.0 - A / ng
        for k in range(K + 1):
            v[k] *= f


@njit(cache=True)
def _block_value(G, g, v, A, B):
    m = v.shape[0]
    q = 0.0
    for u in range(m):
        acc = 0.0
        for w in range(m):
            acc += G[u, w] * v[w]
        q += 0.5 * v[u] * acc - g[u] * v[u]
    s = 0.0
    l1 = 0.0
    for k in range(1, m):
        s += v[k] * v[k]
        l1 += abs(v[k])
    return q + A * (math.sqrt(s + v[0] * v[0]) + math.sqrt(s)) + B * l1


@njit(cache=True)
def _solve_block(G, g, L, v, A, B, tol, max_iter):
    """Accelerated proximal gradient with adaptive restart on one block."""
    m = v.shape[0]
    step = 1.0 / L
    x = v.copy()
    yv = v.copy()
    xn = np.empty(m)
    tk = 1.0
    fold = _block_value(G, g, x, A, B)
    for it in range(max_iter):
        for u in range(m):
            acc = 0.0
            for w in range(m):
                acc += G[u, w] * yv[w]
            xn[u] = yv[u] - step * (acc - g[u])
        _prox_block(xn, A * step, B * step)
        fnew = _block_value(G, g, xn, A, B)
        diff = 0.0
        scale = 1.0
        for u in range(m):
            d = abs(xn[u] - x[u])
            if d > diff:
                diff = d
            if abs(xn[u]) > scale:
                scale = abs(xn[u])
        if fnew > fold:
            if tk == 1.0:
                # a plain step from x no longer decreases: rounding floor
                for u in range(m):
                    v[u] = x[u]
                return True
            # restart momentum from the last accepted iterate
            tk = 1.0
            for u in range(m):
                yv[u] = x[u]
            continue
        tn = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        mom = (tk - 1.0) / tn
        for u in range(m):
            yv[u] = xn[u] + mom * (xn[u] - x[u])
            x[u] = xn[u]
        tk = tn
        fold = fnew
        if diff <= tol * scale:
            for u in range(m):
                v[u] = x[u]
            return True
    for u in range(m):
        v[u] = x[u]
    return False


@njit(cache=True)
def _objective(r, beta, theta, pf, lam, alpha, n_obs):
    rss = 0.0
    for i in range(r.shape[0]):
        rss += r[i] * r[i]
    pen = 0.0
    p, K = theta.shape
    for j in range(p):
        s = 0.0
        l1 = 0.0
        for k in range(K):
            s += theta[j, k] * theta[j, k]
            l1 += abs(theta[j, k])
        pen += pf[j] * ((1.0 - alpha) * (math.sqrt(s + beta[j] * beta[j]) + math.sqrt(s))
                        + alpha * l1)
    return rss / (2.0 * n_obs) + lam * pen


@njit(cache=True)
def _update_residual(X, Z, r, j, b, th, sign):
    N, K = Z.shape
    for i in range(N):
        m = b
        for k in range(K):
            m += Z[i, k] * th[k]
        r[i] += sign * X[i, j] * m


@njit(cache=True)
def _kkt_max(X, Z, r, beta, theta, pf, alpha, lam, n_obs):
    """Largest per-block stationarity violation (same measure as kkt_violations)."""
    p = X.shape[1]
    K = Z.shape[1]
    c = np.empty(K)
    worst = 0.0
    for j in range(p):
        a = _block_grad(X, Z, r, j, n_obs, c)
        A = (1.0 - alpha) * lam * pf[j]
        B = alpha * lam * pf[j]
        b = beta[j]
        nt2 = 0.0
        for k in range(K):
            nt2 += theta[j, k] * theta[j, k]
        if b == 0.0 and nt2 == 0.0:
            s = 0.0
            for k in range(K):
                e = _soft(c[k], B)
                s += e * e
            ex = math.sqrt(s) - A
            if ex < 0.0:
                ex = 0.0
            viol = math.sqrt(a * a + ex * ex) - A
        else:
            ng = math.sqrt(b * b + nt2)
            viol = abs(-a + A * b / ng)
            nt = math.sqrt(nt2)
            if nt > 0.0:
                for k in range(K):
                    t = theta[j, k]
                    gk = -c[k] + A * t / ng + A * t / nt
                    if t > 0.0:
                        e = abs(gk + B)
                    elif t < 0.0:
                        e = abs(gk - B)
                    else:
                        e = abs(_soft(gk, B))
                    if e > viol:
                        viol = e
            else:
                s = 0.0
                for k in range(K):
                    e = _soft(-c[k], B)
                    s += e * e
                e = math.sqrt(s) - A
                if e > viol:
                    viol = e
        if viol > worst:
            worst = viol
    return worst


@njit(cache=True)
def _cd_solve(X, Z, pf, alpha, lam, n_obs, beta, theta, r, grams, lips,
              conv_tol, max_iter, block_tol, block_max_iter, kkt_target):
    """Cyclic block coordinate descent at one lambda (in place).

    Alternates full sweeps with sweeps over the active set; stops when a
    full sweep leaves the active set unchanged, the relative objective
    decrease is below ``conv_tol`` and (if ``kkt_target`` > 0) the largest
    KKT violation is below ``kkt_target``; otherwise the tolerance is
    tightened and sweeping continues. Returns (sweeps, objective,
    converged, objective-increase flag).
    """
    N, p = X.shape
    K = Z.shape[1]
    c = np.empty(K)
    g = np.empty(K + 1)
    v = np.empty(K + 1)
    obj = _objective(r, beta, theta, pf, lam, alpha, n_obs)
    full = True
    increased = False
    for sweep in range(max_iter):
        changed = False
        for j in range(p):
            nonzero = beta[j] != 0.0
            if not nonzero:
                for k in range(K):
                    if theta[j, k] != 0.0:
                        nonzero = True
                        break
            if not full and not nonzero:
                continue
            if nonzero:
                _update_residual(X, Z, r, j, beta[j], theta[j], 1.0)
            A = (1.0 - alpha) * lam * pf[j]
            B = alpha * lam * pf[j]
            a = _block_grad(X, Z, r, j, n_obs, c)
            if _zero_ok(a, c, A, B):
                beta[j] = 0.0
                for k in range(K):
                    theta[j, k] = 0.0
                if nonzero:
                    changed = True
                continue
            G = grams[j]
            done = False
            if G[0, 0] > 0.0:
                b = _soft(a, A) / G[0, 0]
                if b != 0.0:
                    s = 0.0
                    for k in range(K):
                        e = _soft(c[k] - b * G[0, k + 1], B)
                        s += e * e
                    if math.sqrt(s) <= A:
                        beta[j] = b
                        for k in range(K):
                            theta[j, k] = 0.0
                        done = True
            if not done:
                g[0] = a
                v[0] = beta[j]
                for k in range(K):
                    g[k + 1] = c[k]
                    v[k + 1] = theta[j, k]
                _solve_block(G, g, lips[j], v, A, B, block_tol, block_max_iter)
                if v[0] == 0.0:
                    for k in range(K + 1):
                        v[k] = 0.0
                beta[j] = v[0]
                for k in range(K):
                    theta[j, k] = v[k + 1]
            if beta[j] != 0.0:
                _update_residual(X, Z, r, j, beta[j], theta[j], -1.0)
                if not nonzero:
                    changed = True
            elif nonzero:
                changed = True
        new = _objective(r, beta, theta, pf, lam, alpha, n_obs)
        rel = (obj - new) / max(abs(new), 1e-300)
        if rel < -1e-12:
            increased = True
        obj = new
        if rel <= conv_tol:
            if full and not changed:
                if kkt_target <= 0.0 or _kkt_max(X, Z, r, beta, theta, pf, alpha, lam,
                                                 n_obs) <= kkt_target:
                    return sweep + 1, obj, True, increased
                conv_tol *= 0.1
                full = False
            else:
                full = True
        else:
            full = False
    return max_iter, obj, False, increased


@njit(cache=True)
def _lambda_max(X, Z, y, pf, alpha, n_obs):
    N, p = X.shape
    K = Z.shape[1]
    c = np.empty(K)
    best = 0.0
    for j in range(p):
        a = _block_grad(X, Z, y, j, n_obs, c)
        cn = 0.0
        for k in range(K):
            cn += c[k] * c[k]
        cn = math.sqrt(cn)
        if abs(a) == 0.0 and cn == 0.0:
            continue
        if alpha >= 1.0:
            return np.inf
        hi = (abs(a) + cn) / ((1.0 - alpha) * pf[j])
        hi *= 1.0 + 1e-12
        lo = 0.0
        while not _zero_ok(a, c, (1.0 - alpha) * hi * pf[j], alpha * hi * pf[j]):
            hi *= 2.0
        for it in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _zero_ok(a, c, (1.0 - alpha) * mid * pf[j], alpha * mid * pf[j]):
                hi = mid
            else:
                lo = mid
        if hi > best:
            best = hi
    return best


# --------------------------------------------------------------------------
# Python-level API
# --------------------------------------------------------------------------

def _compact(problem):
    """Drop rows that are zero in both X and y; they never affect a fit."""
    keep = np.any(problem.X != 0, axis=1) | (problem.y != 0)
    if keep.all():
        return problem.X, problem.Z, problem.y
    return (np.ascontiguousarray(problem.X[keep]), np.ascontiguousarray(problem.Z[keep]),
            problem.y[keep].copy())


def _block_grams(X, Z, n_obs):
    """Per-feature Gram matrices of ``[X_j, X_j * Z]`` and their top eigenvalue."""
    N, p = X.shape
    K = Z.shape[1]
    ZZ = np.hstack([np.ones((N, 1)), Z])
    X2 = X * X
    # grams[j] = sum_i X_ij^2 ZZ_i ZZ_i' / n
    grams = np.einsum("ij,ik,il->jkl", X2, ZZ, ZZ, optimize=True) / n_obs
    lips = np.linalg.eigvalsh(grams)[:, -1] if p else np.zeros(0)
    lips = np.where(lips > 0, lips, 1.0)
    return np.ascontiguousarray(grams), lips


def lambda_path(problem, config=SolverConfig()):
    """Log-spaced decreasing lambda path starting at lambda_max.

    lambda_max is the smallest lambda at which the zero solution passes the
    block screening test for every feature.
    """
    X, Z, y = _compact(problem)
    lmax = _lambda_max(X, Z, y, problem.penalty_factors, problem.alpha, float(problem.n_obs))
    if not lmax > 0:
        raise DegeneratePathError("lambda_max is zero: the response has no signal to fit")
    if not np.isfinite(lmax):
        raise DegeneratePathError("alpha = 1 leaves main effects unpenalized; no finite lambda_max")
    if config.n_lambda == 1:
        return np.array([lmax])
    ratio = config.min_ratio(problem.n_obs, problem.p)
    return lmax * np.exp(np.linspace(0.0, np.log(ratio), config.n_lambda))


@dataclass(frozen=True)
class PathPoint:
    lam: float
    coefs: PliableCoefs
    objective: float


@dataclass(frozen=True)
class PliableFit:
    """Coefficients along a decreasing lambda path.

    ``betas`` has shape (n_lambda, p) and ``thetas`` (n_lambda, p, K).
    """

    lambdas: np.ndarray
    betas: np.ndarray
    thetas: np.ndarray
    objectives: np.ndarray
    sweeps: np.ndarray
    converged: np.ndarray
    alpha: float
    preprocessing: object = None

    def coefs(self, index):
        return PliableCoefs(self.betas[index], self.thetas[index])

    @property
    def path(self):
        return [PathPoint(float(l), self.coefs(i), float(o))
                for i, (l, o) in enumerate(zip(self.lambdas, self.objectives))]

    def __len__(self):
        return len(self.lambdas)


def fit_path(problem, lambdas=None, config=SolverConfig(), init=None, check_kkt=True,
             debug=False):
    """Fit the pliable lasso along ``lambdas`` with warm starts.

    Parameters
    ----------
    problem : PliableProblem
    lambdas : array, optional
        Strictly decreasing positive values; defaults to :func:`lambda_path`.
    config : SolverConfig
    init : PliableCoefs, optional
        Starting point for the first lambda.
    check_kkt : bool
        Certify every solution with :func:`kkt_check`; solutions failing it
        are refined with a tightened tolerance.
    debug : bool
        Raise if any sweep increases the objective.

    Raises
    ------
    ConvergenceError
        If a lambda exhausts ``config.max_iter`` sweeps.
    """
    if lambdas is None:
        lambdas = lambda_path(problem, config)
    lambdas = np.asarray(lambdas, dtype=np.float64).ravel()
    if np.any(lambdas <= 0) or np.any(np.diff(lambdas) >= 0):
        raise ValueError("lambdas must be positive and strictly decreasing")
    X, Z, y = _compact(problem)
    n_obs = float(problem.n_obs)
    pf = problem.penalty_factors
    alpha = problem.alpha
    p, K = problem.p, problem.K
    grams, lips = _block_grams(X, Z, n_obs)
    if init is None:
        beta = np.zeros(p)
        theta = np.zeros((p, K))
    else:
        beta = init.beta.copy()
        theta = np.ascontiguousarray(init.theta, dtype=np.float64).copy()
    r = y - predict(PliableCoefs(beta, theta), X, Z)

    nl = len(lambdas)
    betas = np.zeros((nl, p))
    thetas = np.zeros((nl, p, K))
    objs = np.zeros(nl)
    sweeps = np.zeros(nl, dtype=np.int64)
    conv = np.zeros(nl, dtype=bool)
    for li, lam in enumerate(lambdas):
        target = 0.5 * config.kkt_tol if check_kkt else 0.0
        total = 0
        for attempt in range(config.kkt_refine + 1):
            it, obj, ok, increased = _cd_solve(
                X, Z, pf, alpha, lam, n_obs, beta, theta, r, grams, lips, config.conv_tol,
                config.max_iter, config.block_tol, config.block_max_iter, target)
            total += it
            if debug and increased:
                raise AssertionError(f"objective increased during a sweep at lambda[{li}]")
            if not ok:
                raise ConvergenceError(
                    f"no convergence at lambda[{li}] = {lam:.6g} after {config.max_iter} sweeps")
            if not check_kkt or not kkt_check(problem, PliableCoefs(beta, theta), lam, config):
                break
            # the running residual drifted; rebuild it and tighten the target
            r = y - predict(PliableCoefs(beta, theta), X, Z)
            target *= 0.1
        else:
            warnings.warn(f"KKT violations remain at lambda[{li}] = {lam:.6g}", RuntimeWarning)
        betas[li] = beta
        thetas[li] = theta
        objs[li] = obj
        sweeps[li] = total
        conv[li] = True
    fit = PliableFit(lambdas, betas, thetas, objs, sweeps, conv, alpha)
    for callback in tuple(_FIT_OBSERVERS):
        callback(problem, fit)
    return fit


_FIT_OBSERVERS = []


def add_fit_observer(callback):
    """Call ``callback(problem, fit)`` after every :func:`fit_path` call.

    Meant for auditing (for example re-checking KKT conditions across a
    whole test run). Returns a function that removes the observer.
    """
    _FIT_OBSERVERS.append(callback)
    return lambda: _FIT_OBSERVERS.remove(callback)


def kkt_violations(problem, coefs, lam):
    """Per-block stationarity violation (0 for certified blocks).

    For a zero block this is how far the screening inequality fails; for a
    nonzero block it is the max-norm of the smallest gradient-plus-subgradient
    residual.
    """
    n = problem.n_obs
    X, Z = problem.X, problem.Z
    r = problem.y - predict(coefs, X, Z)
    a = X.T @ r / n
    c = (X * r[:, None]).T @ Z / n
    alpha = problem.alpha
    pf = problem.penalty_factors
    beta, theta = coefs.beta, coefs.theta
    out = np.zeros(problem.p)
    for j in range(problem.p):
        A = (1 - alpha) * lam * pf[j]
        B = alpha * lam * pf[j]
        b, t = beta[j], theta[j]
        if b == 0 and not np.any(t):
            excess = max(np.linalg.norm(soft_threshold(c[j], B)) - A, 0.0)
            out[j] = max(math.hypot(a[j], excess) - A, 0.0)
            continue
        ng = math.sqrt(b * b + t @ t)
        res_b = -a[j] + A * b / ng
        gt = -c[j] + A * t / ng
        nt = np.linalg.norm(t)
        if nt > 0:
            gt = gt + A * t / nt
            on = t != 0
            res_t = np.where(on, gt + B * np.sign(t), 0.0)
            res_t[~on] = soft_threshold(gt[~on], B)
            viol = max(abs(res_b), np.max(np.abs(res_t)) if res_t.size else 0.0)
        else:
            viol = max(abs(res_b), max(np.linalg.norm(soft_threshold(gt, B)) - A, 0.0))
        out[j] = viol
    return out


def kkt_check(problem, coefs, lam, config=SolverConfig()):
    """Blocks whose KKT violation exceeds ``config.kkt_tol``.

    Returns a list of ``(block index, violation)``; empty means the point is
    certified stationary.
    """
    v = kkt_violations(problem, coefs, lam)
    return [(int(j), float(v[j])) for j in np.nonzero(v > config.kkt_tol)[0]]


def oracle_solve(problem, lam, config=SolverConfig(), tol=1e-9, max_iter=200000):
    """Reference solution by proximal gradient on the full coefficient vector.

    Slow and deliberately independent of the coordinate-descent code path:
    the smooth part uses the explicit interaction design, steps are found by
    backtracking, and the exact nested prox is applied feature by feature.
    Intended for small problems only.
    """
    X, Z, y = problem.X, problem.Z, problem.y
    N, p = X.shape
    K = Z.shape[1]
    n = problem.n_obs
    alpha = problem.alpha
    pf = problem.penalty_factors
    # columns: [X_1..X_p, W_1 (K cols), ..., W_p]
    W = (X[:, :, None] * Z[:, None, :]).reshape(N, p * K)
    D = np.hstack([X, W])

    def split(v):
        return v[:p], v[p:].reshape(p, K)

    def smooth(v):
        res = y - D @ v
        return res @ res / (2 * n), -(D.T @ res) / n

    def prox(v, step):
        b, t = split(v)
        nb = np.empty(p)
        nt = np.empty((p, K))
        for j in range(p):
            nb[j], nt[j] = prox_pliable(b[j], t[j], step * (1 - alpha) * lam * pf[j],
                                        step * alpha * lam * pf[j])
        return np.concatenate([nb, nt.ravel()])

    def total(v):
        b, t = split(v)
        return smooth(v)[0] + float(np.sum(pf * lam * (
            (1 - alpha) * (np.sqrt(b ** 2 + np.sum(t ** 2, 1)) + np.sqrt(np.sum(t ** 2, 1)))
            + alpha * np.sum(np.abs(t), 1))))

    x = np.zeros(p * (K + 1))
    yv = x.copy()
    tk = 1.0
    step = 1.0
    fx = total(x)
    converged = False
    for it in range(max_iter):
        f_y, g_y = smooth(yv)
        while True:
            xn = prox(yv - step * g_y, step)
            d = xn - yv
            f_n = smooth(xn)[0]
            if f_n <= f_y + g_y @ d + (d @ d) / (2 * step) + 1e-15 * abs(f_y):
                break
            step *= 0.5
        fn = total(xn)
        gm = np.max(np.abs(d)) / step if d.size else 0.0
        if gm <= tol * max(1.0, np.max(np.abs(xn))):
            x = xn if fn <= fx else x
            converged = True
            break
        if fn > fx:
            if tk == 1.0:
                # a plain prox step from x no longer decreases: rounding floor
                converged = gm <= 1e3 * tol * max(1.0, np.max(np.abs(x)))
                break
            yv = x.copy()
            tk = 1.0
            continue
        tn = 0.5 * (1 + math.sqrt(1 + 4 * tk * tk))
        yv = xn + ((tk - 1) / tn) * (xn - x)
        x, fx, tk = xn, fn, tn
        step *= 1.1
    if not converged:
        warnings.warn("oracle_solve did not reach its tolerance", RuntimeWarning)
    b, t = split(x)
    return PliableCoefs(b.copy(), t.copy())
