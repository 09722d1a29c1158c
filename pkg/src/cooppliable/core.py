"""Domain types, preprocessing, prediction and objective functions.

Every fitting path in the package reduces to the same pliable model: each
main effect ``X_j`` carries a coefficient ``beta_j`` that is modified
linearly by the columns of ``Z`` through the row ``theta_j``::

    yhat = sum_j X_j * (beta_j + Z @ theta_j)

No intercept is fitted; the response is centered instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_matrix(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {a.shape}")
    return a


def _check_finite(a, name):
    bad = ~np.isfinite(a)
    if bad.any():
        if a.ndim == 1:
            raise ValueError(f"{name} has non-finite entry at index {int(np.argmax(bad))}")
        rows, cols = np.nonzero(bad)
        raise ValueError(
            f"{name} has non-finite entry in column {int(cols[0])} (row {int(rows[0])})"
        )


@dataclass(frozen=True)
class MultiViewData:
    """Two feature sources, shared modifiers and a response.

    Parameters
    ----------
    X1 : array of shape (n, p1)
    X2 : array of shape (n, p2)
    Z : array of shape (n, K)
        Modifying variables shared by both sources.
    y : array of shape (n,)
    """

    X1: np.ndarray
    X2: np.ndarray
    Z: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X1 = _as_matrix(self.X1, "X1")
        X2 = _as_matrix(self.X2, "X2")
        Z = _as_matrix(self.Z, "Z")
        y = np.asarray(self.y, dtype=np.float64).ravel()
        n = y.shape[0]
        for name, m in (("X1", X1), ("X2", X2), ("Z", Z)):
            if m.shape[0] != n:
                raise ValueError(f"{name} has {m.shape[0]} rows, y has {n}")
            if m.shape[1] < 1:
                raise ValueError(f"{name} must have at least one column")
        if n < 2:
            raise ValueError("need at least two observations")
        for name, m in (("X1", X1), ("X2", X2), ("Z", Z), ("y", y)):
            _check_finite(m, name)
        object.__setattr__(self, "X1", X1)
        object.__setattr__(self, "X2", X2)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def p1(self):
        return self.X1.shape[1]

    @property
    def p2(self):
        return self.X2.shape[1]

    @property
    def K(self):
        return self.Z.shape[1]

    def subset(self, rows):
        rows = np.asarray(rows)
        return MultiViewData(self.X1[rows], self.X2[rows], self.Z[rows], self.y[rows])

    def design(self, sources):
        """Column-stack the requested sources (1, 2 or both)."""
        mats = {1: self.X1, 2: self.X2}
        return np.hstack([mats[s] for s in sources])


@dataclass(frozen=True)
class Preprocessing:
    """Column centers/scales needed to map raw inputs onto the fitted scale.

    ``*_constant`` flags mark zero-variance columns; those keep scale 1.
    """

    x1_center: np.ndarray
    x1_scale: np.ndarray
    x2_center: np.ndarray
    x2_scale: np.ndarray
    z_center: np.ndarray
    z_scale: np.ndarray
    y_center: float
    x1_constant: np.ndarray
    x2_constant: np.ndarray
    z_constant: np.ndarray

    def transform(self, data):
        """Apply the stored centering/scaling to new data (y included)."""
        return MultiViewData(
            (data.X1 - self.x1_center) / self.x1_scale,
            (data.X2 - self.x2_center) / self.x2_scale,
            (data.Z - self.z_center) / self.z_scale,
            data.y - self.y_center,
        )

    def inverse_transform(self, data):
        return MultiViewData(
            data.X1 * self.x1_scale + self.x1_center,
            data.X2 * self.x2_scale + self.x2_center,
            data.Z * self.z_scale + self.z_center,
            data.y + self.y_center,
        )

    def to_dict(self):
        out = {k: getattr(self, k).tolist() for k in (
            "x1_center", "x1_scale", "x2_center", "x2_scale", "z_center", "z_scale",
            "x1_constant", "x2_constant", "z_constant")}
        out["y_center"] = float(self.y_center)
        return out

    @classmethod
    def from_dict(cls, d):
        kw = {k: np.asarray(v, dtype=np.float64) for k, v in d.items()
              if k not in ("y_center", "x1_constant", "x2_constant", "z_constant")}
        for k in ("x1_constant", "x2_constant", "z_constant"):
            kw[k] = np.asarray(d[k], dtype=bool)
        return cls(y_center=float(d["y_center"]), **kw)


def _column_stats(M, standardize):
    p = M.shape[1]
    if not standardize:
        return np.zeros(p), np.ones(p), np.zeros(p, dtype=bool)
    center = M.mean(axis=0)
    scale = M.std(axis=0, ddof=1)
    constant = ~(scale > 0)
    scale = np.where(constant, 1.0, scale)
    return center, scale, constant


def prepare(data, standardize=True, standardize_z=False):
    """Center the response and optionally standardize the feature columns.

    Parameters
    ----------
    data : MultiViewData
    standardize : bool
        Center and scale every column of ``X1`` and ``X2`` to unit sample SD.
    standardize_z : bool
        Same for ``Z``. Off by default so that indicator-coded modifiers
        keep their coding.

    Returns
    -------
    prepared : MultiViewData
    record : Preprocessing
    """
    c1, s1, k1 = _column_stats(data.X1, standardize)
    c2, s2, k2 = _column_stats(data.X2, standardize)
    cz, sz, kz = _column_stats(data.Z, standardize_z)
    record = Preprocessing(c1, s1, c2, s2, cz, sz, float(data.y.mean()), k1, k2, kz)
    return record.transform(data), record


@dataclass(frozen=True)
class PliableCoefs:
    """Main effects ``beta`` (p,) and modifier interactions ``theta`` (p, K)."""

    beta: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64).ravel()
        theta = np.asarray(self.theta, dtype=np.float64)
        if theta.ndim == 1:
            theta = theta.reshape(beta.shape[0], -1)
        if theta.shape[0] != beta.shape[0]:
            raise ValueError(f"theta has {theta.shape[0]} rows, beta has {beta.shape[0]}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def zeros(cls, p, K):
        return cls(np.zeros(p), np.zeros((p, K)))

    @property
    def p(self):
        return self.beta.shape[0]

    @property
    def K(self):
        return self.theta.shape[1]

    def hierarchy_ok(self):
        """True when no interaction row is nonzero under a zero main effect."""
        return not np.any((self.beta == 0) & np.any(self.theta != 0, axis=1))

    def split(self, p1):
        return (PliableCoefs(self.beta[:p1], self.theta[:p1]),
                PliableCoefs(self.beta[p1:], self.theta[p1:]))

    @classmethod
    def concat(cls, *parts):
        return cls(np.concatenate([c.beta for c in parts]),
                   np.vstack([c.theta for c in parts]))


def predict(coefs, X, Z, y_center=0.0):
    """Evaluate ``sum_j X_j * (beta_j + Z theta_j) + y_center``.

    ``X`` and ``Z`` must already be on the fitted (preprocessed) scale.
    """
    X = np.asarray(X, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    if X.shape[1] != coefs.p:
        raise ValueError(f"X has {X.shape[1]} columns, coefficients have {coefs.p}")
    if Z.shape[1] != coefs.K:
        raise ValueError(f"Z has {Z.shape[1]} columns, coefficients have {coefs.K}")
    if X.shape[0] != Z.shape[0]:
        raise ValueError("X and Z row counts differ")
    # sum_j X_ij (beta_j + sum_k Z_ik theta_jk) = X beta + rowsum(Z * (X theta))
    return X @ coefs.beta + np.einsum("ik,ik->i", Z, X @ coefs.theta) + y_center


@dataclass(frozen=True)
class PliableProblem:
    """A single-design pliable-lasso instance.

    ``obs_index`` maps every row to the observation it belongs to and
    ``response_mask`` marks rows carrying a real response. Plain problems
    have one row per observation; the cooperative augmentation adds an
    agreement twin per observation (``response_mask`` False). The squared
    error is normalized by the number of observations, not rows.
    """

    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray
    penalty_factors: np.ndarray = None
    alpha: float = 0.5
    obs_index: np.ndarray = None
    response_mask: np.ndarray = None

    def __post_init__(self):
        X = _as_matrix(self.X, "X")
        Z = _as_matrix(self.Z, "Z")
        y = np.asarray(self.y, dtype=np.float64).ravel()
        N, p = X.shape
        if Z.shape[0] != N or y.shape[0] != N:
            raise ValueError("X, Z and y must have the same number of rows")
        pf = np.ones(p) if self.penalty_factors is None else np.asarray(
            self.penalty_factors, dtype=np.float64).ravel()
        if pf.shape != (p,):
            raise ValueError(f"penalty_factors must have length {p}")
        if np.any(~np.isfinite(pf)) or np.any(pf <= 0):
            raise ValueError("penalty factors must be finite and strictly positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        obs = np.arange(N) if self.obs_index is None else np.asarray(self.obs_index, dtype=np.intp)
        mask = np.ones(N, dtype=bool) if self.response_mask is None else np.asarray(
            self.response_mask, dtype=bool)
        if obs.shape != (N,) or mask.shape != (N,):
            raise ValueError("obs_index and response_mask must have one entry per row")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "penalty_factors", pf)
        object.__setattr__(self, "obs_index", obs)
        object.__setattr__(self, "response_mask", mask)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n_obs(self):
        return int(np.count_nonzero(self.response_mask))

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def K(self):
        return self.Z.shape[1]

    def observation_rows(self, observations):
        """Sub-problem restricted to rows of the given observations."""
        keep = np.isin(self.obs_index, observations)
        return PliableProblem(self.X[keep], self.Z[keep], self.y[keep],
                              self.penalty_factors, self.alpha,
                              self.obs_index[keep], self.response_mask[keep])


def pliable_penalty(coefs, lam, alpha, penalty_factors=None):
    """Per-feature-weighted pliable penalty."""
    pf = np.ones(coefs.p) if penalty_factors is None else np.asarray(penalty_factors)
    beta, theta = coefs.beta, coefs.theta
    group = np.sqrt(beta ** 2 + np.sum(theta ** 2, axis=1))
    inner = np.sqrt(np.sum(theta ** 2, axis=1))
    l1 = np.sum(np.abs(theta), axis=1)
    return float(lam * np.sum(pf * ((1 - alpha) * (group + inner) + alpha * l1)))


def pliable_objective(problem, coefs, lam):
    """Squared error over ``2 * n_obs`` plus the pliable penalty."""
    resid = problem.y - predict(coefs, problem.X, problem.Z)
    loss = resid @ resid / (2.0 * problem.n_obs)
    return float(loss + pliable_penalty(coefs, lam, problem.alpha, problem.penalty_factors))


def coop_objective(data, coefs1, coefs2, rho, lam, alpha, penalty_factors=None):
    """Cooperative objective for two sources on prepared data.

    The fit term and the agreement term (main effects only) are both
    normalized by ``2 n`` so that the value coincides with
    :func:`pliable_objective` of the augmented problem.
    """
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    f1 = predict(coefs1, data.X1, data.Z)
    f2 = predict(coefs2, data.X2, data.Z)
    resid = data.y - f1 - f2
    gap = data.X1 @ coefs1.beta - data.X2 @ coefs2.beta
    n = data.n
    loss = (resid @ resid + rho * (gap @ gap)) / (2.0 * n)
    pf = np.ones(coefs1.p + coefs2.p) if penalty_factors is None else np.asarray(penalty_factors)
    pen = (pliable_penalty(coefs1, lam, alpha, pf[:coefs1.p])
           + pliable_penalty(coefs2, lam, alpha, pf[coefs1.p:]))
    return float(loss + pen)


@dataclass(frozen=True)
class TwoSourceModel:
    """Fitted predictor over both sources on the preprocessed scale.

    Predictions are ``w1 * f1(X1, Z) + w2 * f2(X2, Z) + y_center``; all
    methods (single source, fusion, cooperative) are expressed this way,
    with zero blocks for unused sources and unit weights except for late
    fusion.
    """

    coefs1: PliableCoefs
    coefs2: PliableCoefs
    preprocessing: Preprocessing
    weights: tuple = (1.0, 1.0)

    def predict(self, data, preprocessed=False):
        d = data if preprocessed else self.preprocessing.transform(data)
        w1, w2 = self.weights
        f = w1 * predict(self.coefs1, d.X1, d.Z) + w2 * predict(self.coefs2, d.X2, d.Z)
        return f + self.preprocessing.y_center


@dataclass(frozen=True)
class CoopFit:
    """Result of a cooperative fit over a grid of agreement weights.

    ``cv_surface[i, l]`` is the mean CV error at ``rhos[i]`` and
    ``lambdas[i, l]``; each rho has its own lambda path.
    """

    beta1: np.ndarray
    theta1: np.ndarray
    beta2: np.ndarray
    theta2: np.ndarray
    rho: float
    lam: float
    alpha: float
    rhos: np.ndarray
    lambdas: np.ndarray
    cv_surface: np.ndarray
    cv_se: np.ndarray
    preprocessing: Preprocessing
    folds: np.ndarray
    path: object = None
    penalty_factors: np.ndarray = None
    extra: dict = field(default_factory=dict)

    @property
    def model(self):
        return TwoSourceModel(PliableCoefs(self.beta1, self.theta1),
                              PliableCoefs(self.beta2, self.theta2), self.preprocessing)

    def predict(self, data, preprocessed=False):
        return self.model.predict(data, preprocessed)
