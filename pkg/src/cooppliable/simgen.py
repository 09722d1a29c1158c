"""Latent-factor simulation of two correlated sources with modifier interactions.

Each source column and each modifier starts as i.i.d. standard normal.
For the first ``p_u`` columns a shared latent vector ``u_i`` is added,
scaled by ``t1`` in source 1 and ``t2`` in source 2, so that::

    corr(x1_i, x2_i) = t1 t2 / sqrt((1 + t1^2)(1 + t2^2))

Modifier ``z_i`` (for the first ``K - 1`` modifiers, counting from one,
i.e. ``i < K``) also receives ``u_i``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .core import MultiViewData


@dataclass(frozen=True)
class SimScenario:
    """Generator parameters.

    When ``beta1`` etc. are None the coefficients follow the sparse
    pattern: ``n_main`` nonzero main effects in the leading columns with
    alternating sign and size ``magnitude``; the first ``n_interacting``
    of them interact with the first ``n_modifying`` modifiers with
    alternating-sign entries of size ``interaction_magnitude`` (defaults to
    ``magnitude``). ``signal_sources`` lists the
    sources that carry signal.
    """

    n: int = 500
    n_test: int = 9800
    p1: int = 100
    p2: int = 100
    K: int = 4
    p_u: int = 20
    t1: float = 2.0
    t2: float = 2.0
    sigma: float = 1.0
    seed: int = 0
    n_main: int = 10
    n_interacting: int = 4
    n_modifying: int = 2
    magnitude: float = 2.0
    interaction_magnitude: float = None
    signal_sources: tuple = (1, 2)
    beta1: np.ndarray = None
    theta1: np.ndarray = None
    beta2: np.ndarray = None
    theta2: np.ndarray = None
    literal_step2: bool = False
    name: str = "custom"
    target_snr: float = None

    def __post_init__(self):
        if self.n < 2 or self.n_test < 0:
            raise ValueError("need n >= 2 training rows and n_test >= 0")
        if min(self.p1, self.p2, self.K) < 1:
            raise ValueError("p1, p2 and K must be positive")
        if not (0 <= self.p_u < self.p1 and self.p_u < self.p2):
            raise ValueError("p_u must be smaller than both p1 and p2")
        if self.t1 < 0 or self.t2 < 0:
            raise ValueError("t1 and t2 must be nonnegative")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.n_main > min(self.p1, self.p2) or self.n_interacting > self.n_main:
            raise ValueError("sparse pattern does not fit the dimensions")
        if self.n_modifying > self.K:
            raise ValueError("more modifying variables than K")

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class SimTruth:
    beta1: np.ndarray
    theta1: np.ndarray
    beta2: np.ndarray
    theta2: np.ndarray
    snr: float
    sigma: float

    @property
    def main_support1(self):
        return np.flatnonzero(self.beta1)

    @property
    def main_support2(self):
        return np.flatnonzero(self.beta2)

    @property
    def interaction_support1(self):
        return np.argwhere(self.theta1 != 0)

    @property
    def interaction_support2(self):
        return np.argwhere(self.theta2 != 0)

    @property
    def main_mask(self):
        """Pooled main-effect support over both sources (length p1 + p2)."""
        return np.concatenate([self.beta1 != 0, self.beta2 != 0])

    @property
    def interaction_mask(self):
        return np.concatenate([(self.theta1 != 0).ravel(), (self.theta2 != 0).ravel()])

    def to_dict(self):
        return {
            "beta1": self.beta1.tolist(), "theta1": self.theta1.tolist(),
            "beta2": self.beta2.tolist(), "theta2": self.theta2.tolist(),
            "main_support1": self.main_support1.tolist(),
            "main_support2": self.main_support2.tolist(),
            "interaction_support1": self.interaction_support1.tolist(),
            "interaction_support2": self.interaction_support2.tolist(),
            "snr": self.snr, "sigma": self.sigma,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["beta1"], float), np.asarray(d["theta1"], float),
                   np.asarray(d["beta2"], float), np.asarray(d["theta2"], float),
                   float(d["snr"]), float(d["sigma"]))


def _pattern(p, K, sc):
    beta = np.zeros(p)
    theta = np.zeros((p, K))
    signs = np.where(np.arange(sc.n_main) % 2 == 0, 1.0, -1.0)
    beta[:sc.n_main] = sc.magnitude * signs
    size = sc.magnitude if sc.interaction_magnitude is None else sc.interaction_magnitude
    for j in range(sc.n_interacting):
        for k in range(sc.n_modifying):
            theta[j, k] = size * (1.0 if (j + k) % 2 == 0 else -1.0)
    return beta, theta


def true_coefficients(sc):
    """The scenario's true (beta1, theta1, beta2, theta2)."""
    out = []
    for src, p, b, t in ((1, sc.p1, sc.beta1, sc.theta1), (2, sc.p2, sc.beta2, sc.theta2)):
        if b is not None:
            b = np.asarray(b, float)
            t = np.zeros((p, sc.K)) if t is None else np.asarray(t, float)
        elif src in sc.signal_sources:
            b, t = _pattern(p, sc.K, sc)
        else:
            b, t = np.zeros(p), np.zeros((p, sc.K))
        if b.shape != (p,) or t.shape != (p, sc.K):
            raise ValueError(f"source {src} coefficients have the wrong shape")
        out += [b, t]
    return tuple(out)


def signal(X1, X2, Z, beta1, theta1, beta2, theta2):
    """Noiseless response: main effects plus ``(X_j * Z) theta_j`` terms."""
    return (X1 @ beta1 + np.einsum("ik,ik->i", Z, X1 @ theta1)
            + X2 @ beta2 + np.einsum("ik,ik->i", Z, X2 @ theta2))


def _draw(sc, n_rows, rng):
    X1 = rng.standard_normal((n_rows, sc.p1))
    X2 = rng.standard_normal((n_rows, sc.p2))
    Z = rng.standard_normal((n_rows, sc.K))
    for i in range(sc.p_u):
        u = rng.standard_normal(n_rows)
        X1[:, i] += sc.t1 * u
        X2[:, i] = (X1[:, i] if sc.literal_step2 else X2[:, i]) + sc.t2 * u
        # modifiers are counted from one: z_i gets u_i for i < K
        if i + 1 < sc.K:
            Z[:, i] += u
    return X1, X2, Z


def generate(sc):
    """Draw train and test sets jointly and split them.

    Returns
    -------
    train : MultiViewData
    test : MultiViewData or None
        None when ``n_test == 0``.
    truth : SimTruth
        Realized SNR is computed over the joint sample.
    """
    rng = np.random.default_rng(sc.seed)
    N = sc.n + sc.n_test
    X1, X2, Z = _draw(sc, N, rng)
    coefs = true_coefficients(sc)
    f = signal(X1, X2, Z, *coefs)
    y = f + sc.sigma * rng.standard_normal(N)
    snr = float(np.var(f) / sc.sigma ** 2)
    truth = SimTruth(*coefs, snr=snr, sigma=sc.sigma)
    tr = slice(0, sc.n)
    te = slice(sc.n, N)
    train = MultiViewData(X1[tr], X2[tr], Z[tr], y[tr])
    test = MultiViewData(X1[te], X2[te], Z[te], y[te]) if sc.n_test else None
    return train, test, truth


def compute_snr(data, truth, sigma):
    """Empirical ``Var(signal) / sigma^2`` on the rows of ``data``."""
    f = signal(data.X1, data.X2, data.Z, truth.beta1, truth.theta1, truth.beta2, truth.theta2)
    return float(np.var(f) / sigma ** 2)


CALIBRATION_ROWS = 200_000
CALIBRATION_SEED = 20231


def calibrate_sigma(sc, target_snr, rows=CALIBRATION_ROWS, seed=CALIBRATION_SEED):
    """Noise level giving ``target_snr`` for the scenario's signal.

    The signal variance is estimated on a large pilot sample restricted to
    the columns that can carry signal or latent structure; the ratio is then
    solved in closed form.
    """
    b1, t1, b2, t2 = true_coefficients(sc)
    need1 = max(sc.p_u, int(np.max(np.flatnonzero(b1), initial=-1)) + 1) + 1
    need2 = max(sc.p_u, int(np.max(np.flatnonzero(b2), initial=-1)) + 1) + 1
    q1, q2 = min(sc.p1, need1), min(sc.p2, need2)
    pilot = sc.replace(p1=q1, p2=q2, beta1=b1[:q1], theta1=t1[:q1], beta2=b2[:q2],
                       theta2=t2[:q2], n_main=min(sc.n_main, q1, q2),
                       n_interacting=min(sc.n_interacting, q1, q2))
    X1, X2, Z = _draw(pilot, rows, np.random.default_rng(seed))
    var = np.var(signal(X1, X2, Z, b1[:q1], t1[:q1], b2[:q2], t2[:q2]))
    if var == 0:
        raise ValueError("scenario has no signal; SNR cannot be calibrated")
    return float(np.sqrt(var / target_snr))


# name: (n, p, t1, t2, signal sources, target SNR)
_PRESETS = {
    "lowdim-1": (500, 100, 2.0, 2.0, (1, 2), 5.0),
    "lowdim-2": (500, 100, 4.0, 4.0, (1, 2), 1.7),
    "lowdim-3": (500, 100, 0.0, 0.0, (1, 2), 2.2),
    "lowdim-4": (500, 100, 2.0, 0.0, (1,), 3.1),
    "highdim-1": (200, 500, 2.0, 2.0, (1, 2), 2.4),
    "highdim-2": (200, 500, 6.0, 1.0, (1, 2), 1.6),
    "highdim-3": (200, 500, 0.0, 0.0, (1, 2), 2.1),
    "highdim-4": (200, 500, 2.0, 0.0, (1,), 3.5),
}

PRESET_NAMES = tuple(_PRESETS)

# With the latent coupling, interaction entries of size 2 would carry about
# two thirds of the signal variance; size 1 brings that down to about a third.
PRESET_INTERACTION_MAGNITUDE = 1.0


def preset(name, seed=0, **overrides):
    """One of the eight benchmark scenarios, with sigma calibrated to its SNR.

    ``overrides`` replace scenario fields (e.g. a smaller ``n``) before the
    calibration, which only depends on the coefficient pattern and latent
    structure.
    """
    try:
        n, p, t1, t2, sources, snr = _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(_PRESETS)}") from None
    sc = SimScenario(n=n, n_test=9800, p1=p, p2=p, K=4, p_u=20, t1=t1, t2=t2,
                     interaction_magnitude=PRESET_INTERACTION_MAGNITUDE,
                     signal_sources=sources, seed=seed, name=name, target_snr=snr)
    if overrides:
        sc = sc.replace(**overrides)
    return sc.replace(sigma=calibrate_sigma(sc, snr))
