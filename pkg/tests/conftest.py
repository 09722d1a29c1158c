"""Shared fixtures and a suite-wide audit of every pliable fit.

Every call to ``fit_path`` made while the tests run is re-checked here:
each path point must pass ``kkt_check`` and respect the hierarchy. The
acceptance module runs last so its audit criteria see the whole suite.
"""
import numpy as np
import pytest

from cooppliable.core import MultiViewData, PliableCoefs
from cooppliable.solver import SolverConfig, add_fit_observer, kkt_check


class FitAudit:
    def __init__(self):
        self.fits = 0
        self.points = 0
        self.kkt_failures = []
        self.hierarchy_failures = []

    def __call__(self, problem, fit):
        self.fits += 1
        config = SolverConfig(kkt_tol=1e-4)
        for i, lam in enumerate(fit.lambdas):
            coefs = PliableCoefs(fit.betas[i], fit.thetas[i])
            self.points += 1
            bad = kkt_check(problem, coefs, lam, config)
            if bad:
                self.kkt_failures.append((self.fits, i, bad[:3]))
            if not coefs.hierarchy_ok():
                self.hierarchy_failures.append((self.fits, i))


AUDIT = FitAudit()
ACCEPTANCE_LINES = {}


def pytest_configure(config):
    add_fit_observer(AUDIT)


def pytest_collection_modifyitems(session, config, items):
    last = [it for it in items if it.module.__name__.endswith("test_acceptance")]
    first = [it for it in items if it not in last]
    items[:] = first + last


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_data(rng, n=40, p1=5, p2=4, K=2, noise=0.5):
    X1 = rng.standard_normal((n, p1))
    X2 = rng.standard_normal((n, p2))
    Z = rng.standard_normal((n, K))
    y = X1[:, 0] * (1.5 + Z[:, 0]) - X2[:, 1] + noise * rng.standard_normal(n)
    return MultiViewData(X1, X2, Z, y - y.mean())
