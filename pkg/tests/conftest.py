import numpy as np
import pytest
from hypothesis import settings

from sojet.oracle import JetElement
from sojet.model import ModelSet
from sojet.testbed import ProblemSpec

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])


def quadratic_problem(n=1):
    """f(x) = |x|^2 as a ProblemSpec, for cases where the model is exact."""
    def ev(x):
        return float(x @ x), 2 * x, 2 * np.eye(x.size), ()
    return ProblemSpec("quadratic", n, np.ones(n), 0.0, True, ev)


def random_model(rng, n, m, eps=None, center=None):
    """Random max-of-quadratics with indefinite curvature, base points in the ball."""
    eps = rng.uniform(0.1, 2.0) if eps is None else eps
    x = rng.uniform(-1, 1, n) if center is None else np.asarray(center, float)
    els = []
    for _ in range(m):
        y = x + eps * rng.uniform(-1, 1, n) / np.sqrt(n)
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        H = Q @ np.diag(rng.uniform(-3, 3, n)) @ Q.T
        els.append(JetElement(y, rng.uniform(-1, 1), rng.uniform(-2, 2, n), H))
    return ModelSet(x, eps, els)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
