import math
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hardyplap.exponents import Params

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def valid_params(draw, max_p=5.0, mu_low=-2.0, mu_frac=0.95, s_frac=0.95):
    N = draw(st.integers(2, 8))
    p = draw(st.floats(1.1, min(N - 0.2, max_p)))
    mu_bar = ((N - p) / p) ** p
    # |mu| below 1e-8 only probes underflow of gamma1, not the mathematics
    mu = draw(st.floats(mu_low, mu_frac * mu_bar).filter(lambda m: m == 0.0 or abs(m) > 1e-8))
    s = draw(st.floats(0.0, s_frac * p))
    return Params(N, p, mu, s)


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.abs(b)))


@pytest.fixture(scope="session")
def ball_point():
    """The standard ball problem and its solution (shared; about two seconds)."""
    from hardyplap import ball_shooting

    lam1 = ball_shooting.first_eigenvalue(5, 2, 0.5)
    params = Params(5, 2, 0.5, 0.0, 0.3 * lam1)
    return params, lam1, ball_shooting.solve_ball(params)


def close(a, b, rtol):
    return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS.values():
        terminalreporter.write_line(line)
