import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from sdpi.model import Channel

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def distributions(draw, n=None, min_size=2, max_size=6, full_support=False):
    if n is None:
        n = draw(st.integers(min_size, max_size))
    lo = 1e-3 if full_support else 0.0
    w = draw(st.lists(st.floats(lo, 1.0), min_size=n, max_size=n).filter(lambda v: sum(v) > 1e-3))
    w = np.asarray(w)
    return w / w.sum()


@st.composite
def channels(draw, n_in=None, n_out=None, max_in=4, max_out=4, positive=False):
    n_in = draw(st.integers(2, max_in)) if n_in is None else n_in
    n_out = draw(st.integers(2, max_out)) if n_out is None else n_out
    rows = [draw(distributions(n_out, full_support=positive)) for _ in range(n_in)]
    return Channel(np.array(rows))


@pytest.fixture
def identity2():
    return Channel(np.eye(2), "identity")


@pytest.fixture
def same_rows():
    return Channel(np.array([[0.2, 0.5, 0.3]] * 3), "same")


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
