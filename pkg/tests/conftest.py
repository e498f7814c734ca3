import numpy as np
import pytest
from hypothesis import strategies as st

from gtdiscovery import make_config

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fig2():
    return make_config([(300, 3, 1.0), (200, 2, 0.5)])


@pytest.fixture
def fig4():
    return make_config([(200, 0.02, 1.0), (400, 0.01, 0.5)])


@pytest.fixture
def record_criterion():
    def record(number, name, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {name}" + (f" -- {detail}" if detail else ""))

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


betas = st.floats(min_value=0.01, max_value=1.0, allow_nan=False)


@st.composite
def fixed_configs(draw, max_clusters=4, max_n=60):
    m = draw(st.integers(1, max_clusters))
    clusters = []
    for _ in range(m):
        n = draw(st.integers(1, max_n))
        k = draw(st.integers(0, n))
        clusters.append((n, k, draw(betas)))
    return make_config(clusters)


@st.composite
def random_configs(draw, max_clusters=4, max_n=60):
    m = draw(st.integers(1, max_clusters))
    clusters = []
    for _ in range(m):
        n = draw(st.integers(1, max_n))
        p = draw(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
        clusters.append((n, p, draw(betas)))
    return make_config(clusters)


def active_fixed_configs(**kw):
    return fixed_configs(**kw).filter(lambda c: c.k_total > 0)


def active_random_configs(**kw):
    return random_configs(**kw).filter(lambda c: float(np.dot(c.sizes, c.ps)) > 0)
