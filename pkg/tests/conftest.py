import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from twistbench import Lattice, PauliOp

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")


@st.composite
def lattices(draw, max_side=7, boundary=None):
    w = draw(st.integers(2, max_side))
    h = draw(st.integers(2, max_side))
    b = boundary or draw(st.sampled_from(["open", "periodic"]))
    return Lattice(w, h, b)


@st.composite
def paulis(draw, n):
    x = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    z = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    phase = draw(st.integers(0, 3))
    return PauliOp(np.array(x), np.array(z), phase)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
