import numpy as np
import pytest
from hypothesis import strategies as st

from hitgeom import generators
from hitgeom.chain_core import validate_chain

IID_ROW = (0.5, 0.3, 0.2)


@pytest.fixture
def two_state():
    """The worked example with delta = 1/4: P = [[1/2, 1/2], [1/4, 3/4]]."""
    return generators.two_state(0.25)


@pytest.fixture
def iid_chain():
    return generators.iid(IID_ROW)


@pytest.fixture
def symmetric_two_state():
    return generators.two_state(0.0)


def random_chains(count, size, seed):
    rng = np.random.default_rng(seed)
    return [generators.random_ergodic(size, rng) for _ in range(count)]


@st.composite
def ergodic_chains(draw, min_size=2, max_size=6):
    """Dense chains (every entry positive), hence irreducible and aperiodic."""
    n = draw(st.integers(min_size, max_size))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(n), size=n)
    P = 0.98 * P + 0.02 / n
    P[:, -1] = 1.0 - P[:, :-1].sum(axis=1)
    return validate_chain(P)
