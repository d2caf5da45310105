import pytest
from hypothesis import settings, strategies as st

from wfsloc.fincat import FinPoset, MonotoneMap, chain
from wfsloc.thomotopy import generate_T

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def posets(draw, max_size=4, min_size=1):
    """Random posets: an upper-triangular relation closed transitively, then shuffled labels."""
    n = draw(st.integers(min_size, max_size))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = [p for p in pairs if draw(st.booleans())]
    labels = draw(st.permutations([f"e{i}" for i in range(n)]))
    return FinPoset.from_relations(labels, [(labels[i], labels[j]) for i, j in chosen])


@pytest.fixture(scope="session")
def T3():
    return generate_T(3).generators()


@pytest.fixture(scope="session")
def T4():
    return generate_T(4).generators()


@pytest.fixture
def segment():
    return chain(2, ["0", "1"])


@pytest.fixture
def subdivided():
    return chain(3, ["0", "A", "1"])


@pytest.fixture
def subdivision(segment, subdivided):
    return MonotoneMap.from_labels(segment, subdivided, {"0": "0", "1": "1"})
