import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from privtradeoff.probability import JointPmf  # noqa: E402


def random_joint(rng, shape, alpha=1.0):
    n = int(np.prod(shape))
    return JointPmf.from_array(rng.dirichlet(np.full(n, alpha)).reshape(shape))


@st.composite
def joints(draw, max_size=4, sparse=False):
    nx = draw(st.integers(1, max_size))
    nz = draw(st.integers(1, max_size))
    # entries are exactly zero or well above the support threshold
    cell = st.one_of(st.just(0.0), st.floats(1e-4, 1.0))
    w = draw(st.lists(cell, min_size=nx * nz, max_size=nx * nz))
    arr = np.array(w).reshape(nx, nz)
    if not sparse:
        arr = arr + 0.05
    if arr.sum() <= 0:
        arr = np.ones((nx, nz))
    return JointPmf.from_array(arr / arr.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
