import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hks.core import TwoSamples

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def values(lo=-10.0, hi=10.0, min_size=1, max_size=25):
    finite = st.floats(lo, hi, allow_nan=False, allow_infinity=False)
    # half the time draw from a coarse lattice so ties are common
    lattice = st.integers(int(lo), int(hi)).map(float)
    return st.lists(st.one_of(finite, lattice), min_size=min_size, max_size=max_size)


@st.composite
def two_samples(draw, lo=-10.0, hi=10.0, max_size=25):
    return TwoSamples(draw(values(lo, hi, max_size=max_size)), draw(values(lo, hi, max_size=max_size)))


def random_instance(rng, max_size=40, spread=5.0, ties=False):
    m, n = rng.integers(1, max_size + 1, size=2)
    if ties:
        return TwoSamples(rng.integers(-4, 5, m).astype(float), rng.integers(-4, 5, n).astype(float))
    return TwoSamples(rng.normal(0, spread, m), rng.normal(rng.normal(), spread, n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def singleton():
    return TwoSamples([1.0], [2.0])
