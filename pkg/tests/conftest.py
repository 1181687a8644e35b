import sys
import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from mixmod.spectrum import SpectralFunction

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_function(rng, dim, band, real=True, density=0.6, decay=0.0):
    """Random mean-free polynomial with roughly ``density`` of the box filled."""
    axis = np.r_[-band:0, 1:band + 1]
    keys = np.array(list(itertools.product(axis, repeat=dim)), dtype=np.int64)
    keys = keys[rng.random(len(keys)) < density]
    if not len(keys):
        keys = np.ones((1, dim), dtype=np.int64)
    c = rng.normal(size=len(keys)) + 1j * rng.normal(size=len(keys))
    c *= np.prod(np.abs(keys).astype(float) ** -decay, axis=1)
    if real:
        keys = np.concatenate([keys, -keys])
        c = np.concatenate([c, c.conj()])
    return SpectralFunction(keys, c, real=real, dim=dim)


@st.composite
def spectral_functions(draw, dims=(1, 2), max_band=8, real=None):
    dim = draw(st.sampled_from(dims))
    band = draw(st.integers(1, max_band))
    is_real = draw(st.booleans()) if real is None else real
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_function(np.random.default_rng(seed), dim, band, is_real)


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.VERDICTS):
        terminalreporter.write_line(mod.VERDICTS[k])
