import math

import numpy as np
import pytest

from jcpackets.inversion import FrequencyMap, TimeGrid, auto_dt, complex_trace, inversion_trace
from jcpackets.states import CatParams, cat_distribution, coherent_distribution

JCM = FrequencyMap("jcm", 1.0)
TAU20 = 2 * math.pi * math.sqrt(21)  # first packet centre for n_tilde = 20


@pytest.fixture(scope="session")
def jcm():
    return JCM


@pytest.fixture(scope="session")
def coherent20():
    return coherent_distribution(20)


@pytest.fixture(scope="session")
def dt20(coherent20):
    return auto_dt(JCM, coherent20.n_max)


@pytest.fixture(scope="session")
def trace20(coherent20, dt20):
    """Coherent(20) inversion on gt in [0, 150]."""
    return inversion_trace(coherent20, JCM, TimeGrid.span(150, dt20))


@pytest.fixture(scope="session")
def ztrace20(coherent20, dt20):
    """Complex trace of coherent(20) on a grid symmetric about 0."""
    return complex_trace(coherent20, JCM, TimeGrid.symmetric(1.5 * TAU20 + 1, dt20))


@pytest.fixture(scope="session")
def cat20():
    return cat_distribution(CatParams(math.sqrt(20), math.pi))


@pytest.fixture(scope="session")
def cat_trace(cat20):
    dt = auto_dt(JCM, cat20.n_max)
    return inversion_trace(cat20, JCM, TimeGrid.span(150, dt))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance gate's PASS/FAIL lines after the run."""
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
