import numpy as np
import pytest

from pbitnet.logic import and_or_xnor_table, synthesize
from pbitnet.network import NetworkSpec


def random_symmetric(n, seed, scale=1.0, bias=True):
    """Symmetric zero-diagonal network with weights uniform in [-scale, scale]."""
    rng = np.random.default_rng(seed)
    A = rng.uniform(-scale, scale, (n, n))
    W = np.triu(A, 1)
    W = W + W.T
    h = rng.uniform(-scale, scale, n) if bias else np.zeros(n)
    return NetworkSpec.from_dense(W, h, symmetric=True)


@pytest.fixture(scope="session")
def gate():
    return synthesize(and_or_xnor_table())


@pytest.fixture
def ferro2():
    return NetworkSpec(n=2, weights=((0, 1, 1.0), (1, 0, 1.0)))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.REPORT:
            terminalreporter.write_line(line)
