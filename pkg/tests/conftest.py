import numpy as np
import pytest

from dynperc import graphs


@pytest.fixture
def k2():
    return graphs.build_from_edges(2, [(0, 1)])


@pytest.fixture
def p3():
    return graphs.path(3)


@pytest.fixture
def c4():
    return graphs.cycle(4)


@pytest.fixture
def star3():
    return graphs.star(3)


def random_reversible_generator(n, rng):
    """Generator with symmetric conductances over a random pi."""
    pi = rng.dirichlet(np.full(n, 2.0))
    w = np.abs(rng.standard_normal((n, n)))
    w = np.triu(w, 1) + np.triu(w, 1).T
    L = w / pi[:, None]
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    return L, pi
