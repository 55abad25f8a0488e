import numpy as np
import pytest

from nrdirac.core import Grid, Nonlinearity
from nrdirac.groundstate import hat_pair, solve_groundstate
from nrdirac.solver import continue_branch


@pytest.fixture(scope="session")
def grid1():
    return Grid(30.0, 3001, 1)


@pytest.fixture(scope="session")
def gs111(grid1):
    return solve_groundstate(1, 1.0, 1.0, grid1)


@pytest.fixture(scope="session")
def hat111(gs111):
    return hat_pair(gs111)


@pytest.fixture(scope="session")
def gs311():
    return solve_groundstate(3, 1.0, 1.0, Grid(30.0, 3001, 3))


@pytest.fixture(scope="session")
def hat311(gs311):
    return hat_pair(gs311)


@pytest.fixture(scope="session")
def cubic():
    return Nonlinearity(1.0)


@pytest.fixture(scope="session")
def branch111(hat111, cubic):
    eps = np.geomspace(0.1, 0.005, 12)
    return continue_branch(eps, hat111, cubic)
