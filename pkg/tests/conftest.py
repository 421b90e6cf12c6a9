"""
Shared fixtures for optimal quadrature tests.
"""

import pytest

from optimal_quadrature.dense_solver import solve_config as dense_solve
from optimal_quadrature.discrete_operator import build, for_grid
from optimal_quadrature.kernel import ProblemConfig
from optimal_quadrature.sobolev_solver import solve_boundary


@pytest.fixture(scope="session")
def config_m1():
    """m = 1 on ten intervals."""
    return ProblemConfig(1, 10)


@pytest.fixture(scope="session")
def config_m3():
    """m = 3 on ten intervals."""
    return ProblemConfig(3, 10)


@pytest.fixture(scope="session")
def operator_m1():
    """D_1 at h = 0.1."""
    return for_grid(1, 10)


@pytest.fixture(scope="session")
def operator_m3():
    """D_3 at h = 0.1."""
    return for_grid(3, 10)


@pytest.fixture(scope="session")
def operator_m3_fine():
    """D_3 at h = 0.05."""
    return for_grid(3, 20)


@pytest.fixture(scope="session")
def operator_factory():
    """Cached operator construction keyed by (m, N)."""
    cache = {}

    def _operator(m, N):
        if (m, N) not in cache:
            cache[(m, N)] = for_grid(m, N)
        return cache[(m, N)]
    return _operator


@pytest.fixture(scope="session")
def dense_m3(config_m3):
    """Oracle-mode dense solution for m = 3, N = 10."""
    return dense_solve(config_m3)


@pytest.fixture(scope="session")
def split_m3(config_m3, operator_m3):
    """Boundary solution for m = 3, N = 10."""
    return solve_boundary(config_m3, operator_m3)


@pytest.fixture(scope="session")
def float_operator():
    """Operator built from a float step, for the h-parametrised checks."""
    def _operator(m, h):
        return build(m, h)
    return _operator
