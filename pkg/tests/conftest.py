"""Shared fixtures for the test suite.

The expensive movies (viscous Taylor-Green with its pressure, the advected
scalar pair) are session-scoped so the identity, rates, and materializer
tests reuse one solve each.
"""
import numpy as np
import pytest

from disslab.fields import (
    make_grid,
    taylor_green_movie,
    taylor_green_pressure_movie,
)


@pytest.fixture(scope="session")
def tg_viscous():
    """Decaying Taylor-Green movie with its pressure, n=64, nt=49, nu=1e-2."""
    nt = 49
    grid = make_grid(2, 64, nt=nt, dt=1.0 / (nt - 1))
    nu = 1e-2
    return taylor_green_movie(grid, nu), taylor_green_pressure_movie(grid, nu), nu


@pytest.fixture(scope="session")
def tg_steady():
    """Stationary Taylor-Green (Euler) movie with pressure, n=64, nt=49."""
    nt = 49
    grid = make_grid(2, 64, nt=nt, dt=1.0 / (nt - 1))
    return taylor_green_movie(grid, 0.0), taylor_green_pressure_movie(grid, 0.0)


def mirror_samples(samples: np.ndarray, d: int) -> np.ndarray:
    """Lattice realization of w(x) = -v(-x) for a (nt, c, *space) array."""
    rev = samples.copy()
    for ax in range(2, 2 + d):
        rev = np.flip(rev, axis=ax)
        rev = np.roll(rev, 1, axis=ax)
    return np.ascontiguousarray(-rev)
