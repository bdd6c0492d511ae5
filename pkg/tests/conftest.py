"""Shared fixtures: classical example tuples and small helpers."""

import numpy as np
import pytest

from freespec import MatrixTuple


def e_matrix(d, i, j):
    M = np.zeros((d, d), dtype=complex)
    M[i, j] = 1.0
    return M


@pytest.fixture
def scalar_ball():
    """Single-variable disk: membership means |z| <= 1."""
    return MatrixTuple([e_matrix(2, 0, 1)])


@pytest.fixture
def bidisk():
    """Two independent disks, one per variable, as a 4x4 block pencil."""
    A1 = np.zeros((4, 4), dtype=complex)
    A1[0, 1] = 1.0
    A2 = np.zeros((4, 4), dtype=complex)
    A2[2, 3] = 1.0
    return MatrixTuple([A1, A2])


def ball_tuple(g):
    """Row-form tuple whose spectrahedron is the free ball of g variables."""
    d = g + 1
    return MatrixTuple([e_matrix(d, 0, j + 1) for j in range(g)])


@pytest.fixture
def ball3():
    return ball_tuple(3)


def scalar_point(*zs):
    """Tuple of 1x1 matrices from complex scalars."""
    return MatrixTuple([np.array([[z]], dtype=complex) for z in zs])


def random_tuple(g, n, rng, scale=1.0):
    Z = rng.standard_normal((g, n, n)) + 1j * rng.standard_normal((g, n, n))
    return MatrixTuple(Z * scale / np.sqrt(2 * n))
