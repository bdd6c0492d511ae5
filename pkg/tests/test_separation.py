"""Separating pencil construction: functional, bilinear data, T-pair, pipeline."""

import numpy as np
import pytest

from freespec import (
    MatrixTuple,
    DetailedBoundaryPoint,
    bilinear_B,
    boundary_functional,
    membership,
    pencil_ball_norm,
    separate,
    solve_T,
)
from freespec.errors import NotBoundary
from freespec.generators import boundary_point, member_points, pencil_ball_tuple
from freespec.separation import interior_radii

from conftest import ball_tuple, e_matrix, random_tuple, scalar_point


def disk_boundary_point(theta):
    z = np.exp(1j * theta)
    v = np.array([z, 1.0]) / np.sqrt(2)
    return DetailedBoundaryPoint(X=scalar_point(z), v=v)


class TestBoundaryFunctional:
    def test_disk_at_one(self, scalar_ball):
        func = boundary_functional(scalar_ball, disk_boundary_point(0.0))
        # L(z) = z: Riesz representer is the 1x1 identity
        assert np.allclose(func.riesz.mats[0], np.eye(1))
        assert func.value(scalar_point(0.37)) == pytest.approx(0.37)

    def test_disk_at_phase(self, scalar_ball):
        theta = 0.9
        func = boundary_functional(scalar_ball, disk_boundary_point(theta))
        # L(z) = exp(-i theta) z
        val = func.value(scalar_point(1.0))
        assert val == pytest.approx(np.exp(-1j * theta), abs=1e-12)

    def test_attains_one_at_the_point(self):
        rng = np.random.default_rng(81)
        A = pencil_ball_tuple(1, 2, 2, rng)
        pt = boundary_point(A, 2, rng)
        func = boundary_functional(A, pt)
        assert func.value(pt.X).real == pytest.approx(1.0, abs=1e-8)

    def test_at_most_one_on_members(self):
        rng = np.random.default_rng(83)
        A = pencil_ball_tuple(2, 1, 2, rng)
        pt = boundary_point(A, 2, rng)
        func = boundary_functional(A, pt)
        for X in member_points(A, 2, 60, rng, radial=(0.0, 1.0)):
            assert func.value(X).real <= 1.0 + 1e-9

    def test_rejects_non_boundary(self, scalar_ball):
        bad = DetailedBoundaryPoint(X=scalar_point(0.2), v=np.array([1.0, 0.0]))
        with pytest.raises(NotBoundary):
            boundary_functional(scalar_ball, bad)


class TestBilinearB:
    def test_scalar_disk(self, scalar_ball):
        func = boundary_functional(scalar_ball, disk_boundary_point(0.0))
        B = bilinear_B(func)
        assert np.allclose(B.mats[0], np.eye(1))

    def test_zero_functional_gives_zero(self):
        from freespec.separation import BoundaryFunctional

        func = BoundaryFunctional(riesz=MatrixTuple([np.zeros((2, 2))] * 2), level=2)
        B = bilinear_B(func)
        assert not np.any(B.mats)

    def test_definitional_reconstruction(self):
        rng = np.random.default_rng(85)
        A = pencil_ball_tuple(1, 2, 2, rng)
        pt = boundary_point(A, 2, rng)
        func = boundary_functional(A, pt)
        B = bilinear_B(func, n=2, g=2)
        n = 2
        for ell in range(2):
            for i in range(n):
                for j in range(n):
                    c, dv = np.eye(n)[:, i], np.eye(n)[:, j]
                    rank_one = np.outer(c, dv.conj())
                    point = [np.zeros((n, n), dtype=complex) for _ in range(2)]
                    point[ell] = rank_one
                    lhs = np.vdot(dv, B.mats[ell] @ c)
                    rhs = func.value(MatrixTuple(point))
                    assert lhs == pytest.approx(rhs, abs=1e-12)


class TestSolveT:
    def test_scalar_disk_unit_pair(self, scalar_ball):
        func = boundary_functional(scalar_ball, disk_boundary_point(0.0))
        B = bilinear_B(func)
        T1, T2, _ = solve_T(scalar_ball, B)
        assert T1[0, 0] == pytest.approx(1.0, abs=1e-8)
        assert T2[0, 0] == pytest.approx(1.0, abs=1e-8)

    def test_zero_bilinear_any_unit_trace_pair(self, scalar_ball):
        B = MatrixTuple([np.zeros((2, 2))])
        T1, T2, _ = solve_T(scalar_ball, B)
        for T in (T1, T2):
            assert np.trace(T).real == pytest.approx(1.0, abs=1e-8)
            assert np.linalg.eigvalsh((T + T.conj().T) / 2)[0] >= -1e-9

    def test_block_matrix_positivity_on_members(self):
        # the domination pairs the functional with transposed arguments, so
        # the solver receives the transposed bilinear matrices (as separate does)
        rng = np.random.default_rng(87)
        A = pencil_ball_tuple(1, 2, 2, rng)
        pt = boundary_point(A, 2, rng)
        B = bilinear_B(boundary_functional(A, pt))
        Bt = MatrixTuple([M.T for M in B.mats])
        T1, T2, _ = solve_T(A, Bt)
        from freespec import eval_homogeneous

        for m in (1, 2, 3):
            for Y in member_points(A, m, 25, rng, radial=(0.0, 1.0)):
                lam = eval_homogeneous(Bt, Y)
                top = np.block(
                    [
                        [np.kron(T1, np.eye(m)), -lam],
                        [-lam.conj().T, np.kron(T2, np.eye(m))],
                    ]
                )
                assert np.linalg.eigvalsh((top + top.conj().T) / 2)[0] >= -1e-7


class TestInteriorRadii:
    def test_disk_radius_is_one(self, scalar_ball):
        assert interior_radii(scalar_ball) == pytest.approx([1.0])

    def test_scaled_pencil_radius(self, scalar_ball):
        assert interior_radii(scalar_ball.scaled(2.0)) == pytest.approx([0.5])


class TestSeparate:
    def test_disk_at_one(self, scalar_ball):
        cert = separate(scalar_ball, disk_boundary_point(0.0), seed=1)
        assert cert.Q.mats[0].shape == (1, 1)
        assert abs(cert.Q.mats[0][0, 0] - 1.0) < 1e-7
        assert cert.norms["at_boundary"] == pytest.approx(1.0, abs=1e-7)

    def test_disk_at_i(self, scalar_ball):
        cert = separate(scalar_ball, disk_boundary_point(np.pi / 2), seed=2)
        q = cert.Q.mats[0][0, 0]
        assert abs(abs(q) - 1.0) < 1e-7
        assert q == pytest.approx(-1j, abs=1e-6)

    def test_ball_level_two_certificate(self):
        rng = np.random.default_rng(91)
        A = pencil_ball_tuple(1, 2, 2, rng)
        pt = boundary_point(A, 2, rng)
        cert = separate(A, pt, audit_samples=120, seed=3)
        assert cert.norms["at_boundary"] == pytest.approx(1.0, abs=1e-6)
        assert cert.norms["sup_sampled"] <= 1 + 1e-7
        for T in (cert.T1, cert.T2):
            assert np.trace(T).real == pytest.approx(1.0, abs=1e-8)

    def test_interior_strictness_and_kappa(self):
        rng = np.random.default_rng(93)
        A = pencil_ball_tuple(2, 2, 2, rng)
        pt = boundary_point(A, 2, rng)
        cert = separate(A, pt, audit_samples=100, seed=4)
        assert cert.norms["interior_margin"] > 0.0
        for Qj, rj in zip(cert.Q.mats, cert.interior_radii):
            assert np.linalg.norm(Qj, 2) <= 1.0 / rj + 1e-6

    def test_domination_across_levels(self):
        rng = np.random.default_rng(95)
        A = pencil_ball_tuple(1, 3, 3, rng)
        pt = boundary_point(A, 2, rng)
        cert = separate(A, pt, audit_samples=60, seed=5)
        for n in (1, 2, 3, 4):
            for Y in member_points(A, n, 20, rng, radial=(0.0, 1.0)):
                assert pencil_ball_norm(cert.Q, Y) <= 1 + 1e-8
