"""Feasibility solver contract and inclusion verdicts."""

import numpy as np
import pytest

from freespec import MatrixTuple, SdpProblem, includes, membership, solve_feasibility
from freespec.inclusion_sdp import (
    apply_choi,
    conjugation_choi,
    hvec,
    inclusion_problem,
    unhvec,
    verify_choi_witness,
)

from conftest import ball_tuple, e_matrix, random_tuple, scalar_point


class TestHvec:
    def test_round_trip_isometry(self):
        rng = np.random.default_rng(2)
        for m in (1, 2, 4):
            Z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            H = (Z + Z.conj().T) / 2
            x = hvec(H)
            assert np.allclose(unhvec(x, m), H)
            assert np.linalg.norm(x) == pytest.approx(np.linalg.norm(H), rel=1e-12)


class TestSolveFeasibility:
    def test_single_scalar_block(self):
        prob = SdpProblem(block_sizes=[1])
        prob.add([np.eye(1)], 1.0)
        blocks = solve_feasibility(prob)
        assert blocks is not None
        assert blocks[0][0, 0] == pytest.approx(1.0, abs=1e-9)

    def test_unit_offdiagonal_with_unit_trace_infeasible(self):
        # PSD with both off-diagonal entries 1 needs diagonal product >= 1,
        # impossible alongside trace 1
        prob = SdpProblem(block_sizes=[2])
        prob.add([np.eye(2)], 1.0)
        offdiag = np.zeros((2, 2), dtype=complex)
        offdiag[1, 0] = 1.0  # <F, X> = conj(F_10) X_10 picks the (1,0) entry
        prob.add([offdiag], 1.0)
        offdiag2 = np.zeros((2, 2), dtype=complex)
        offdiag2[0, 1] = 1.0
        prob.add([offdiag2], 1.0)
        assert solve_feasibility(prob, max_iter=4000) is None

    def test_identity_choi_feasible_for_self_inclusion(self):
        rng = np.random.default_rng(4)
        A = random_tuple(2, 2, rng)
        prob = inclusion_problem(A, A)
        blocks = solve_feasibility(prob, max_iter=12000)
        assert blocks is not None
        assert verify_choi_witness(A, A, blocks[0])

    def test_returned_assignment_satisfies_problem(self):
        prob = SdpProblem(block_sizes=[2, 1])
        F = np.array([[1.0, 0.5], [0.5, 0.0]], dtype=complex)
        prob.add([F, np.eye(1)], 2.0)
        blocks = solve_feasibility(prob)
        assert blocks is not None
        total = np.sum(np.conj(F) * blocks[0]) + blocks[1][0, 0]
        assert abs(total - 2.0) < 1e-8
        for B in blocks:
            assert np.linalg.eigvalsh((B + B.conj().T) / 2)[0] >= -1e-9


class TestChoiHelpers:
    def test_identity_map_choi(self):
        C = conjugation_choi(np.eye(2))
        rng = np.random.default_rng(6)
        Z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        assert np.allclose(apply_choi(C, Z, 2), Z)
        assert np.linalg.eigvalsh(C)[0] >= -1e-12

    def test_compression_map_choi(self):
        rng = np.random.default_rng(8)
        V = np.linalg.qr(rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2)))[0]
        C = conjugation_choi(V, scale=0.5)
        Z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        assert np.allclose(apply_choi(C, Z, 2), 0.5 * V.conj().T @ Z @ V)


class TestIncludes:
    def test_reflexive(self):
        rng = np.random.default_rng(10)
        for g, d in [(1, 2), (2, 3)]:
            A = random_tuple(g, d, rng)
            verdict = includes(A, A)
            assert verdict.status == "Included"
            assert verify_choi_witness(A, A, verdict.choi_witness)

    def test_disk_not_inside_half_disk(self, scalar_ball):
        double = scalar_ball.scaled(2.0)
        verdict = includes(scalar_ball, double)
        assert verdict.status == "NotIncluded"
        X = verdict.counterexample
        assert membership(scalar_ball, X).member
        assert not membership(double, X).member

    def test_half_pencil_includes(self, scalar_ball):
        double = scalar_ball.scaled(2.0)
        verdict = includes(double, scalar_ball)
        assert verdict.status == "Included"
        assert verify_choi_witness(double, scalar_ball, verdict.choi_witness)

    def test_cross_size_inclusion(self):
        # the 2-ball sits inside each coordinate disk
        ball = ball_tuple(2)
        disk1 = MatrixTuple([e_matrix(2, 0, 1), np.zeros((2, 2))])
        verdict = includes(ball, disk1, seed=1)
        assert verdict.status == "Included"

    def test_coordinate_disk_not_inside_ball(self):
        ball = ball_tuple(2)
        disk1 = MatrixTuple([e_matrix(2, 0, 1), np.zeros((2, 2))])
        verdict = includes(disk1, ball, seed=2)
        assert verdict.status == "NotIncluded"

    def test_sampled_soundness(self):
        rng = np.random.default_rng(14)
        checked = 0
        for trial in range(8):
            A = random_tuple(2, 2, rng)
            B = random_tuple(2, 2, rng)
            verdict = includes(A, B, seed=trial)
            if verdict.status == "Included":
                for n in (1, 2, 3, 4):
                    for _ in range(30):
                        X = random_tuple(2, n, rng, scale=1.5)
                        if membership(A, X).member:
                            checked += 1
                            assert membership(B, X).member
            elif verdict.status == "NotIncluded":
                X = verdict.counterexample
                assert membership(A, X).member
                assert not membership(B, X).member
        assert checked >= 0


class TestTransitivityChain:
    def test_nested_scaled_tuples(self):
        rng = np.random.default_rng(16)
        A = random_tuple(2, 2, rng)
        mid, outer = A.scaled(0.8), A.scaled(0.5)
        # D_A subset D_{0.8A} subset D_{0.5A}
        assert includes(A, mid).status == "Included"
        assert includes(mid, outer).status == "Included"
        assert includes(A, outer).status == "Included"
        assert includes(outer, A, seed=5).status == "NotIncluded"
