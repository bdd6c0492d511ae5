"""Commutants, irreducible blocks, unitary equivalence, minimization."""

import numpy as np
import pytest

from freespec import (
    MatrixTuple,
    commutant_basis,
    irreducible_blocks,
    membership,
    minimize_pencil,
    unitarily_equivalent,
)
from freespec.errors import ShapeMismatch
from freespec.generators import haar_unitary, superdiagonal_tuple

from conftest import ball_tuple, e_matrix, random_tuple, scalar_point


class TestCommutant:
    def test_nilpotent_has_trivial_commutant(self):
        basis = commutant_basis(MatrixTuple([e_matrix(2, 0, 1)]))
        assert len(basis) == 1
        # the single element is I/sqrt(2) up to phase
        target = np.eye(2) / np.sqrt(2)
        assert abs(abs(np.vdot(target, basis[0])) - 1.0) < 1e-10

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_zero_tuple_commutant_is_everything(self, d):
        basis = commutant_basis(MatrixTuple([np.zeros((d, d))]))
        assert len(basis) == d * d

    def test_double_copy_has_two_by_two_commutant(self):
        a = MatrixTuple([e_matrix(2, 0, 1)])
        basis = commutant_basis(a.direct_sum(a))
        assert len(basis) == 4

    def test_elements_commute_and_are_orthonormal(self, bidisk):
        basis = commutant_basis(bidisk)
        assert len(basis) == 2
        for C in basis:
            for M in bidisk.mats:
                assert np.linalg.norm(C @ M - M @ C) < 1e-10
                assert np.linalg.norm(C @ M.conj().T - M.conj().T @ C) < 1e-10
        gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
        assert np.allclose(gram, np.eye(len(basis)), atol=1e-10)


class TestIrreducibleBlocks:
    def test_irreducible_tuple_is_one_block(self):
        A = MatrixTuple([e_matrix(2, 0, 1)])
        dec = irreducible_blocks(A)
        assert dec.block_sizes == [2]
        U = dec.change_of_basis
        assert np.allclose(U.conj().T @ U, np.eye(2), atol=1e-10)

    def test_planted_direct_sum_recovers_sizes(self):
        rng = np.random.default_rng(5)
        a = random_tuple(2, 2, rng)
        b = random_tuple(2, 3, rng)
        planted = a.direct_sum(b)
        U = haar_unitary(5, rng)
        hidden = planted.compressed(U)
        dec = irreducible_blocks(hidden, seed=3)
        assert sorted(dec.block_sizes) == [2, 3]
        # reconstruction: conjugating by the basis block-diagonalizes
        W = dec.change_of_basis
        assert np.allclose(W.conj().T @ W, np.eye(5), atol=1e-9)
        re = MatrixTuple([W.conj().T @ M @ W for M in hidden.mats])
        assert re.allclose(dec.reassembled(), atol=1e-8)

    def test_bidisk_splits_into_two_blocks(self, bidisk):
        dec = irreducible_blocks(bidisk)
        assert sorted(dec.block_sizes) == [2, 2]

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(12)
        A = random_tuple(2, 2, rng).direct_sum(random_tuple(2, 2, rng))
        d1 = irreducible_blocks(A, seed=4)
        d2 = irreducible_blocks(A, seed=4)
        assert np.array_equal(d1.change_of_basis, d2.change_of_basis)


class TestUnitarilyEquivalent:
    def test_self_equivalence_is_identity(self, bidisk):
        W = unitarily_equivalent(bidisk, bidisk)
        assert np.array_equal(W, np.eye(4))

    def test_plant_and_recover(self):
        rng = np.random.default_rng(21)
        A = random_tuple(2, 3, rng)
        U = haar_unitary(3, rng)
        B = A.compressed(U)
        W = unitarily_equivalent(A, B)
        assert W is not None
        for Ma, Mb in zip(A.mats, B.mats):
            assert np.linalg.norm(W.conj().T @ Ma @ W - Mb) < 1e-8

    def test_scaled_copies_differ(self):
        a = MatrixTuple([e_matrix(2, 0, 1)])
        b = a.scaled(2.0)
        assert unitarily_equivalent(a, b) is None

    def test_symmetry(self):
        rng = np.random.default_rng(23)
        A = random_tuple(2, 2, rng).direct_sum(random_tuple(2, 3, rng))
        B = A.compressed(haar_unitary(5, rng))
        assert (unitarily_equivalent(A, B) is not None) == (
            unitarily_equivalent(B, A) is not None
        )
        C = random_tuple(2, 5, rng)
        assert (unitarily_equivalent(A, C) is not None) == (
            unitarily_equivalent(C, A) is not None
        )

    def test_size_mismatch_raises(self):
        with pytest.raises(ShapeMismatch):
            unitarily_equivalent(
                MatrixTuple([np.eye(2)]), MatrixTuple([np.eye(3)])
            )


class TestMinimizePencil:
    def test_irreducible_is_kept(self):
        rng = np.random.default_rng(31)
        A = random_tuple(2, 3, rng)
        cert = minimize_pencil(A)
        assert cert.dropped_block_indices == []
        assert cert.minimal_tuple.d == 3

    def test_duplicate_blocks_dedupe(self):
        rng = np.random.default_rng(33)
        a = random_tuple(2, 2, rng)
        A = a.direct_sum(a).compressed(haar_unitary(4, rng))
        cert = minimize_pencil(A)
        assert cert.minimal_tuple.d == 2
        assert unitarily_equivalent(cert.minimal_tuple, a) is not None
        kinds = {w["kind"] for w in cert.inclusion_witnesses}
        assert "duplicate" in kinds

    def test_dominated_scaled_ball_block_dropped(self):
        ball = ball_tuple(2)
        A = ball.direct_sum(ball.scaled(0.5))
        cert = minimize_pencil(A)
        assert cert.minimal_tuple.d == 3
        assert unitarily_equivalent(cert.minimal_tuple, ball) is not None
        kinds = {w["kind"] for w in cert.inclusion_witnesses}
        assert "dominated" in kinds

    def test_idempotent_up_to_unitary(self):
        rng = np.random.default_rng(35)
        a = random_tuple(2, 2, rng)
        A = a.direct_sum(a.scaled(0.5)).compressed(haar_unitary(4, rng))
        m1 = minimize_pencil(A).minimal_tuple
        m2 = minimize_pencil(m1).minimal_tuple
        assert unitarily_equivalent(m1, m2) is not None

    def test_membership_preserved(self):
        rng = np.random.default_rng(37)
        a = random_tuple(2, 2, rng)
        A = a.direct_sum(a).compressed(haar_unitary(4, rng))
        minimal = minimize_pencil(A).minimal_tuple
        for n in (1, 2, 3):
            for _ in range(20):
                X = random_tuple(2, n, rng, scale=1.2)
                assert membership(A, X).member == membership(minimal, X).member
