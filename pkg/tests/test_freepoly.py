"""Free polynomial algebra and coordinate-conjugation invariance."""

import numpy as np
import pytest

from freespec import (
    FreeMatrixPolynomial,
    MatrixTuple,
    Word,
    adjoint,
    conjugate_coordinates,
    cross_term_split,
    eval_poly,
    invariance_test,
    multiply,
)
from freespec.errors import InputError, PolynomialCapExceeded, ShapeMismatch
from freespec.generators import crossterm_polynomial, haar_unitary, invariant_polynomial

from conftest import e_matrix, random_tuple, scalar_point


def scalar_poly(g, terms):
    return FreeMatrixPolynomial(
        rows=1, cols=1, g=g,
        terms={Word(w): np.array([[c]], dtype=complex) for w, c in terms.items()},
    )


class TestWord:
    def test_adjoint_reverses_and_stars(self):
        w = Word([(0, False), (1, True)])
        assert w.adjoint().letters == ((1, False), (0, True))

    def test_cross_term_detection(self):
        assert Word([(0, False), (1, False)]).is_cross_term()
        assert not Word([(0, False), (0, True)]).is_cross_term()
        assert not Word([]).is_cross_term()
        # stars are disregarded when comparing adjacent variables
        assert Word([(0, True), (1, True)]).is_cross_term()

    def test_pretty(self):
        assert Word([(0, False), (1, True)]).pretty() == "x1 x2*"
        assert Word([]).pretty() == "1"


class TestEvalPoly:
    def test_identity_word(self):
        p = FreeMatrixPolynomial(2, 2, 1, {Word(()): np.eye(2)})
        X = random_tuple(1, 3, np.random.default_rng(0))
        assert np.allclose(eval_poly(p, X), np.eye(6))

    def test_scalar_word_arithmetic(self):
        p = scalar_poly(2, {((0, False), (1, True)): 1.0})
        out = eval_poly(p, scalar_point(2.0, 3.0j))
        assert out[0, 0] == pytest.approx(2.0 * np.conj(3.0j))
        assert out[0, 0] == pytest.approx(-6.0j)

    def test_monic_at_zero(self):
        p = scalar_poly(1, {(): 1.0, ((0, False),): 5.0})
        out = eval_poly(p, MatrixTuple([np.zeros((3, 3))]))
        assert np.allclose(out, np.eye(3))

    def test_mismatch(self):
        p = scalar_poly(2, {(): 1.0})
        with pytest.raises(ShapeMismatch):
            eval_poly(p, scalar_point(1.0))


class TestAdjointMultiply:
    def test_adjoint_of_letter(self):
        p = scalar_poly(1, {((0, False),): 1.0})
        q = adjoint(p)
        assert list(q.terms) == [Word([(0, True)])]

    def test_multiply_single_terms(self):
        p = scalar_poly(2, {((0, False),): 1.0})
        q = scalar_poly(2, {((1, False),): 1.0})
        r = multiply(p, q)
        assert list(r.terms) == [Word([(0, False), (1, False)])]

    def test_evaluation_homomorphism(self):
        rng = np.random.default_rng(2)
        p = invariant_polynomial(2, [1, 2], 2, rng)
        q = invariant_polynomial(2, [1, 2], 2, rng)
        X = random_tuple(2, 2, rng)
        assert np.allclose(
            eval_poly(multiply(p, q), X), eval_poly(p, X) @ eval_poly(q, X), atol=1e-10
        )
        assert np.allclose(eval_poly(adjoint(p), X), eval_poly(p, X).conj().T, atol=1e-10)

    def test_degree_cap(self):
        p = scalar_poly(1, {tuple([(0, False)] * 5): 1.0})
        with pytest.raises(PolynomialCapExceeded):
            multiply(p, p)


class TestCrossTermSplit:
    def test_basic_partition(self):
        p = scalar_poly(2, {(): 1.0, ((0, False), (1, False)): 1.0})
        ncr, cr = cross_term_split(p)
        assert list(cr.terms) == [Word([(0, False), (1, False)])]
        assert list(ncr.terms) == [Word(())]

    def test_same_variable_not_cross(self):
        p = scalar_poly(2, {((0, False), (0, True)): 1.0})
        ncr, cr = cross_term_split(p)
        assert not cr.terms and len(ncr.terms) == 1

    def test_starred_cross(self):
        p = scalar_poly(2, {((0, True), (1, True)): 1.0, ((1, False), (1, False)): 1.0})
        ncr, cr = cross_term_split(p)
        assert list(cr.terms) == [Word([(0, True), (1, True)])]

    def test_resum_exact(self):
        rng = np.random.default_rng(3)
        p = crossterm_polynomial(2, 2, 3, rng)
        ncr, cr = cross_term_split(p)
        for w in set(ncr.terms) | set(cr.terms):
            total = ncr.terms.get(w, 0) + cr.terms.get(w, 0)
            assert np.array_equal(total, p.terms[w])


class TestInvarianceTest:
    def test_planted_direct_sum(self):
        p = FreeMatrixPolynomial(
            2, 2, 2,
            {
                Word(()): np.eye(2),
                Word([(0, False)]): np.diag([1.0, 0.0]).astype(complex),
                Word([(1, False)]): np.diag([0.0, 1.0]).astype(complex),
            },
        )
        v = invariance_test(p)
        assert v.invariant
        assert len(v.univariate_parts) == 2
        sizes = sorted(q.rows for q in v.univariate_parts)
        assert sizes == [1, 1]

    def test_cross_term_witness(self):
        p = scalar_poly(2, {(): 1.0, ((0, False), (1, False)): 1.0})
        v = invariance_test(p)
        assert not v.invariant
        assert v.failure_witness["kind"] == "cross_term"
        assert v.failure_witness["cross_term"].pretty() == "x1 x2"

    def test_cross_term_numeric_counterexample(self):
        # scalar conjugation u* x u = |u|^2 x cannot move level-one points, so
        # the sign flip is realized at level two: swapping the eigenvalues of
        # X2 = diag(1,-1) against X1 = diag(1,0) changes the spectrum of
        # 1 + x1 x2 from {2,1} to {0,1}
        p = scalar_poly(2, {(): 1.0, ((0, False), (1, False)): 1.0})
        X = MatrixTuple([np.diag([1.0, 0.0]), np.diag([1.0, -1.0])])
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        plain = sorted(np.linalg.eigvals(eval_poly(p, X)).real)
        flipped = sorted(
            np.linalg.eigvals(conjugate_coordinates(p, [np.eye(2), swap])(X)).real
        )
        assert plain == pytest.approx([1.0, 2.0])
        assert flipped == pytest.approx([0.0, 1.0])

    def test_coefficient_product_witness(self):
        E = e_matrix(2, 0, 1)
        p = FreeMatrixPolynomial(
            2, 2, 2,
            {Word(()): np.eye(2), Word([(0, False)]): E, Word([(1, False)]): E},
        )
        # E*E = 0 passes the plain product, but E^adj E = E22 != 0
        v = invariance_test(p)
        assert not v.invariant
        assert v.failure_witness["kind"] == "coefficient_product"

    def test_planted_conjugated_recovery(self):
        rng = np.random.default_rng(7)
        p = invariant_polynomial(2, [2, 1], 3, rng)
        v = invariance_test(p, seed=11)
        assert v.invariant
        U = v.basis
        assert np.allclose(U.conj().T @ U, np.eye(3), atol=1e-9)
        # conjugating the coefficients block-diagonalizes them jointly
        sizes = [q.rows for q in v.univariate_parts]
        edges = np.cumsum([0] + sizes)
        for w, Bw in p.terms.items():
            T = U.conj().T @ Bw @ U
            var = w.single_variable()
            for bi in range(len(sizes)):
                for bj in range(len(sizes)):
                    blk = T[edges[bi] : edges[bi + 1], edges[bj] : edges[bj + 1]]
                    if bi != bj:
                        assert np.linalg.norm(blk) < 1e-9
                    elif len(w) and v.part_variables[bi] != var:
                        assert np.linalg.norm(blk) < 1e-9

    def test_univariate_trivially_invariant(self):
        rng = np.random.default_rng(9)
        p = invariant_polynomial(1, [2], 3, rng)
        assert invariance_test(p).invariant

    def test_requires_monic(self):
        p = scalar_poly(1, {((0, False),): 1.0})
        with pytest.raises(InputError):
            invariance_test(p)


class TestConjugateCoordinates:
    def test_identity_unitaries_do_nothing(self):
        rng = np.random.default_rng(13)
        p = invariant_polynomial(2, [1, 1], 2, rng)
        X = random_tuple(2, 2, rng)
        ev = conjugate_coordinates(p, [np.eye(2), np.eye(2)])
        assert np.allclose(ev(X), eval_poly(p, X))

    def test_univariate_singular_values_invariant(self):
        rng = np.random.default_rng(15)
        p = invariant_polynomial(1, [2], 3, rng)
        X = random_tuple(1, 3, rng)
        U = haar_unitary(3, rng)
        ref = np.linalg.svd(eval_poly(p, X), compute_uv=False)
        got = np.linalg.svd(conjugate_coordinates(p, [U])(X), compute_uv=False)
        assert np.allclose(ref, got, atol=1e-9)

    def test_size_mismatch(self):
        p = scalar_poly(1, {(): 1.0})
        ev = conjugate_coordinates(p, [np.eye(2)])
        with pytest.raises(ShapeMismatch):
            ev(scalar_point(1.0))


class TestJsonRoundTrip:
    def test_round_trip(self):
        rng = np.random.default_rng(17)
        p = invariant_polynomial(2, [1, 2], 2, rng)
        q = FreeMatrixPolynomial.from_json(p.to_json())
        assert set(q.terms) == set(p.terms)
        for w in p.terms:
            assert np.allclose(p.terms[w], q.terms[w])
