"""Matrix tuples and linear pencils evaluated by Kronecker lifting.

A g-tuple A of d x d matrices determines the homogeneous pencil
``Lambda_A(X) = sum_j A_j (x) X_j`` and the monic pencil
``L_A(X) = I - Lambda_A(X) - Lambda_A(X)^*``, evaluated on g-tuples X of
n x n matrices.  The Kronecker factor order is fixed as coefficient on
the left; every other module inherits that convention.  The free
spectrahedron of A is the graded set of all X, over all sizes n, with
L_A(X) positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EigensolverFailure, NotBoundary, ShapeMismatch


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair used by every numerical decision."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-7

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()

#: Boundary is declared inside a band of this many absolute tolerances,
#: wide enough that a kernel vector exists numerically for separation.
BOUNDARY_BAND = 10.0


class MatrixTuple:
    """Immutable g-tuple of equally shaped complex matrices.

    Coefficient tuples of monic pencils are square (d x d); corner forms
    and separating pencils may carry rectangular coefficients.
    """

    __slots__ = ("_mats",)

    def __init__(self, matrices: Sequence[np.ndarray]) -> None:
        try:
            mats = np.array(matrices, dtype=complex)
        except ValueError as exc:
            raise ShapeMismatch(f"matrices do not share one shape: {exc}") from exc
        if mats.ndim != 3:
            raise ShapeMismatch("expected a sequence of equally shaped matrices")
        if mats.shape[0] < 1 or mats.shape[1] < 1 or mats.shape[2] < 1:
            raise ShapeMismatch("tuple and matrices must be nonempty")
        if not np.all(np.isfinite(mats.view(np.float64))):
            raise ValueError("matrix entries must be finite")
        mats.setflags(write=False)
        self._mats = mats

    @property
    def mats(self) -> np.ndarray:
        """The (g, rows, cols) coefficient array (read-only)."""
        return self._mats

    @property
    def g(self) -> int:
        return self._mats.shape[0]

    @property
    def rows(self) -> int:
        return self._mats.shape[1]

    @property
    def cols(self) -> int:
        return self._mats.shape[2]

    @property
    def d(self) -> int:
        if self.rows != self.cols:
            raise ShapeMismatch("matrix size d is defined for square tuples only")
        return self.rows

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __len__(self) -> int:
        return self.g

    def __iter__(self):
        return iter(self._mats)

    def __getitem__(self, j: int) -> np.ndarray:
        return self._mats[j]

    def __repr__(self) -> str:
        return f"MatrixTuple(g={self.g}, shape={self.rows}x{self.cols})"

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self._mats))

    def scaled(self, c: complex) -> "MatrixTuple":
        return MatrixTuple(self._mats * c)

    def compressed(self, V: np.ndarray) -> "MatrixTuple":
        """Two-sided compression V^* A_j V by a (possibly rectangular) isometry."""
        V = np.asarray(V, dtype=complex)
        Vh = V.conj().T
        return MatrixTuple([Vh @ M @ V for M in self._mats])

    def direct_sum(self, other: "MatrixTuple") -> "MatrixTuple":
        if self.g != other.g:
            raise ShapeMismatch("direct sum needs matching variable counts")
        r, c = self.rows + other.rows, self.cols + other.cols
        out = np.zeros((self.g, r, c), dtype=complex)
        out[:, : self.rows, : self.cols] = self._mats
        out[:, self.rows :, self.cols :] = other.mats
        return MatrixTuple(out)

    def allclose(self, other: "MatrixTuple", atol: float = 1e-12) -> bool:
        return (
            self.g == other.g
            and self._mats.shape == other.mats.shape
            and bool(np.allclose(self._mats, other.mats, atol=atol))
        )


def zero_tuple(g: int, n: int) -> MatrixTuple:
    return MatrixTuple(np.zeros((g, n, n)))


@dataclass(frozen=True)
class HomogeneousPencil:
    """Wrapper for ``Lambda_A(X) = sum_j A_j (x) X_j`` with its coefficient tuple."""

    coefficients: MatrixTuple

    def __call__(self, X: "MatrixTuple") -> np.ndarray:
        return eval_homogeneous(self.coefficients, X)

    def norm_at(self, X: "MatrixTuple") -> float:
        return pencil_ball_norm(self.coefficients, X)

    def to_json(self) -> dict:
        from . import jsonio

        return jsonio.tuple_to_json(self.coefficients)


@dataclass(frozen=True)
class MonicPencil:
    """Wrapper for ``L_A(X) = I - Lambda_A(X) - Lambda_A(X)^*``; identity at zero."""

    coefficients: MatrixTuple

    def __post_init__(self) -> None:
        if not self.coefficients.is_square:
            raise ShapeMismatch("monic pencils need square coefficients")

    def __call__(self, X: "MatrixTuple") -> np.ndarray:
        return eval_monic(self.coefficients, X)

    def to_json(self) -> dict:
        from . import jsonio

        return jsonio.tuple_to_json(self.coefficients)


def direct_sum(tuples: Sequence[MatrixTuple]) -> MatrixTuple:
    if not tuples:
        raise ShapeMismatch("cannot form an empty direct sum")
    acc = tuples[0]
    for t in tuples[1:]:
        acc = acc.direct_sum(t)
    return acc


@dataclass(frozen=True)
class MembershipReport:
    """Outcome of one pencil positivity test.

    ``member`` holds when the smallest eigenvalue clears the scale-aware
    threshold; ``boundary`` additionally requires that eigenvalue to sit
    inside the boundary band, in which case ``kernel_vector`` is a unit
    eigenvector for it.
    """

    member: bool
    min_eigenvalue: float
    boundary: bool
    kernel_vector: Optional[np.ndarray]

    def to_json(self) -> dict:
        from . import jsonio

        out = {
            "member": self.member,
            "min_eigenvalue": self.min_eigenvalue,
            "boundary": self.boundary,
        }
        if self.kernel_vector is not None:
            out["kernel_vector"] = jsonio.vector_to_json(self.kernel_vector)
        return out


@dataclass(frozen=True)
class DetailedBoundaryPoint:
    """A spectrahedron member X together with a unit kernel vector of L_A(X)."""

    X: MatrixTuple
    v: np.ndarray

    @property
    def level(self) -> int:
        return self.X.d

    def to_json(self) -> dict:
        from . import jsonio

        return {"X": jsonio.tuple_to_json(self.X), "v": jsonio.vector_to_json(self.v)}


def _check_compatible(A: MatrixTuple, X: MatrixTuple) -> None:
    if A.g != X.g:
        raise ShapeMismatch(f"variable counts differ: {A.g} vs {X.g}")
    if not X.is_square:
        raise ShapeMismatch("evaluation points must be square matrix tuples")


def eval_homogeneous(A: MatrixTuple, X: MatrixTuple) -> np.ndarray:
    """Evaluate ``sum_j A_j (x) X_j``; bilinear in the two tuples."""
    _check_compatible(A, X)
    n = X.rows
    out = np.zeros((A.rows * n, A.cols * n), dtype=complex)
    for Aj, Xj in zip(A.mats, X.mats):
        out += np.kron(Aj, Xj)
    return out


def eval_monic(A: MatrixTuple, X: MatrixTuple) -> np.ndarray:
    """Evaluate ``I - Lambda_A(X) - Lambda_A(X)^*``, symmetrized exactly."""
    if not A.is_square:
        raise ShapeMismatch("monic pencils need square coefficients")
    lam = eval_homogeneous(A, X)
    L = np.eye(A.d * X.rows, dtype=complex) - lam - lam.conj().T
    return (L + L.conj().T) / 2.0


def min_eigenpair(H: np.ndarray):
    """Smallest eigenvalue and eigenvector of a Hermitian matrix."""
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise EigensolverFailure("eigensolver did not converge") from exc
    return float(w[0]), V[:, 0], float(max(abs(w[0]), abs(w[-1])))


def membership(A: MatrixTuple, X: MatrixTuple, tol: Tolerance = DEFAULT_TOL) -> MembershipReport:
    """Decide whether X satisfies L_A(X) >= 0, with boundary detection."""
    L = eval_monic(A, X)
    lam, vec, scale = min_eigenpair(L)
    member = lam >= -(tol.abs_tol + tol.rel_tol * scale)
    boundary = member and abs(lam) <= BOUNDARY_BAND * tol.abs_tol
    return MembershipReport(member, lam, boundary, vec if boundary else None)


def verify_boundary_point(
    A: MatrixTuple, pt: DetailedBoundaryPoint, tol: Tolerance = DEFAULT_TOL
) -> None:
    """Raise NotBoundary unless pt is a valid detailed-boundary witness for A."""
    v = np.asarray(pt.v, dtype=complex).ravel()
    if v.shape[0] != A.d * pt.X.rows:
        raise NotBoundary("kernel vector length does not match d*n")
    nv = np.linalg.norm(v)
    if abs(nv - 1.0) > 1e3 * tol.abs_tol:
        raise NotBoundary("kernel vector is not unit norm")
    rep = membership(A, pt.X, tol)
    if not rep.member:
        raise NotBoundary("point is outside the spectrahedron")
    resid = np.linalg.norm(eval_monic(A, pt.X) @ v)
    if resid > BOUNDARY_BAND * (tol.abs_tol + tol.rel_tol):
        raise NotBoundary(f"kernel residual {resid:.3e} too large")


def pencil_ball_norm(F: MatrixTuple, X: MatrixTuple) -> float:
    """Operator norm of the homogeneous pencil value ``sum_j F_j (x) X_j``."""
    lam = eval_homogeneous(F, X)
    if lam.size == 0:
        return 0.0
    return float(np.linalg.norm(lam, 2))


def canonical_shuffle(ell: int, nu: int) -> np.ndarray:
    """Permutation P with ``B (x) Z == P^* (Z (x) B) P`` for B in M_ell, Z in M_nu.

    P sends x (x) y to y (x) x for x of length ell and y of length nu.
    """
    if ell < 1 or nu < 1:
        raise ShapeMismatch("shuffle sizes must be positive")
    P = np.zeros((nu * ell, nu * ell), dtype=complex)
    for i in range(ell):
        for j in range(nu):
            P[j * ell + i, i * nu + j] = 1.0
    return P
