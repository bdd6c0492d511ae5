"""Free matrix polynomials and invariance under coordinate unitary conjugation.

A free matrix polynomial is a finite sum ``p(x) = sum_w B_w w(x)`` over
words w in the letters x_1, ..., x_g and their adjoints, evaluated on
matrix tuples by ``p(X) = sum_w B_w (x) w(X)``.  A monic square p is
invariant under substituting x_i -> U_i^* x_i U_i (separate unitaries per
variable, up to joint unitary equivalence of the values) exactly when it
is, up to one unitary change of basis, a direct sum of univariate
polynomials; the test below certifies that structure instead of ever
constructing the value-side unitary, which varies with the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, InternalInconsistency, PolynomialCapExceeded, ShapeMismatch
from .pencil_core import MatrixTuple

DEGREE_CAP = 8
TERM_CAP = 10_000


@dataclass(frozen=True)
class Letter:
    """One letter: a variable index (0-based) with an optional star."""

    var: int
    starred: bool = False


class Word:
    """A word over the 2g letters; the empty word is the identity."""

    __slots__ = ("letters",)

    def __init__(self, letters: Sequence = ()):  # accepts (var, star) pairs or Letters
        norm = []
        for item in letters:
            if isinstance(item, Letter):
                norm.append((item.var, item.starred))
            else:
                v, s = item
                norm.append((int(v), bool(s)))
        self.letters: Tuple[Tuple[int, bool], ...] = tuple(norm)

    def __len__(self) -> int:
        return len(self.letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __repr__(self) -> str:
        return f"Word({self.pretty()!r})"

    def pretty(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(f"x{v + 1}{'*' if s else ''}" for v, s in self.letters)

    def adjoint(self) -> "Word":
        return Word(tuple((v, not s) for v, s in reversed(self.letters)))

    def concat(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def is_cross_term(self) -> bool:
        """True when some adjacent pair of letters uses distinct variables."""
        return any(
            self.letters[k][0] != self.letters[k + 1][0] for k in range(len(self.letters) - 1)
        )

    def single_variable(self) -> Optional[int]:
        """The unique variable of a nonempty non-cross word, else None."""
        if not self.letters or self.is_cross_term():
            return None
        return self.letters[0][0]

    def evaluate(self, X: MatrixTuple) -> np.ndarray:
        M = np.eye(X.rows, dtype=complex)
        for v, s in self.letters:
            M = M @ (X.mats[v].conj().T if s else X.mats[v])
        return M


EMPTY_WORD = Word(())


@dataclass
class FreeMatrixPolynomial:
    """Finite map from words to coefficient matrices of one shared shape."""

    rows: int
    cols: int
    g: int
    terms: Dict[Word, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: Dict[Word, np.ndarray] = {}
        for w, B in self.terms.items():
            B = np.asarray(B, dtype=complex)
            if B.shape != (self.rows, self.cols):
                raise ShapeMismatch(f"coefficient of {w.pretty()} has shape {B.shape}")
            if any(v < 0 or v >= self.g for v, _ in w.letters):
                raise InputError(f"word {w.pretty()} uses a variable outside 1..{self.g}")
            if np.any(B):
                clean[w] = B
        if len(clean) > TERM_CAP:
            raise PolynomialCapExceeded(f"{len(clean)} terms exceeds cap {TERM_CAP}")
        if clean and max(len(w) for w in clean) > DEGREE_CAP:
            raise PolynomialCapExceeded(f"degree exceeds cap {DEGREE_CAP}")
        self.terms = clean

    @property
    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_monic(self, atol: float = 1e-9) -> bool:
        if not self.is_square():
            return False
        B0 = self.terms.get(EMPTY_WORD)
        return B0 is not None and bool(np.allclose(B0, np.eye(self.rows), atol=atol))

    def coefficient_norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(B) ** 2 for B in self.terms.values())))

    def coefficients_conjugated(self, U: np.ndarray) -> "FreeMatrixPolynomial":
        Uh = np.asarray(U, dtype=complex).conj().T
        return FreeMatrixPolynomial(
            self.rows, self.cols, self.g, {w: Uh @ B @ U for w, B in self.terms.items()}
        )

    def to_json(self) -> dict:
        from . import jsonio

        return {
            "rows": self.rows,
            "cols": self.cols,
            "g": self.g,
            "terms": [
                {
                    "word": [{"var": v + 1, "star": s} for v, s in w.letters],
                    "coeff": jsonio.matrix_to_json(B),
                }
                for w, B in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0].letters))
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "FreeMatrixPolynomial":
        from . import jsonio

        try:
            rows, cols, g = int(obj["rows"]), int(obj["cols"]), int(obj["g"])
            raw_terms = obj["terms"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed polynomial object: {exc}") from exc
        terms: Dict[Word, np.ndarray] = {}
        for t in raw_terms:
            letters = []
            for item in t.get("word", []):
                var = int(item["var"])
                if var < 1 or var > g:
                    raise InputError(f"letter variable {var} outside 1..{g}")
                letters.append((var - 1, bool(item.get("star", False))))
            terms[Word(tuple(letters))] = jsonio.matrix_from_json(t["coeff"])
        return FreeMatrixPolynomial(rows=rows, cols=cols, g=g, terms=terms)


def eval_poly(p: FreeMatrixPolynomial, X: MatrixTuple) -> np.ndarray:
    """Evaluate ``sum_w B_w (x) w(X)``; the empty word contributes identity."""
    if p.g != X.g:
        raise ShapeMismatch(f"polynomial has g={p.g}, point has g={X.g}")
    n = X.rows
    out = np.zeros((p.rows * n, p.cols * n), dtype=complex)
    for w, B in p.terms.items():
        out += np.kron(B, w.evaluate(X))
    return out


def adjoint(p: FreeMatrixPolynomial) -> FreeMatrixPolynomial:
    """Conjugate-transpose coefficients on reversed, starred words."""
    terms: Dict[Word, np.ndarray] = {}
    for w, B in p.terms.items():
        wa = w.adjoint()
        terms[wa] = terms.get(wa, 0) + B.conj().T
    return FreeMatrixPolynomial(p.cols, p.rows, p.g, terms)


def multiply(p: FreeMatrixPolynomial, q: FreeMatrixPolynomial) -> FreeMatrixPolynomial:
    """Convolution product; evaluation is multiplicative against it."""
    if p.g != q.g:
        raise ShapeMismatch("variable counts differ")
    if p.cols != q.rows:
        raise ShapeMismatch(f"inner shapes differ: {p.cols} vs {q.rows}")
    terms: Dict[Word, np.ndarray] = {}
    for w1, B1 in p.terms.items():
        for w2, B2 in q.terms.items():
            w = w1.concat(w2)
            acc = terms.get(w)
            prod = B1 @ B2
            terms[w] = prod if acc is None else acc + prod
    return FreeMatrixPolynomial(p.rows, q.cols, p.g, terms)


def cross_term_split(
    p: FreeMatrixPolynomial,
) -> Tuple[FreeMatrixPolynomial, FreeMatrixPolynomial]:
    """Partition p into its non-cross and cross parts; they re-sum to p exactly."""
    ncr = {w: B for w, B in p.terms.items() if not w.is_cross_term()}
    cr = {w: B for w, B in p.terms.items() if w.is_cross_term()}
    return (
        FreeMatrixPolynomial(p.rows, p.cols, p.g, ncr),
        FreeMatrixPolynomial(p.rows, p.cols, p.g, cr),
    )


def conjugate_coordinates(p: FreeMatrixPolynomial, unitaries: Sequence[np.ndarray]):
    """Evaluation helper applying x_i -> U_i^* x_i U_i at evaluation time."""
    Us = [np.asarray(U, dtype=complex) for U in unitaries]
    if len(Us) != p.g:
        raise ShapeMismatch(f"need {p.g} unitaries, got {len(Us)}")

    def evaluate(X: MatrixTuple) -> np.ndarray:
        if X.rows != Us[0].shape[0]:
            raise ShapeMismatch("unitary size does not match evaluation level")
        subbed = MatrixTuple([U.conj().T @ M @ U for U, M in zip(Us, X.mats)])
        return eval_poly(p, subbed)

    return evaluate


@dataclass(frozen=True)
class InvarianceVerdict:
    """Outcome of the coordinate-conjugation invariance test."""

    invariant: bool
    failure_witness: Optional[dict] = None
    basis: Optional[np.ndarray] = None
    univariate_parts: Optional[List[FreeMatrixPolynomial]] = None
    part_variables: Optional[List[int]] = None

    def to_json(self) -> dict:
        from . import jsonio

        out: dict = {"invariant": self.invariant}
        if self.failure_witness is not None:
            wit = dict(self.failure_witness)
            for key in ("w_i", "w_j", "cross_term"):
                if isinstance(wit.get(key), Word):
                    wit[key] = wit[key].pretty()
            out["witness"] = wit
        if self.invariant and self.basis is not None:
            out["decomposition"] = {
                "basis": jsonio.matrix_to_json(self.basis),
                "univariate_parts": [q.to_json() for q in self.univariate_parts],
                "part_variables": [v + 1 for v in self.part_variables],
            }
        return out


def _coefficient_support(blocks: Sequence[np.ndarray], d: int) -> np.ndarray:
    """Orthonormal basis of the span of all ranges and co-ranges."""
    if not blocks:
        return np.zeros((d, 0), dtype=complex)
    stacked = np.hstack([np.hstack([B, B.conj().T]) for B in blocks])
    U, s, _ = np.linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(s > max(1e-12, 1e-10 * (s[0] if len(s) else 0.0))))
    return U[:, :rank]


def invariance_test(
    p: FreeMatrixPolynomial, tol: float = 1e-9, seed: int = 0
) -> InvarianceVerdict:
    """Decide invariance under per-coordinate unitary conjugation.

    Stage 1 rejects on any cross term.  Stage 2 writes p = I + sum_i
    p_i(x_i) and demands all three coefficient products A_{w_i} A_{w_j},
    A_{w_i}^* A_{w_j}, A_{w_i} A_{w_j}^* vanish for i != j (each monomial
    of the corresponding polynomial products occurs exactly once, so the
    products must vanish coefficientwise).  Stage 3 assembles the direct
    sum: the ranges and co-ranges of variable i's coefficients span a
    reducing subspace killed by every other variable.  Stage 4 audits the
    claim spectrally on random substitutions.
    """
    if not p.is_square():
        raise ShapeMismatch("invariance is defined for square polynomials")
    if not p.is_monic(atol=max(tol, 1e-9)):
        raise InputError("invariance classification requires a monic polynomial")
    d = p.rows

    for w in sorted(p.terms, key=lambda w: (len(w), w.letters)):
        if w.is_cross_term():
            return InvarianceVerdict(False, failure_witness={"kind": "cross_term", "cross_term": w})

    by_var: Dict[int, List[Tuple[Word, np.ndarray]]] = {i: [] for i in range(p.g)}
    for w, B in p.terms.items():
        var = w.single_variable()
        if var is not None:
            by_var[var].append((w, B))

    product_kinds = (
        ("A_i A_j", lambda Bi, Bj: Bi @ Bj),
        ("A_i* A_j", lambda Bi, Bj: Bi.conj().T @ Bj),
        ("A_i A_j*", lambda Bi, Bj: Bi @ Bj.conj().T),
    )
    for i in range(p.g):
        for j in range(p.g):
            if i == j:
                continue
            for wi, Bi in by_var[i]:
                for wj, Bj in by_var[j]:
                    bound = tol * (1.0 + np.linalg.norm(Bi) * np.linalg.norm(Bj))
                    for kind, op in product_kinds:
                        if np.linalg.norm(op(Bi, Bj)) > bound:
                            return InvarianceVerdict(
                                False,
                                failure_witness={
                                    "kind": "coefficient_product",
                                    "w_i": wi,
                                    "w_j": wj,
                                    "product": kind,
                                },
                            )

    # Stage 3: the supports are pairwise orthogonal by stage 2, each reducing
    # for its own variable's coefficients and killed by the others; leftover
    # directions carry only the identity and ride along with the last part.
    supports = [_coefficient_support([B for _, B in by_var[i]], d) for i in range(p.g)]
    occupied = [V for V in supports if V.shape[1]]
    if occupied:
        residual_basis = _orthogonal_complement(np.hstack(occupied), d)
    else:
        residual_basis = np.eye(d, dtype=complex)
    part_bases: List[np.ndarray] = []
    part_variables: List[int] = []
    for i, V in enumerate(supports):
        if i == p.g - 1 and residual_basis.shape[1]:
            V = np.hstack([V, residual_basis]) if V.shape[1] else residual_basis
        if V.shape[1] == 0:
            continue
        part_bases.append(V)
        part_variables.append(i)
    pieces = []
    for i, V in zip(part_variables, part_bases):
        size = V.shape[1]
        terms = {EMPTY_WORD: np.eye(size, dtype=complex)}
        for w, B in by_var[i]:
            terms[w] = V.conj().T @ B @ V
        pieces.append(FreeMatrixPolynomial(size, size, p.g, terms))
    basis = np.hstack(part_bases)
    if basis.shape[1] != d:
        raise InternalInconsistency(
            f"direct sum basis spans {basis.shape[1]} of {d} dimensions"
        )

    _spectral_audit(p, tol, seed)
    return InvarianceVerdict(
        True, basis=basis, univariate_parts=pieces, part_variables=part_variables
    )


def _orthogonal_complement(V: np.ndarray, d: int) -> np.ndarray:
    full = np.linalg.svd(V, full_matrices=True)[0]
    rank = V.shape[1]
    return full[:, rank:]


def _spectral_audit(p: FreeMatrixPolynomial, tol: float, seed: int, rounds: int = 20) -> None:
    """Singular values of p(U_1^* X_1 U_1, ...) must match those of p(X)."""
    from .generators import haar_unitary

    rng = np.random.default_rng(seed)
    for k in range(rounds):
        n = 2 + (k % 2)
        X = MatrixTuple(
            (rng.standard_normal((p.g, n, n)) + 1j * rng.standard_normal((p.g, n, n)))
            / np.sqrt(2 * n)
        )
        Us = [haar_unitary(n, rng) for _ in range(p.g)]
        ref = np.linalg.svd(eval_poly(p, X), compute_uv=False)
        got = np.linalg.svd(conjugate_coordinates(p, Us)(X), compute_uv=False)
        scale = 1.0 + float(ref[0]) if len(ref) else 1.0
        if np.max(np.abs(ref - got)) > 1e3 * tol * scale:
            raise InternalInconsistency(
                "structural stages passed but singular values moved under "
                "coordinate conjugation"
            )
