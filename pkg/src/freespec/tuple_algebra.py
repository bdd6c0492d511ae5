"""Decomposition of matrix tuples into irreducible blocks and pencil minimization.

The commutant of a tuple A is the space of matrices commuting with every
A_s and A_s^*.  Its Hermitian elements have eigenspaces that reduce A
simultaneously, which drives the block decomposition; trivial commutant
means irreducible.  Minimization removes blocks whose pencil constraint
is implied by the rest, certified through completely positive map
witnesses, after deduplicating unitarily equivalent blocks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateSplit, Indeterminate, ShapeMismatch
from .pencil_core import DEFAULT_TOL, MatrixTuple, Tolerance, direct_sum

#: Exhaustive word-trace screening goes up to this length; longer words up
#: to the classical 2*d^2 generation bound are sampled randomly, since
#: enumerating them all is combinatorially infeasible.
EXHAUSTIVE_WORD_LENGTH = 4
RANDOM_SCREEN_WORDS = 64


@dataclass(frozen=True)
class BlockDecomposition:
    """Unitary change of basis splitting a tuple into irreducible blocks."""

    change_of_basis: np.ndarray
    blocks: List[MatrixTuple]
    block_sizes: List[int]

    def reassembled(self) -> MatrixTuple:
        return direct_sum(self.blocks)

    def to_json(self) -> dict:
        from . import jsonio

        return {
            "change_of_basis": jsonio.matrix_to_json(self.change_of_basis),
            "block_sizes": list(self.block_sizes),
            "blocks": [jsonio.tuple_to_json(b) for b in self.blocks],
        }


@dataclass(frozen=True)
class MinimalityCertificate:
    """Result of pencil minimization with per-block inclusion witnesses."""

    minimal_tuple: MatrixTuple
    retained_block_indices: List[int]
    dropped_block_indices: List[int]
    inclusion_witnesses: List[dict]
    indeterminate_block_indices: List[int] = field(default_factory=list)
    decomposition: Optional[BlockDecomposition] = None

    @property
    def indeterminate(self) -> bool:
        return bool(self.indeterminate_block_indices)

    def to_json(self) -> dict:
        from . import jsonio

        out = {
            "minimal_tuple": jsonio.tuple_to_json(self.minimal_tuple),
            "retained_block_indices": list(self.retained_block_indices),
            "dropped_block_indices": list(self.dropped_block_indices),
            "indeterminate_block_indices": list(self.indeterminate_block_indices),
            "inclusion_witnesses": [],
        }
        for w in self.inclusion_witnesses:
            rec = dict(w)
            if isinstance(rec.get("choi"), np.ndarray):
                rec["choi"] = jsonio.matrix_to_json(rec["choi"])
            out["inclusion_witnesses"].append(rec)
        return out


def commutant_basis(A: MatrixTuple, rcond: Optional[float] = None) -> List[np.ndarray]:
    """Orthonormal (Frobenius) basis of {C : C A_s = A_s C and C A_s^* = A_s^* C}.

    Solves the joint Sylvester system by a nullspace computation; the
    space always contains the identity, so the result is never empty.
    """
    d = A.d
    eye = np.eye(d)
    rows = []
    for M in A.mats:
        rows.append(np.kron(eye, M.T) - np.kron(M, eye))
        Ms = M.conj().T
        rows.append(np.kron(eye, Ms.T) - np.kron(Ms, eye))
    system = np.vstack(rows)
    basis = scipy.linalg.null_space(system, rcond=rcond)
    return [basis[:, k].reshape(d, d) for k in range(basis.shape[1])]


def _random_hermitian_commutant(
    basis: Sequence[np.ndarray], rng: np.random.Generator
) -> np.ndarray:
    # The commutant is *-closed, so Hermitian and anti-Hermitian parts of a
    # basis span its Hermitian elements over the reals.
    H = np.zeros_like(basis[0])
    for C in basis:
        u, w = rng.standard_normal(2)
        H = H + u * (C + C.conj().T) / 2 + w * (C - C.conj().T) / 2j
    return (H + H.conj().T) / 2


def _eigencluster(w: np.ndarray, gap: float) -> List[np.ndarray]:
    clusters = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[k - 1] <= gap:
            clusters[-1].append(k)
        else:
            clusters.append([k])
    return [np.array(c) for c in clusters]


def irreducible_blocks(
    A: MatrixTuple,
    tol: Tolerance = DEFAULT_TOL,
    seed: int = 0,
    max_retries: int = 8,
) -> BlockDecomposition:
    """Split A into irreducible blocks along common reducing subspaces.

    Draws random Hermitian commutant elements, eigendecomposes them, and
    recurses on each eigenspace until every compression has a trivial
    commutant.  Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    d = A.d
    pending = [np.eye(d, dtype=complex)]
    segments: List[tuple] = []
    while pending:
        V = pending.pop(0)
        block = A.compressed(V)
        basis = commutant_basis(block)
        if len(basis) <= 1:
            segments.append((V, block))
            continue
        clusters = None
        for _ in range(max_retries):
            H = _random_hermitian_commutant(basis, rng)
            w, Q = np.linalg.eigh(H)
            gap = 100.0 * tol.abs_tol * max(1.0, float(np.max(np.abs(w))))
            cand = _eigencluster(w, gap)
            if len(cand) > 1:
                clusters = [(Q[:, idx]) for idx in cand]
                break
        if clusters is None:
            raise DegenerateSplit(
                "could not split a nontrivial commutant after "
                f"{max_retries} random Hermitian draws"
            )
        for Q_sub in clusters:
            pending.append(V @ Q_sub)
    U = np.hstack([V for V, _ in segments])
    blocks = [b for _, b in segments]
    return BlockDecomposition(U, blocks, [b.d for b in blocks])


def _word_trace(T: MatrixTuple, word: Sequence[tuple]) -> complex:
    d = T.d
    M = np.eye(d, dtype=complex)
    for var, star in word:
        factor = T.mats[var]
        M = M @ (factor.conj().T if star else factor)
    return complex(np.trace(M))


def _screen_words(g: int, d: int, rng: np.random.Generator):
    bound = 2 * d * d
    letters = [(v, s) for v in range(g) for s in (False, True)]
    for length in range(1, min(EXHAUSTIVE_WORD_LENGTH, bound) + 1):
        yield from itertools.product(letters, repeat=length)
    for _ in range(RANDOM_SCREEN_WORDS):
        length = int(rng.integers(EXHAUSTIVE_WORD_LENGTH + 1, max(bound, 5) + 1))
        yield tuple(letters[i] for i in rng.integers(0, len(letters), size=length))


def _trace_screen_passes(
    A: MatrixTuple, B: MatrixTuple, tol: Tolerance, rng: np.random.Generator
) -> bool:
    for word in _screen_words(A.g, A.d, rng):
        ta, tb = _word_trace(A, word), _word_trace(B, word)
        if abs(ta - tb) > tol.abs_tol + tol.rel_tol * (1.0 + max(abs(ta), abs(tb))):
            return False
    return True


def _intertwiner_space(A: MatrixTuple, B: MatrixTuple) -> np.ndarray:
    """Nullspace basis of {W : A_s W = W B_s and A_s^* W = W B_s^*}."""
    d = A.d
    eye = np.eye(d)
    rows = []
    for Ma, Mb in zip(A.mats, B.mats):
        rows.append(np.kron(Ma, eye) - np.kron(eye, Mb.T))
        rows.append(np.kron(Ma.conj().T, eye) - np.kron(eye, Mb.conj()))
    return scipy.linalg.null_space(np.vstack(rows))


def _verify_intertwiner(A: MatrixTuple, B: MatrixTuple, W: np.ndarray, tol: Tolerance) -> bool:
    d = A.d
    if np.linalg.norm(W.conj().T @ W - np.eye(d)) > 1e3 * tol.abs_tol * d:
        return False
    for Ma, Mb in zip(A.mats, B.mats):
        if np.linalg.norm(W.conj().T @ Ma @ W - Mb) > tol.abs_tol + tol.rel_tol * (
            1.0 + np.linalg.norm(Ma)
        ):
            return False
    return True


def _irreducible_equivalence(
    A: MatrixTuple, B: MatrixTuple, tol: Tolerance
) -> Optional[np.ndarray]:
    """Unitary W with W^* A_s W = B_s for irreducible same-size blocks, or None.

    For irreducible blocks the intertwiner space is at most one
    dimensional and any nonzero element is a multiple of a unitary.
    """
    if A.d != B.d:
        return None
    space = _intertwiner_space(A, B)
    if space.shape[1] == 0:
        return None
    W0 = space[:, 0].reshape(A.d, A.d)
    gram = W0.conj().T @ W0
    c = float(np.real(np.trace(gram))) / A.d
    if c <= 0 or np.linalg.norm(gram - c * np.eye(A.d)) > 1e3 * tol.abs_tol * (1.0 + c) * A.d:
        raise Indeterminate("intertwiner exists but is not scalar-unitary at tolerance")
    W = W0 / np.sqrt(c)
    if not _verify_intertwiner(A, B, W, tol):
        raise Indeterminate("candidate intertwiner failed verification")
    return W


def unitarily_equivalent(
    A: MatrixTuple, B: MatrixTuple, tol: Tolerance = DEFAULT_TOL, seed: int = 0
) -> Optional[np.ndarray]:
    """Return a unitary W with W^* A_s W = B_s for all s, or None.

    Word traces up to the generation bound are a complete invariant, so a
    trace mismatch is a definitive no; on a screen pass the intertwiner is
    constructed block by block, which is the authority.  Raises
    Indeterminate when the screen passes but no verified intertwiner can
    be assembled.
    """
    if A.g != B.g:
        raise ShapeMismatch("variable counts differ")
    if A.d != B.d:
        raise ShapeMismatch("matrix sizes differ")
    if A.allclose(B):
        return np.eye(A.d, dtype=complex)
    rng = np.random.default_rng(seed)
    if not _trace_screen_passes(A, B, tol, rng):
        return None

    dec_a = irreducible_blocks(A, tol, seed=seed)
    dec_b = irreducible_blocks(B, tol, seed=seed + 1)
    if sorted(dec_a.block_sizes) != sorted(dec_b.block_sizes):
        return None

    cols_a = np.cumsum([0] + dec_a.block_sizes)
    cols_b = np.cumsum([0] + dec_b.block_sizes)
    used = [False] * len(dec_a.blocks)
    W = np.zeros((A.d, B.d), dtype=complex)
    for j, b_block in enumerate(dec_b.blocks):
        match = None
        for i, a_block in enumerate(dec_a.blocks):
            if used[i] or dec_a.block_sizes[i] != dec_b.block_sizes[j]:
                continue
            w = _irreducible_equivalence(a_block, b_block, tol)
            if w is not None:
                match = (i, w)
                break
        if match is None:
            return None
        i, w = match
        used[i] = True
        Va = dec_a.change_of_basis[:, cols_a[i] : cols_a[i + 1]]
        Pb = dec_b.change_of_basis[:, cols_b[j] : cols_b[j + 1]]
        W += (Va @ w) @ Pb.conj().T
    if not _verify_intertwiner(A, B, W, tol):
        raise Indeterminate("assembled block intertwiner failed verification")
    return W


def minimize_pencil(
    A: MatrixTuple, tol: Tolerance = DEFAULT_TOL, seed: int = 0
) -> MinimalityCertificate:
    """Reduce A to a tuple defining the same free spectrahedron minimally.

    Deduplicates unitarily equivalent irreducible blocks, then greedily
    drops any block whose pencil is implied by the remaining direct sum,
    certified by an inclusion witness.  Indeterminate inclusion tests keep
    the block (conservative) and are recorded.  Minimal tuples defining
    the same spectrahedron agree up to unitary equivalence, so the greedy
    order does not affect the result in that sense.
    """
    from .inclusion_sdp import conjugation_choi, includes, verify_choi_witness

    dec = irreducible_blocks(A, tol, seed=seed)
    blocks = dec.blocks
    witnesses: List[dict] = []
    indeterminate: List[int] = []

    # Dedup pass: repeated blocks are the cheap, common case.
    retained: List[int] = []
    for i, block in enumerate(blocks):
        dup = None
        for r in retained:
            if blocks[r].d != block.d:
                continue
            try:
                w = unitarily_equivalent(blocks[r], block, tol, seed=seed + 17 * i)
            except Indeterminate:
                w = None
            if w is not None:
                dup = (r, w)
                break
        if dup is None:
            retained.append(i)
        else:
            r, w = dup
            witnesses.append(
                {"kind": "duplicate", "block": i, "equal_to": r, "choi": conjugation_choi(w)}
            )

    # Greedy drop pass, larger blocks first.
    for i in sorted(retained, key=lambda k: -blocks[k].d):
        if len(retained) == 1:
            break
        others = direct_sum([blocks[j] for j in retained if j != i])
        target = blocks[i]
        # Cheap closed-form witness: the target is a nonnegative multiple of
        # one remaining block (compression then scaling is completely positive).
        verdict = None
        offset = 0
        for j in retained:
            if j == i:
                continue
            bj = blocks[j]
            if bj.d == target.d:
                num = np.vdot(bj.mats, target.mats)
                den = np.vdot(bj.mats, bj.mats)
                c = num / den if den else 0.0
                if abs(c.imag) < 1e-12 and 0.0 <= c.real <= 1.0 + 1e-12:
                    V = np.zeros((others.d, target.d), dtype=complex)
                    V[offset : offset + bj.d, :] = np.eye(bj.d)
                    choi = conjugation_choi(V, float(min(c.real, 1.0)))
                    if verify_choi_witness(others, target, choi, tol):
                        verdict = ("Included", choi)
                        break
            offset += bj.d
        if verdict is None:
            v = includes(others, target, tol, seed=seed + 31 * i)
            if v.status == "Included":
                verdict = ("Included", v.choi_witness)
            elif v.status == "Indeterminate":
                indeterminate.append(i)
        if verdict is not None:
            retained.remove(i)
            witnesses.append({"kind": "dominated", "block": i, "choi": verdict[1]})

    minimal = direct_sum([blocks[j] for j in retained])
    dropped = [i for i in range(len(blocks)) if i not in retained]
    return MinimalityCertificate(
        minimal_tuple=minimal,
        retained_block_indices=retained,
        dropped_block_indices=dropped,
        inclusion_witnesses=witnesses,
        indeterminate_block_indices=indeterminate,
        decomposition=dec,
    )
