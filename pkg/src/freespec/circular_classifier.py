"""Circularity of free spectrahedra via a Hermitian grading operator.

A minimal coefficient tuple defines a circular free spectrahedron exactly
when each irreducible block carries a Hermitian grading K solving
``A_s K - K A_s = A_s``: conjugation by exp(itK) then rotates the tuple
by the phase e^{it}, and the integer eigenlevels of K realize the
block-superdiagonal canonical form (K = blockwise diag(0, 1, ..., k)).
The decision therefore reduces to one linear least-squares solve per
irreducible block, replacing a search over unitaries and angles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import AmbiguousLevels, NotSuperdiagonal
from .pencil_core import DEFAULT_TOL, MatrixTuple, Tolerance
from .tuple_algebra import MinimalityCertificate, irreducible_blocks, minimize_pencil

#: Levels are trusted when they round to integers at least this cleanly.
LEVEL_ROUNDING_SLACK = 0.1


@dataclass(frozen=True)
class GradingCertificate:
    """Hermitian K with [A_s, K] = A_s plus its eigenlevel structure.

    ``levels`` lists (integer level, multiplicity) pairs per irreducible
    block, minimum level normalized to zero inside each block; ``basis``
    orders eigenvectors block by block with levels ascending, which puts
    the nonzero blocks of the conjugated tuple on the superdiagonal.
    """

    K: np.ndarray
    levels: List[List[Tuple[int, int]]]
    basis: np.ndarray
    residual: float
    block_sizes: List[int]

    def to_json(self) -> dict:
        from . import jsonio

        return {
            "K": jsonio.matrix_to_json(self.K),
            "levels": [[[int(l), int(m)] for l, m in blk] for blk in self.levels],
            "basis": jsonio.matrix_to_json(self.basis),
            "residual": self.residual,
            "block_sizes": list(self.block_sizes),
        }


@dataclass(frozen=True)
class SuperdiagonalForm:
    """Canonical block-superdiagonal coordinates of a graded tuple.

    ``block_sizes`` holds, per irreducible component, the level
    multiplicities (m_1, ..., m_{k+1}) in ascending level order;
    ``transformed`` is the conjugated tuple with sub-tolerance off-pattern
    entries zeroed; ``chains`` records the admissible chain of level
    indices per component, whose left end is the block zero column.
    """

    basis: np.ndarray
    block_sizes: List[List[int]]
    transformed: MatrixTuple
    chains: List[List[int]]

    def to_json(self) -> dict:
        from . import jsonio

        return {
            "basis": jsonio.matrix_to_json(self.basis),
            "block_sizes": [list(b) for b in self.block_sizes],
            "transformed": jsonio.tuple_to_json(self.transformed),
            "chains": [list(c) for c in self.chains],
        }


@dataclass(frozen=True)
class CircularClassification:
    circular: bool
    form: Optional[SuperdiagonalForm]
    minimality: MinimalityCertificate
    grading: Optional[GradingCertificate]
    residual: float

    def to_json(self) -> dict:
        from . import jsonio

        out = {
            "circular": self.circular,
            "residual": self.residual,
            "minimality_indeterminate": self.minimality.indeterminate,
        }
        if self.form is not None:
            out["block_sizes"] = [list(b) for b in self.form.block_sizes]
            out["basis"] = jsonio.matrix_to_json(self.form.basis)
        if self.grading is not None:
            out["K_levels"] = [[[int(l), int(m)] for l, m in blk] for blk in self.grading.levels]
        return out


def _hermitian_basis(d: int) -> List[np.ndarray]:
    out = []
    for i in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[i, i] = 1.0
        out.append(E)
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = E[j, i] = 1.0 / np.sqrt(2)
            out.append(E)
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1j / np.sqrt(2)
            E[j, i] = -1j / np.sqrt(2)
            out.append(E)
    return out


def _grade_block(A: MatrixTuple) -> Tuple[Optional[np.ndarray], float]:
    """Least-squares Hermitian solution of A_s K - K A_s = A_s, all s jointly."""
    d = A.d
    basis = _hermitian_basis(d)
    cols = []
    for G in basis:
        col = np.concatenate([(M @ G - G @ M).ravel() for M in A.mats])
        cols.append(col)
    Mc = np.array(cols).T
    rhs = np.concatenate([M.ravel() for M in A.mats])
    Mr = np.vstack([np.real(Mc), np.imag(Mc)])
    rr = np.concatenate([np.real(rhs), np.imag(rhs)])
    kappa, *_ = np.linalg.lstsq(Mr, rr, rcond=None)
    K = sum(k * G for k, G in zip(kappa, basis))
    residual = float(np.linalg.norm(Mr @ kappa - rr))
    return K, residual


def _normalize_levels(K: np.ndarray) -> Tuple[np.ndarray, np.ndarray, List[Tuple[int, int]]]:
    """Shift min eigenvalue to zero, round to integer levels, order ascending.

    Rounding slack 0.1 forces distinct rounded levels at least 0.8 apart,
    well clear of the 0.5 separation an exact grading guarantees.
    """
    w, V = np.linalg.eigh(K)
    w = w - w[0]
    rounded = np.rint(w)
    if np.max(np.abs(w - rounded)) > LEVEL_ROUNDING_SLACK:
        raise AmbiguousLevels(f"grading eigenvalues {w} do not round to integer levels")
    levels = rounded.astype(int)
    order = np.argsort(levels, kind="stable")
    uniq = np.unique(levels)
    counts = [(int(l), int(np.sum(levels == l))) for l in uniq]
    return levels[order], V[:, order], counts


def solve_grading(A: MatrixTuple, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> Optional[GradingCertificate]:
    """Solve for the grading of A, or None when no grading exists at tolerance.

    Works per irreducible block (the commutator equations decouple along
    reducing subspaces) and normalizes each block's minimum level to zero.
    """
    dec = irreducible_blocks(A, tol, seed=seed)
    a_norm = A.frobenius_norm()
    threshold = tol.abs_tol + tol.rel_tol * (1.0 + a_norm)
    total_sq = 0.0
    block_bases = []
    block_levels = []
    K_blocks = []
    for block in dec.blocks:
        K_b, res = _grade_block(block)
        total_sq += res * res
        if np.sqrt(total_sq) > threshold:
            return None
        lv, Vb, counts = _normalize_levels(K_b)
        block_bases.append(Vb)
        block_levels.append(counts)
        K_blocks.append((Vb * lv) @ Vb.conj().T)
    residual = float(np.sqrt(total_sq))
    U = dec.change_of_basis
    d = A.d
    basis = np.zeros((d, d), dtype=complex)
    K = np.zeros((d, d), dtype=complex)
    pos = 0
    for Vb, Kb, size in zip(block_bases, K_blocks, dec.block_sizes):
        cols = U[:, pos : pos + size]
        basis[:, pos : pos + size] = cols @ Vb
        K += cols @ Kb @ cols.conj().T
        pos += size
    K = (K + K.conj().T) / 2
    return GradingCertificate(
        K=K,
        levels=block_levels,
        basis=basis,
        residual=residual,
        block_sizes=list(dec.block_sizes),
    )


def superdiagonal_form(
    cert: GradingCertificate, A: MatrixTuple, tol: Tolerance = DEFAULT_TOL
) -> SuperdiagonalForm:
    """Read off the canonical superdiagonal coordinates from a grading.

    In the certificate basis each coefficient maps level l to level l-1,
    so within a component the only allowed blocks sit at positions
    (j, j+1); everything else must be below tolerance, and is zeroed.
    """
    basis = cert.basis
    transformed = np.array([basis.conj().T @ M @ basis for M in A.mats])
    scale = max(float(np.linalg.norm(M)) for M in A.mats)
    threshold = tol.abs_tol + tol.rel_tol * (1.0 + scale)

    sizes_nested: List[List[int]] = []
    chains: List[List[int]] = []
    mask = np.zeros(transformed.shape[1:], dtype=bool)
    pos = 0
    for counts in cert.levels:
        sizes = [m for _, m in counts]
        sizes_nested.append(sizes)
        chains.append(list(range(1, len(sizes) + 1)))
        edges = np.cumsum([pos] + sizes)
        for j in range(len(sizes) - 1):
            mask[edges[j] : edges[j + 1], edges[j + 1] : edges[j + 2]] = True
        pos = edges[-1]

    off = np.where(mask[None, :, :], 0.0, transformed)
    worst = float(np.max(np.abs(off))) if off.size else 0.0
    if worst > threshold:
        raise NotSuperdiagonal(
            f"off-pattern entry of size {worst:.3e} exceeds tolerance {threshold:.3e}"
        )
    cleaned = np.where(mask[None, :, :], transformed, 0.0)
    return SuperdiagonalForm(
        basis=basis,
        block_sizes=sizes_nested,
        transformed=MatrixTuple(cleaned),
        chains=chains,
    )


def classify_circular(
    A: MatrixTuple, tol: Tolerance = DEFAULT_TOL, seed: int = 0
) -> CircularClassification:
    """Decide circularity of the free spectrahedron of A.

    Minimizes A first (classification is a property of the minimal
    defining tuple), then asks for a grading of the minimal tuple; the
    spectrahedron is circular exactly when one exists, and the grading's
    level structure assembles the canonical superdiagonal form.
    """
    mincert = minimize_pencil(A, tol, seed=seed)
    M = mincert.minimal_tuple
    grading = solve_grading(M, tol, seed=seed + 1)
    if grading is None:
        return CircularClassification(False, None, mincert, None, float("inf"))
    form = superdiagonal_form(grading, M, tol)
    return CircularClassification(True, form, mincert, grading, grading.residual)


def rotation_spot_check(
    A: MatrixTuple,
    samples: int = 1000,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
    max_level: int = 4,
) -> float:
    """Monte-Carlo falsifier for circularity; one-sided, used by tests.

    Samples members X of the spectrahedron at small levels and angles t,
    returning the worst smallest eigenvalue of L_A(e^{it} X).  Circular
    sets keep this nonnegative up to tolerance; a clearly negative result
    refutes circularity, but a nonnegative one proves nothing.
    """
    from .generators import member_points
    from .pencil_core import eval_monic

    rng = np.random.default_rng(seed)
    angles_per_point = 8
    levels = list(range(1, max_level + 1))
    per_level = max(1, int(np.ceil(samples / (len(levels) * angles_per_point))))
    worst = np.inf
    for n in levels:
        for X in member_points(A, n, per_level, rng):
            for t in rng.uniform(0.0, 2 * np.pi, size=angles_per_point):
                L = eval_monic(A, X.scaled(np.exp(1j * t)))
                worst = min(worst, float(np.linalg.eigvalsh(L)[0]))
    return worst
