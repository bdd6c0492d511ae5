"""Free spectrahedral inclusion via completely positive map feasibility.

Inclusion of the solution set of one monic pencil in another is certified
by a completely positive map sending the first coefficient tuple to the
second with subunital image: applying the map, ampliated, to a positive
pencil value dominates the target pencil value.  Feasibility is decided
by a small embedded semidefinite solver (alternating projections between
the affine constraint set and the PSD cone with Dykstra's correction),
and every returned witness is re-verified independently of the solver.
Failed certification falls back to a randomized falsifier searching the
boundary of the first spectrahedron for a violation of the second;
neither route deciding yields the Indeterminate verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import IterationLimit, ShapeMismatch
from .pencil_core import (
    DEFAULT_TOL,
    MatrixTuple,
    Tolerance,
    eval_homogeneous,
    eval_monic,
    membership,
)

# ---------------------------------------------------------------------------
# Real coordinates for Hermitian block variables.
# hvec is an isometry from Hermitian m x m matrices onto R^{m^2}:
# diagonal entries, then sqrt(2) * real and sqrt(2) * imaginary upper parts.
# ---------------------------------------------------------------------------

_SQRT2 = np.sqrt(2.0)


def hvec(X: np.ndarray) -> np.ndarray:
    m = X.shape[0]
    iu = np.triu_indices(m, 1)
    return np.concatenate(
        [np.real(np.diag(X)), _SQRT2 * np.real(X[iu]), _SQRT2 * np.imag(X[iu])]
    )


def unhvec(x: np.ndarray, m: int) -> np.ndarray:
    X = np.zeros((m, m), dtype=complex)
    iu = np.triu_indices(m, 1)
    k = m * (m - 1) // 2
    X[np.diag_indices(m)] = x[:m]
    upper = (x[m : m + k] + 1j * x[m + k :]) / _SQRT2
    X[iu] = upper
    X[(iu[1], iu[0])] = np.conj(upper)
    return X


def _functional_row(F: np.ndarray) -> np.ndarray:
    """Complex row r with <F, X>_Frobenius = r . hvec(X) for Hermitian X."""
    m = F.shape[0]
    Fc = np.conj(F)
    iu = np.triu_indices(m, 1)
    return np.concatenate(
        [
            np.diag(Fc),
            (Fc[iu] + Fc.T[iu]) / _SQRT2,
            1j * (Fc[iu] - Fc.T[iu]) / _SQRT2,
        ]
    )


@dataclass
class SdpProblem:
    """Feasibility problem: Hermitian PSD blocks meeting affine equalities.

    Each constraint is a list of per-block coefficient matrices (None for
    blocks that do not enter) together with a complex right-hand side,
    read as sum_b <F_b, X_b> = rhs.  Operator upper bounds are encoded by
    the caller through an extra PSD slack block.
    """

    block_sizes: List[int]
    constraints: List[Tuple[List[Optional[np.ndarray]], complex]] = field(default_factory=list)

    def add(self, mats: Sequence[Optional[np.ndarray]], rhs: complex) -> None:
        mats = list(mats)
        if len(mats) != len(self.block_sizes):
            raise ShapeMismatch("constraint must address every block (None allowed)")
        self.constraints.append((mats, complex(rhs)))

    @property
    def dim(self) -> int:
        return int(sum(m * m for m in self.block_sizes))

    def offsets(self) -> List[int]:
        out = [0]
        for m in self.block_sizes:
            out.append(out[-1] + m * m)
        return out


def _split_blocks(x: np.ndarray, sizes: Sequence[int]) -> List[np.ndarray]:
    out = []
    pos = 0
    for m in sizes:
        out.append(unhvec(x[pos : pos + m * m], m))
        pos += m * m
    return out


def _join_blocks(blocks: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([hvec(B) for B in blocks])


def _project_psd(x: np.ndarray, sizes: Sequence[int]) -> Tuple[np.ndarray, float]:
    """Project onto the product PSD cone; also report the worst negativity."""
    out = np.empty_like(x)
    pos = 0
    worst = 0.0
    for m in sizes:
        X = unhvec(x[pos : pos + m * m], m)
        w, V = np.linalg.eigh(X)
        worst = min(worst, float(w[0]))
        w = np.clip(w, 0.0, None)
        Xp = (V * w) @ V.conj().T
        out[pos : pos + m * m] = hvec(Xp)
        pos += m * m
    return out, worst


def solve_feasibility(
    problem: SdpProblem,
    tol: Tolerance = DEFAULT_TOL,
    max_iter: int = 20000,
    x0_blocks: Optional[Sequence[np.ndarray]] = None,
    psd_stop: Optional[float] = None,
) -> Optional[List[np.ndarray]]:
    """Find PSD blocks satisfying the equalities, or None if infeasible.

    Dykstra-corrected alternating projections between the affine set and
    the PSD cone.  Returns blocks that satisfy the equalities exactly (by
    final affine projection) and are PSD down to ``psd_stop``; concludes
    infeasibility when the inter-set gap stagnates at a clearly positive
    value; raises IterationLimit otherwise.  Callers re-verify any
    returned assignment independently.
    """
    sizes = list(problem.block_sizes)
    if not sizes:
        raise ShapeMismatch("problem needs at least one PSD block")
    N = problem.dim
    offsets = problem.offsets()

    rows: List[np.ndarray] = []
    rhs: List[float] = []
    for mats, c in problem.constraints:
        row = np.zeros(N, dtype=complex)
        for b, F in enumerate(mats):
            if F is None:
                continue
            F = np.asarray(F, dtype=complex)
            row[offsets[b] : offsets[b + 1]] = _functional_row(F)
        for part, val in ((np.real, c.real), (np.imag, c.imag)):
            r = part(row)
            nr = np.linalg.norm(r)
            if nr < 1e-14:
                if abs(val) > tol.abs_tol:
                    return None  # 0 = nonzero: trivially infeasible
                continue
            rows.append(r)
            rhs.append(val)

    if rows:
        E = np.array(rows)
        c_vec = np.array(rhs)
        U, s, Vt = np.linalg.svd(E, full_matrices=False)
        rank = int(np.sum(s > max(1e-13 * s[0], 1e-300)))
        Ur, sr, Vr = U[:, :rank], s[:rank], Vt[:rank]
        x_part = Vr.T @ ((Ur.T @ c_vec) / sr)
        if np.linalg.norm(E @ x_part - c_vec) > tol.abs_tol * (1.0 + np.linalg.norm(c_vec)):
            return None  # inconsistent equalities

        def proj_affine(x: np.ndarray) -> np.ndarray:
            return x - Vr.T @ (Vr @ x) + x_part

    else:

        def proj_affine(x: np.ndarray) -> np.ndarray:
            return x

    if psd_stop is None:
        psd_stop = min(tol.abs_tol * 1e-3, 1e-11)
    scale = 1.0 + (np.linalg.norm(rhs) if rhs else 0.0)

    if x0_blocks is not None:
        x = proj_affine(_join_blocks([np.asarray(B, dtype=complex) for B in x0_blocks]))
    else:
        x = proj_affine(_join_blocks([np.eye(m, dtype=complex) for m in sizes]))

    p = np.zeros(N)
    gap_hist: List[float] = []
    check_every = 5
    window = 80
    for it in range(max_iter):
        z = x + p
        y, _ = _project_psd(z, sizes)
        p = z - y
        x = proj_affine(y)
        gap = float(np.linalg.norm(y - x))
        gap_hist.append(gap)
        if it % check_every == 0:
            _, worst = _project_psd(x, sizes)
            if worst >= -psd_stop:
                return _split_blocks(x, sizes)
            if len(gap_hist) > window:
                old = gap_hist[-window]
                stalled = old - gap < 1e-4 * gap
                # a stall at a small gap is not trusted as an infeasibility
                # verdict: thin feasible sets produce long tangential tails
                if stalled and gap > scale * max(1e3 * tol.abs_tol, 1e-4):
                    return None  # gap stagnated clearly away from zero: infeasible
    raise IterationLimit(f"no verdict after {max_iter} iterations (gap {gap_hist[-1]:.2e})")


# ---------------------------------------------------------------------------
# Choi encodings.
# The Choi matrix of Phi: M_a -> M_b is C = sum_{ij} E_ij (x) Phi(E_ij);
# Phi is completely positive iff C is PSD, and
# Phi(A)[k, l] = <conj(A) (x) E_kl, C>_Frobenius.
# ---------------------------------------------------------------------------


def conjugation_choi(W: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Choi matrix of the completely positive map X -> scale * W^* X W."""
    W = np.asarray(W, dtype=complex)
    a, b = W.shape
    C = np.zeros((a * b, a * b), dtype=complex)
    for i in range(a):
        for j in range(a):
            blk = scale * np.outer(W[i].conj(), W[j])
            C[i * b : (i + 1) * b, j * b : (j + 1) * b] = blk
    return C


def apply_choi(C: np.ndarray, A: np.ndarray, d_out: int) -> np.ndarray:
    """Evaluate the map with Choi matrix C on the matrix A."""
    d_in = A.shape[0]
    C4 = C.reshape(d_in, d_out, d_in, d_out)
    return np.einsum("ij,ikjl->kl", A, C4)


def verify_choi_witness(
    A: MatrixTuple, B: MatrixTuple, choi: np.ndarray, tol: Tolerance = DEFAULT_TOL
) -> bool:
    """Check a Choi matrix certifies inclusion: PSD, maps A to B, subunital."""
    d_a, d_b = A.d, B.d
    if choi.shape != (d_a * d_b, d_a * d_b):
        return False
    herm = np.linalg.norm(choi - choi.conj().T)
    if herm > 1e3 * tol.abs_tol * (1.0 + np.linalg.norm(choi)):
        return False
    w = np.linalg.eigvalsh((choi + choi.conj().T) / 2)
    if w[0] < -(tol.abs_tol + tol.rel_tol * max(1.0, float(w[-1]))):
        return False
    for Aj, Bj in zip(A.mats, B.mats):
        img = apply_choi(choi, Aj, d_b)
        if np.linalg.norm(img - Bj) > 1e2 * (tol.abs_tol + tol.rel_tol * (1.0 + np.linalg.norm(Bj))):
            return False
    unital = apply_choi(choi, np.eye(d_a, dtype=complex), d_b)
    slack = np.eye(d_b) - (unital + unital.conj().T) / 2
    if np.linalg.eigvalsh(slack)[0] < -1e2 * (tol.abs_tol + tol.rel_tol):
        return False
    return True


def inclusion_problem(A: MatrixTuple, B: MatrixTuple) -> SdpProblem:
    """Encode: Choi C PSD, Phi(A_j) = B_j, Phi(I) + S = I with slack S PSD."""
    d_a, d_b = A.d, B.d
    prob = SdpProblem(block_sizes=[d_a * d_b, d_b])
    for j in range(A.g):
        Ac = np.conj(A.mats[j])
        for k in range(d_b):
            for l in range(d_b):
                E = np.zeros((d_b, d_b), dtype=complex)
                E[k, l] = 1.0
                prob.add([np.kron(Ac, E), None], B.mats[j][k, l])
    eye_a = np.eye(d_a, dtype=complex)
    for k in range(d_b):
        for l in range(d_b):
            E = np.zeros((d_b, d_b), dtype=complex)
            E[k, l] = 1.0
            prob.add([np.kron(eye_a, E), E], 1.0 if k == l else 0.0)
    return prob


# ---------------------------------------------------------------------------
# Verdicts and the falsifier.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InclusionVerdict:
    """Three-valued inclusion answer with witness or counterexample."""

    status: str  # Included | NotIncluded | Indeterminate
    choi_witness: Optional[np.ndarray] = None
    counterexample: Optional[MatrixTuple] = None
    counterexample_level: Optional[int] = None
    violating_direction: Optional[np.ndarray] = None

    def to_json(self) -> dict:
        from . import jsonio

        out: dict = {"status": self.status}
        if self.choi_witness is not None:
            out["choi_witness"] = jsonio.matrix_to_json(self.choi_witness)
        if self.counterexample is not None:
            out["counterexample"] = {
                "level": self.counterexample_level,
                "X": jsonio.tuple_to_json(self.counterexample),
                "direction": jsonio.vector_to_json(self.violating_direction),
            }
        return out


def _random_direction(g: int, n: int, rng: np.random.Generator) -> MatrixTuple:
    Z = rng.standard_normal((g, n, n)) + 1j * rng.standard_normal((g, n, n))
    return MatrixTuple(Z / np.sqrt(2 * n))


def boundary_scale(A: MatrixTuple, T: MatrixTuple) -> Tuple[float, float]:
    """Largest r >= 0 with r*T inside the spectrahedron of A, by closed form.

    Along a fixed real ray, L_A(r T) = I - r H with H Hermitian, so the
    exit scale is 1/lambda_max(H); infinite when lambda_max <= 0.  Returns
    (scale, lambda_max).
    """
    lam = eval_homogeneous(A, T)
    H = lam + lam.conj().T
    top = float(np.linalg.eigvalsh(H)[-1])
    if top <= 0.0:
        return np.inf, top
    return 1.0 / top, top


def _falsify(
    A: MatrixTuple,
    B: MatrixTuple,
    tol: Tolerance,
    rng: np.random.Generator,
    restarts: int,
    levels: Sequence[int],
    climbs: int = 8,
) -> Optional[Tuple[MatrixTuple, int, np.ndarray]]:
    """Search the boundary of D_A for a point violating L_B >= 0.

    Gradient-free hill climb on the violation margin (smallest eigenvalue
    of L_B) over rescaled random perturbations; counterexamples
    concentrate at extreme points, so each restart starts on the boundary.
    """
    inner = 1.0 - 1e-9
    reject = tol.abs_tol + tol.rel_tol
    for n in levels:
        for _ in range(max(1, restarts // len(levels))):
            T = _random_direction(A.g, n, rng)
            r, _ = boundary_scale(A, T)
            if not np.isfinite(r):
                continue
            X = T.scaled(inner * r)
            best = X
            best_margin, best_vec, _ = _min_eig_vec(eval_monic(B, X))
            for _ in range(climbs):
                if best_margin < -10.0 * reject:
                    break
                P = _random_direction(A.g, n, rng)
                cand_dir = MatrixTuple(best.mats + 0.25 * r * P.mats)
                rc, _ = boundary_scale(A, cand_dir)
                if not np.isfinite(rc):
                    continue
                cand = cand_dir.scaled(inner * rc)
                margin, vec, _ = _min_eig_vec(eval_monic(B, cand))
                if margin < best_margin:
                    best, best_margin, best_vec = cand, margin, vec
            if best_margin < -10.0 * reject and membership(A, best, tol).member:
                return best, n, best_vec
    return None


def _min_eig_vec(H: np.ndarray):
    w, V = np.linalg.eigh(H)
    return float(w[0]), V[:, 0], float(w[-1])


def includes(
    A: MatrixTuple,
    B: MatrixTuple,
    tol: Tolerance = DEFAULT_TOL,
    seed: int = 0,
    max_iter: int = 8000,
) -> InclusionVerdict:
    """Decide whether the spectrahedron of A is contained in that of B.

    A verified completely positive witness gives Included (sound
    unconditionally); a verified boundary counterexample gives
    NotIncluded.  A cheap falsifier pass runs first purely for speed: a
    verified counterexample already proves the feasibility problem cannot
    have a witness.  Everything else is Indeterminate.
    """
    if A.g != B.g:
        raise ShapeMismatch("variable counts differ")
    rng = np.random.default_rng(seed)
    d_a, d_b = A.d, B.d

    # Closed-form candidate witnesses, verified independently: the identity
    # map, the best nonnegative scalar multiple, and the zero map.
    candidates: List[np.ndarray] = []
    if d_a == d_b:
        num = np.vdot(A.mats, B.mats)
        den = np.vdot(A.mats, A.mats)
        c = num / den if den else 0.0
        if abs(c.imag) < 1e-12 and 0.0 <= c.real <= 1.0 + 1e-12:
            candidates.append(conjugation_choi(np.eye(d_a), float(min(c.real, 1.0))))
    if not np.any(B.mats):
        candidates.append(np.zeros((d_a * d_b, d_a * d_b), dtype=complex))
    for choi in candidates:
        if verify_choi_witness(A, B, choi, tol):
            return InclusionVerdict("Included", choi_witness=choi)

    quick = _falsify(A, B, tol, rng, restarts=8, levels=[1, min(2, max(d_a, d_b))])
    if quick is not None:
        X, n, vec = quick
        return InclusionVerdict(
            "NotIncluded", counterexample=X, counterexample_level=n, violating_direction=vec
        )

    prob = inclusion_problem(A, B)
    solver_failed = False
    try:
        blocks = solve_feasibility(prob, tol, max_iter=max_iter)
    except IterationLimit:
        blocks = None
        solver_failed = True
    if blocks is not None and verify_choi_witness(A, B, blocks[0], tol):
        return InclusionVerdict("Included", choi_witness=blocks[0])

    levels = list(range(1, max(d_a, d_b) + 1))
    found = _falsify(A, B, tol, rng, restarts=64, levels=levels)
    if found is not None:
        X, n, vec = found
        return InclusionVerdict(
            "NotIncluded", counterexample=X, counterexample_level=n, violating_direction=vec
        )
    del solver_failed
    return InclusionVerdict("Indeterminate")
