"""Separating homogeneous pencils at boundary points of free circular spectrahedra.

Given a detailed boundary point (X, v), the kernel vector yields a linear
functional L with Re L <= 1 on the spectrahedron and equality at X.  Its
per-variable bilinear forms B_l, together with trace-one PSD matrices
T_1, T_2 found by semidefinite feasibility, normalize into the tuple
``Q_l = T_1^{-1/2} B_l T_2^{-1/2}`` whose homogeneous pencil has norm at
most one on the whole set and exactly one at the boundary point.  The
compactness argument that proves the T's exist is non-constructive, so it
is replaced here by an explicit feasibility search over a completely
positive map certificate, whose infeasibility is surfaced rather than
papered over.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import IterationLimit, NoCertificate, NormDefect, NotBoundary
from .inclusion_sdp import SdpProblem, solve_feasibility
from .pencil_core import (
    DEFAULT_TOL,
    DetailedBoundaryPoint,
    MatrixTuple,
    Tolerance,
    eval_homogeneous,
    pencil_ball_norm,
    verify_boundary_point,
)

SCALE_CAP = 1e6


@dataclass(frozen=True)
class BoundaryFunctional:
    """Riesz representation of L(Y) = 2 sum_j <(A_j (x) Y_j) v, v>.

    ``riesz`` holds n x n matrices R_j with L(Y) = sum_j tr(R_j^* Y_j);
    the construction guarantees Re L <= 1 on members at this level with
    equality at the generating boundary point.
    """

    riesz: MatrixTuple
    level: int

    def value(self, X: MatrixTuple) -> complex:
        return complex(sum(np.trace(R.conj().T @ M) for R, M in zip(self.riesz.mats, X.mats)))


@dataclass(frozen=True)
class SeparationCertificate:
    """Separating pencil data: Q attains norm one at the boundary point.

    ``compressions`` records the isometries onto the ranges of T_1, T_2
    when those are singular and Q lives on the compressed spaces;
    ``interior_radii`` holds the certified per-coordinate interior radii
    r_j at level one, giving the bound ||Q_j|| <= 1/r_j.
    """

    Q: MatrixTuple
    B: MatrixTuple
    T1: np.ndarray
    T2: np.ndarray
    compressions: Optional[Tuple[np.ndarray, np.ndarray]]
    norms: dict
    interior_radii: List[float]

    def to_json(self) -> dict:
        from . import jsonio

        out = {
            "Q": jsonio.tuple_to_json(self.Q),
            "B": jsonio.tuple_to_json(self.B),
            "T1": jsonio.matrix_to_json(self.T1),
            "T2": jsonio.matrix_to_json(self.T2),
            "norms": {k: float(v) for k, v in self.norms.items()},
            "interior_radii": [float(r) for r in self.interior_radii],
        }
        if self.compressions is not None:
            out["compressions"] = [
                jsonio.matrix_to_json(self.compressions[0]),
                jsonio.matrix_to_json(self.compressions[1]),
            ]
        return out


def boundary_functional(
    A: MatrixTuple, pt: DetailedBoundaryPoint, tol: Tolerance = DEFAULT_TOL
) -> BoundaryFunctional:
    """Linear functional supported at a detailed boundary point.

    Since <L_A(X)v, v> = 1 - Re L(X) for the unit kernel vector v, the
    functional is at most one on the spectrahedron and one at pt.X.
    """
    verify_boundary_point(A, pt, tol)
    n = pt.X.rows
    V = np.asarray(pt.v, dtype=complex).reshape(A.d, n)
    riesz = []
    for Aj in A.mats:
        M = np.einsum("lk,ka,lb->ab", Aj, V, np.conj(V))
        riesz.append(2.0 * M.conj().T)
    func = BoundaryFunctional(riesz=MatrixTuple(riesz), level=n)
    attained = func.value(pt.X)
    if abs(attained.real - 1.0) > 100.0 * (tol.abs_tol + tol.rel_tol):
        raise NotBoundary(f"functional attains {attained.real:.6f} instead of 1 at the point")
    return func


def bilinear_B(
    func: BoundaryFunctional, n: Optional[int] = None, g: Optional[int] = None
) -> MatrixTuple:
    """Matrices B_l with <B_l c, d> = L(c d^* (x) e_l) for all vectors c, d."""
    if n is not None and n != func.level:
        raise NotBoundary(f"level mismatch: functional built at n={func.level}")
    if g is not None and g != func.riesz.g:
        raise NotBoundary(f"variable count mismatch: functional has g={func.riesz.g}")
    # L(c d^* (x) e_l) = tr(R_l^* c d^*) = d^* (R_l^*) c, so B_l = R_l^*.
    return MatrixTuple([R.conj().T for R in func.riesz.mats])


def interior_radii(A: MatrixTuple, cap: float = SCALE_CAP) -> List[float]:
    """Certified interior radius along each coordinate direction at level one.

    Along r*e_j the monic pencil is I - r(A_j + A_j^*); the largest
    certified member scale is 1/lambda_max of that Hermitian part,
    capped when the direction never exits.
    """
    out = []
    for Aj in A.mats:
        top = float(np.linalg.eigvalsh(Aj + Aj.conj().T)[-1])
        out.append(cap if top <= 1.0 / cap else min(cap, 1.0 / top))
    return out


def _corner_target(B: MatrixTuple) -> List[np.ndarray]:
    n = B.rows
    out = []
    for Bj in B.mats:
        E = np.zeros((2 * n, 2 * n), dtype=complex)
        E[:n, n:] = Bj
        out.append(E)
    return out


def _normalize_pair(T: np.ndarray) -> Optional[np.ndarray]:
    """Hermitize, clip tiny negatives, normalize to trace one; None if unusable."""
    H = (T + T.conj().T) / 2
    w, V = np.linalg.eigh(H)
    if w[-1] <= 0:
        return None
    w = np.clip(w, 0.0, None)
    H = (V * w) @ V.conj().T
    tr = float(np.real(np.trace(H)))
    if tr < 0.25:
        return None
    return H / tr


def _pinned_pair_certificate(
    A: MatrixTuple,
    B: MatrixTuple,
    T1: np.ndarray,
    T2: np.ndarray,
    tol: Tolerance,
    max_iter: int,
) -> Optional[np.ndarray]:
    """Certify the domination for a fixed trace-one pair; returns the Choi matrix.

    Solves the congruence-normalized instance: a completely positive map
    with the corner embedding of ``T_1^{-1/2} B T_2^{-1/2}`` (on the kept
    ranges) as target and subunital image.  Conjugating its Choi matrix
    back by the square roots yields the map the original constraints ask
    for; the conditioning no longer depends on the small eigenvalues of
    the pair.  Returns None when the route does not apply or fails.
    """
    d, n = A.d, B.rows
    S1, V1, _ = _half_inverse(T1, tol.rel_tol)
    S2, V2, _ = _half_inverse(T2, tol.rel_tol)
    # the pair is only usable if B lives on its ranges
    for Bj in B.mats:
        proj = (V1 @ V1.conj().T) @ Bj @ (V2 @ V2.conj().T)
        if np.linalg.norm(proj - Bj) > 1e3 * tol.abs_tol * (1.0 + np.linalg.norm(Bj)):
            return None
    r1, r2 = S1.shape[1], S2.shape[1]
    r = r1 + r2
    Q = [S1.conj().T @ Bj @ S2 for Bj in B.mats]
    prob = SdpProblem(block_sizes=[d * r, r])
    for Aj, Qj in zip(A.mats, Q):
        Ac = np.conj(Aj)
        target = np.zeros((r, r), dtype=complex)
        target[:r1, r1:] = Qj
        for k in range(r):
            for l in range(r):
                E = np.zeros((r, r), dtype=complex)
                E[k, l] = 1.0
                prob.add([np.kron(Ac, E), None], target[k, l])
    eye_d = np.eye(d, dtype=complex)
    for k in range(r):
        for l in range(r):
            E = np.zeros((r, r), dtype=complex)
            E[k, l] = 1.0
            prob.add([np.kron(eye_d, E), E], 1.0 if k == l else 0.0)
    try:
        # normalized coordinates: residual negativity maps one-to-one onto
        # the certified norm excess, so the plain tolerance suffices here
        blocks = solve_feasibility(prob, tol, max_iter=max_iter, psd_stop=tol.abs_tol)
    except IterationLimit:
        return None
    if blocks is None:
        return None
    theta = blocks[0]
    # embed back: Phi = W Theta(.) W^* with W carrying the square roots
    W = np.zeros((2 * n, r), dtype=complex)
    W[:n, :r1] = _half_root(T1, tol.rel_tol)
    W[n:, r1:] = _half_root(T2, tol.rel_tol)
    lift = np.kron(np.eye(d), W)
    return lift @ theta @ lift.conj().T


def _half_root(T: np.ndarray, rel_floor: float) -> np.ndarray:
    """Columns W with W W^* = T restricted to the kept range."""
    H = (T + T.conj().T) / 2
    w, V = np.linalg.eigh(H)
    floor = rel_floor * max(float(w[-1]), 0.0)
    keep = w > floor
    return V[:, keep] * np.sqrt(w[keep])


def _verify_solution(
    A: MatrixTuple,
    B: MatrixTuple,
    T1: np.ndarray,
    T2: np.ndarray,
    choi: np.ndarray,
    tol: Tolerance,
) -> bool:
    """Independent re-check of the domination certificate constraints."""
    d, n = A.d, B.rows
    two_n = 2 * n
    slack_tol = 1e3 * (tol.abs_tol + tol.rel_tol)
    for T in (T1, T2):
        if abs(float(np.real(np.trace(T))) - 1.0) > slack_tol:
            return False
        if np.linalg.eigvalsh((T + T.conj().T) / 2)[0] < -slack_tol:
            return False
    if np.linalg.eigvalsh((choi + choi.conj().T) / 2)[0] < -slack_tol:
        return False
    targets = _corner_target(B)
    from .inclusion_sdp import apply_choi

    for Aj, Ej in zip(A.mats, targets):
        img = apply_choi(choi, Aj, two_n)
        if np.linalg.norm(img - Ej) > slack_tol * (1.0 + np.linalg.norm(Ej)):
            return False
    unital = apply_choi(choi, np.eye(d, dtype=complex), two_n)
    T0 = np.zeros((two_n, two_n), dtype=complex)
    T0[:n, :n] = T1
    T0[n:, n:] = T2
    gap = T0 - (unital + unital.conj().T) / 2
    return bool(np.linalg.eigvalsh((gap + gap.conj().T) / 2)[0] >= -slack_tol)


def solve_T(
    A: MatrixTuple,
    B: MatrixTuple,
    tol: Tolerance = DEFAULT_TOL,
    max_iter: int = 40000,
    warm_T: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    warm_choi: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Trace-one PSD pair (T_1, T_2) dominating the bilinear data B on members.

    Feasibility encoding: a completely positive map Psi on the coefficient
    size with Psi(A_j) equal to the corner embedding of B_j and
    Psi(I) <= T_1 (+) T_2.  Applying Psi, ampliated, to a nonnegative
    pencil value shows the block matrix
    [[T_1 (x) I, -Lambda_B(Y)], [-Lambda_B(Y)^*, T_2 (x) I]] is PSD for
    every member Y at every level, which is exactly the domination the
    pencil normalization needs.  Returns (T_1, T_2, choi).

    The valid pairs form a thin face, so when the caller supplies a
    candidate pair the solve is pinned there and run in normalized
    coordinates; the free joint solve over (T_1, T_2, Psi) remains the
    fallback.  Any solution is re-verified independently of the solver.
    """
    d = A.d
    n = B.rows
    for rad in interior_radii(A):
        if not (rad > 0):  # pragma: no cover - impossible for monic pencils
            raise NoCertificate("the spectrahedron has no interior at zero")

    if warm_T is not None:
        T1p = _normalize_pair(warm_T[0])
        T2p = _normalize_pair(warm_T[1])
        if T1p is not None and T2p is not None:
            if warm_choi is not None and _verify_solution(A, B, T1p, T2p, warm_choi, tol):
                return T1p, T2p, warm_choi
            choi = _pinned_pair_certificate(A, B, T1p, T2p, tol, max_iter)
            if choi is not None and _verify_solution(A, B, T1p, T2p, choi, tol):
                return T1p, T2p, choi

    two_n = 2 * n
    prob = SdpProblem(block_sizes=[n, n, d * two_n, two_n])
    eye_n = np.eye(n, dtype=complex)
    prob.add([eye_n, None, None, None], 1.0)
    prob.add([None, eye_n, None, None], 1.0)
    for Aj, Ej in zip(A.mats, _corner_target(B)):
        Ac = np.conj(Aj)
        for k in range(two_n):
            for l in range(two_n):
                E = np.zeros((two_n, two_n), dtype=complex)
                E[k, l] = 1.0
                prob.add([None, None, np.kron(Ac, E), None], Ej[k, l])
    eye_d = np.eye(d, dtype=complex)
    for k in range(two_n):
        for l in range(two_n):
            E = np.zeros((two_n, two_n), dtype=complex)
            E[k, l] = 1.0
            t1 = t2 = None
            if k < n and l < n:
                t1 = -np.asarray(E[:n, :n])
            elif k >= n and l >= n:
                t2 = -np.asarray(E[n:, n:])
            prob.add([t1, t2, np.kron(eye_d, E), E], 0.0)

    if warm_T is not None:
        T1w, T2w = warm_T
    else:
        T1w = T2w = eye_n / n
    x0 = [T1w, T2w, np.zeros((d * two_n,) * 2, complex), np.zeros((two_n,) * 2, complex)]
    try:
        blocks = solve_feasibility(prob, tol, max_iter=max_iter, x0_blocks=x0)
    except IterationLimit as exc:
        raise NoCertificate(f"feasibility search exhausted its budget: {exc}") from exc
    if blocks is None:
        raise NoCertificate("no trace-one PSD pair certifies the domination at tolerance")
    T1, T2, choi, _slack = blocks
    if not _verify_solution(A, B, T1, T2, choi, tol):
        raise NoCertificate("solver output failed independent verification")
    return T1, T2, choi


def _half_inverse(T: np.ndarray, rel_floor: float) -> Tuple[np.ndarray, np.ndarray, bool]:
    """Columns S with S^* T S = I on the kept range; returns (S, isometry, compressed)."""
    H = (T + T.conj().T) / 2
    w, V = np.linalg.eigh(H)
    floor = rel_floor * max(float(w[-1]), 0.0)
    keep = w > floor
    Vk = V[:, keep]
    S = Vk / np.sqrt(w[keep])
    return S, Vk, bool(np.any(~keep))


def _corner_warm_data(A: MatrixTuple, pt: DetailedBoundaryPoint, n: int, tol: Tolerance):
    """Closed-form certificate data from the corner split of the kernel vector.

    In corner coordinates v = (v_G, v_H), the trace-one pair is essentially
    forced to twice the reduced densities of the two halves (conjugated to
    match the transposed bilinear data), and compressing through the split
    gives an exact completely positive witness: with W_G = sqrt(2) v_G S_1
    and W_H = sqrt(2) v_H S_2 (S_p the half-inverses of the pair), the map
    Y -> G^* Y G for G assembled from U, (W_G (+) W_H) and the half-roots
    is subunital and hits the corner-embedded bilinear data on the nose.
    Returns ((T_1, T_2), choi) with choi None when no corner coordinates
    are available (caller falls back to searching).
    """
    from .ball_classifier import detect_pencil_ball
    from .errors import RankAmbiguity
    from .inclusion_sdp import conjugation_choi

    V = np.asarray(pt.v, dtype=complex).reshape(A.d, n)
    try:
        form = detect_pencil_ball(A, tol)
    except RankAmbiguity:
        form = None
    if form is None:
        rho = V.T @ np.conj(V)
        rho = rho / max(float(np.real(np.trace(rho))), 1e-300)
        return (np.conj(rho), np.conj(rho)), None
    vc = form.basis.conj().T @ V
    vG, vH = vc[: form.s], vc[form.s :]
    T1 = _normalize_pair(2.0 * vG.conj().T @ vG)
    T2 = _normalize_pair(2.0 * vH.conj().T @ vH)
    if T1 is None or T2 is None:
        rho = V.T @ np.conj(V)
        rho = rho / max(float(np.real(np.trace(rho))), 1e-300)
        return (np.conj(rho), np.conj(rho)), None
    S1, _, _ = _half_inverse(T1, tol.rel_tol)
    S2, _, _ = _half_inverse(T2, tol.rel_tol)
    r1, r2 = S1.shape[1], S2.shape[1]
    corner = np.zeros((A.d, r1 + r2), dtype=complex)
    corner[: form.s, :r1] = np.sqrt(2.0) * (vG @ S1)
    corner[form.s :, r1:] = np.sqrt(2.0) * (vH @ S2)
    lift = np.zeros((2 * n, r1 + r2), dtype=complex)
    lift[:n, :r1] = _half_root(T1, tol.rel_tol)
    lift[n:, r1:] = _half_root(T2, tol.rel_tol)
    G = form.basis @ corner @ lift.conj().T
    return (T1, T2), conjugation_choi(G)


def separate(
    A: MatrixTuple,
    pt: DetailedBoundaryPoint,
    tol: Tolerance = DEFAULT_TOL,
    audit_samples: int = 200,
    seed: int = 0,
) -> SeparationCertificate:
    """Construct a separating pencil certificate at a detailed boundary point.

    Pipeline: boundary functional, bilinear matrices, trace-one PSD pair by
    feasibility, then ``Q_j = T_1^{-1/2} B_j T_2^{-1/2}`` through Hermitian
    eigendecompositions (passing to the ranges when a T is singular).  The
    block-matrix domination pairs the functional with transposed matrix
    arguments, so the feasibility problem receives the transposed bilinear
    matrices; this lands the certified norm bound on the spectrahedron
    itself rather than on its entrywise transpose (the two coincide at
    level one).  The certificate is audited: norm one at the point, at
    most one on sampled members, strictly below one on sampled interior
    points.
    """
    from .generators import member_points

    func = boundary_functional(A, pt, tol)
    B = bilinear_B(func)
    n = B.rows
    Bt = MatrixTuple([Bj.T for Bj in B.mats])
    warm_pair, warm_choi = _corner_warm_data(A, pt, n, tol)
    T1, T2, _choi = solve_T(A, Bt, tol, warm_T=warm_pair, warm_choi=warm_choi)

    S1, V1, comp1 = _half_inverse(T1, tol.rel_tol)
    S2, V2, comp2 = _half_inverse(T2, tol.rel_tol)
    Q = MatrixTuple([S1.conj().T @ Bj @ S2 for Bj in Bt.mats])
    compressions = (V1, V2) if (comp1 or comp2) else None

    at_boundary = pencil_ball_norm(Q, pt.X)
    if abs(at_boundary - 1.0) > 100.0 * tol.abs_tol:
        raise NormDefect(f"pencil norm {at_boundary:.9f} at the boundary point")

    rng = np.random.default_rng(seed)
    levels = sorted({1, max(1, n // 2), n})
    per_level = max(1, audit_samples // len(levels))
    sup_sampled = 0.0
    interior_margin = np.inf
    for lvl in levels:
        for Y in member_points(A, lvl, per_level, rng, radial=(0.0, 1.0)):
            sup_sampled = max(sup_sampled, pencil_ball_norm(Q, Y))
        for Y in member_points(A, lvl, max(1, per_level // 4), rng, radial=(0.0, 0.9)):
            interior_margin = min(interior_margin, 1.0 - pencil_ball_norm(Q, Y))

    radii = interior_radii(A)
    return SeparationCertificate(
        Q=Q,
        B=B,
        T1=T1,
        T2=T2,
        compressions=compressions,
        norms={
            "at_boundary": float(at_boundary),
            "sup_sampled": float(sup_sampled),
            "interior_margin": float(interior_margin),
        },
        interior_radii=radii,
    )
