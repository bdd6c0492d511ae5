"""Free circularity, the corner (pencil ball) form, and boundary envelopes.

A minimal tuple defines a free circular spectrahedron exactly when all
pairwise coefficient products vanish: the ranges then live inside a joint
kernel, splitting the space so every coefficient becomes a corner block
``[[0, F], [0, 0]]``, and the spectrahedron is the unit ball of the
homogeneous pencil of F.  A finite envelope of separating pencils
(at most d^2 of them, each of size at most d) witnesses that ball
structure on sampled boundary points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import RankAmbiguity, Unbounded
from .pencil_core import (
    DEFAULT_TOL,
    HomogeneousPencil,
    MatrixTuple,
    Tolerance,
    pencil_ball_norm,
)
from .separation import separate
from .tuple_algebra import MinimalityCertificate, minimize_pencil

#: Width of the gray zone around the rank threshold that triggers
#: RankAmbiguity instead of a silent rank call.
RANK_BAND = 10.0


@dataclass(frozen=True)
class PencilBallForm:
    """Corner coordinates A ~ [[0, F], [0, 0]] with F of shape s x t."""

    s: int
    t: int
    F: MatrixTuple
    basis: np.ndarray

    def to_json(self) -> dict:
        from . import jsonio

        return {
            "s": self.s,
            "t": self.t,
            "F": jsonio.tuple_to_json(self.F),
            "basis": jsonio.matrix_to_json(self.basis),
        }


@dataclass(frozen=True)
class FreeCircularClassification:
    free_circular: bool
    form: Optional[PencilBallForm]
    minimality: MinimalityCertificate
    degenerate: bool = False  # all-zero minimal tuple: everything is a member

    def to_json(self) -> dict:
        out = {
            "free_circular": self.free_circular,
            "degenerate": self.degenerate,
            "minimality_indeterminate": self.minimality.indeterminate,
        }
        if self.form is not None:
            out.update(self.form.to_json())
        return out


@dataclass
class BallEnvelope:
    """Finite family of separating pencils covering sampled boundary points."""

    pencils: List[HomogeneousPencil]
    boundary_samples: List[Tuple[int, MatrixTuple]]
    sup_norm_defect: float
    cap_reached: bool = False
    notes: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        from . import jsonio

        return {
            "pencils": [p.to_json() for p in self.pencils],
            "boundary_samples": [
                {"level": lvl, "X": jsonio.tuple_to_json(X)} for lvl, X in self.boundary_samples
            ],
            "sup_norm_defect": float(self.sup_norm_defect),
            "cap_reached": self.cap_reached,
            "notes": list(self.notes),
        }


def detect_pencil_ball(A: MatrixTuple, tol: Tolerance = DEFAULT_TOL) -> Optional[PencilBallForm]:
    """Recover corner coordinates of A, or None when A is not of corner form.

    The characterizing identity is A_s A_u = 0 for all pairs: every range
    then sits inside every kernel, so the span G of all ranges and its
    complement split the space with the coefficients mapping G-complement
    into G and killing G.  Expects a minimal tuple (callers minimize
    first); the all-zero tuple is handled by the classifier, not here.
    """
    norms = [float(np.linalg.norm(M)) for M in A.mats]
    if max(norms) == 0.0:
        return None
    for s in range(A.g):
        for u in range(A.g):
            bound = tol.abs_tol + tol.rel_tol * (1.0 + norms[s] * norms[u])
            if np.linalg.norm(A.mats[s] @ A.mats[u]) > bound:
                return None
    stacked = np.hstack(list(A.mats))
    U, sv, _ = np.linalg.svd(stacked, full_matrices=True)
    thr = tol.rel_tol * sv[0]
    gray = (sv > thr / RANK_BAND) & (sv < thr * RANK_BAND)
    if np.any(gray):
        raise RankAmbiguity(
            f"singular values {sv[gray]} straddle the rank band around {thr:.3e}"
        )
    r = int(np.sum(sv >= thr))
    if r == 0 or r == A.d:
        return None
    E = np.array([U.conj().T @ M @ U for M in A.mats])
    off = np.concatenate(
        [E[:, r:, :].ravel(), E[:, :r, :r].ravel()]
    )
    if np.max(np.abs(off)) > tol.abs_tol + tol.rel_tol * (1.0 + max(norms)):
        return None
    F = MatrixTuple(E[:, :r, r:])
    return PencilBallForm(s=r, t=A.d - r, F=F, basis=U)


def classify_free_circular(
    A: MatrixTuple, tol: Tolerance = DEFAULT_TOL, seed: int = 0
) -> FreeCircularClassification:
    """Decide free circularity of the free spectrahedron of A.

    Minimize, then detect the corner form; the all-zero minimal tuple
    (spectrahedron = everything) is vacuously free circular and flagged
    degenerate instead of carrying a corner split.
    """
    mincert = minimize_pencil(A, tol, seed=seed)
    M = mincert.minimal_tuple
    if not np.any(M.mats):
        return FreeCircularClassification(True, None, mincert, degenerate=True)
    form = detect_pencil_ball(M, tol)
    return FreeCircularClassification(form is not None, form, mincert)


def build_envelope(
    A: MatrixTuple,
    form: PencilBallForm,
    samples: int,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
    audit_samples: int = 64,
) -> BallEnvelope:
    """Greedy envelope of separating pencils over sampled boundary points.

    Samples the boundary at level d, separates at any point the retained
    pencils do not already cover at norm 1 - slack, and stops adding at
    the d^2 cap, reporting the worst uncovered gap as the defect.  An
    empty sample set yields the vacuous envelope with defect one.
    """
    from .generators import boundary_point

    del form  # the certificate of free circularity gates the call
    d = A.d
    cap = d * d
    cover_slack = 100.0 * tol.abs_tol
    rng = np.random.default_rng(seed)
    pts = []
    notes: List[str] = []
    for _ in range(samples):
        try:
            pts.append(boundary_point(A, d, rng, tol))
        except Unbounded:
            notes.append("skipped an unbounded boundary direction")
    pencils: List[HomogeneousPencil] = []
    cap_reached = False
    for k, pt in enumerate(pts):
        best = max((p.norm_at(pt.X) for p in pencils), default=0.0)
        if best >= 1.0 - cover_slack:
            continue
        if len(pencils) >= cap:
            cap_reached = True
            continue
        cert = separate(A, pt, tol, audit_samples=audit_samples, seed=seed + 101 * k)
        pencils.append(HomogeneousPencil(cert.Q))
    if pts:
        defect = max(
            max(0.0, 1.0 - max((p.norm_at(pt.X) for p in pencils), default=0.0)) for pt in pts
        )
    else:
        defect = 1.0
    return BallEnvelope(
        pencils=pencils,
        boundary_samples=[(pt.level, pt.X) for pt in pts],
        sup_norm_defect=float(defect),
        cap_reached=cap_reached,
        notes=notes,
    )


def ball_membership_agrees(
    A: MatrixTuple, F: MatrixTuple, X: MatrixTuple, tol: Tolerance = DEFAULT_TOL
) -> bool:
    """Check pencil-ball membership of X against monic membership under A."""
    from .pencil_core import membership

    by_pencil = pencil_ball_norm(F, X) <= 1.0 + tol.abs_tol + tol.rel_tol
    by_monic = membership(A, X, tol).member
    return by_pencil == by_monic
