"""Seeded random instance generators for classifiers, tests and the CLI.

Everything is driven by numpy Generator objects seeded explicitly, so a
GeneratorSpec reproduces its output bit for bit.  Planted instances are
rejection-sampled to irreducibility where a well-defined recovery target
requires it (a reducible plant would change under minimization).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from .errors import InputError, Unbounded
from .pencil_core import (
    DEFAULT_TOL,
    DetailedBoundaryPoint,
    MatrixTuple,
    Tolerance,
    eval_homogeneous,
)

SCALE_CAP = 1e6


@dataclass(frozen=True)
class GeneratorSpec:
    """Reproducible description of one random instance."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    KINDS = (
        "haar_unitary",
        "superdiagonal_tuple",
        "pencil_ball_tuple",
        "generic_tuple",
        "member_point",
        "boundary_point",
        "invariant_polynomial",
        "crossterm_polynomial",
    )


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary (QR of a complex Ginibre matrix)."""
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    phases = np.diag(R).copy()
    phases /= np.abs(phases)
    return Q * phases


def ginibre_tuple(g: int, rows: int, cols: Optional[int] = None, rng=None, scale=1.0) -> MatrixTuple:
    cols = rows if cols is None else cols
    Z = rng.standard_normal((g, rows, cols)) + 1j * rng.standard_normal((g, rows, cols))
    return MatrixTuple(Z * (scale / np.sqrt(2 * max(rows, cols))))


def generic_tuple(g: int, d: int, rng: np.random.Generator, scale: float = 1.0) -> MatrixTuple:
    return ginibre_tuple(g, d, d, rng, scale)


def _is_irreducible(T: MatrixTuple) -> bool:
    from .tuple_algebra import commutant_basis

    return len(commutant_basis(T)) == 1


def superdiagonal_tuple(
    sizes: Sequence[int],
    g: int,
    rng: np.random.Generator,
    conjugate: bool = True,
    max_draws: int = 64,
) -> MatrixTuple:
    """Plant a tuple whose only nonzero blocks sit on the superdiagonal.

    Level sizes ascend along the diagonal; every slot receives at least
    one nonzero block.  The plant is rejection-sampled to irreducibility
    so the level sizes are a well-defined recovery target, then hidden by
    a Haar change of basis.
    """
    sizes = [int(m) for m in sizes]
    if any(m < 1 for m in sizes) or len(sizes) < 1:
        raise InputError("level sizes must be positive")
    d = int(np.sum(sizes))
    edges = np.cumsum([0] + sizes)
    for _ in range(max_draws):
        mats = np.zeros((g, d, d), dtype=complex)
        for j in range(len(sizes) - 1):
            r0, r1 = edges[j], edges[j + 1]
            c0, c1 = edges[j + 1], edges[j + 2]
            blocks = rng.standard_normal((g, r1 - r0, c1 - c0)) + 1j * rng.standard_normal(
                (g, r1 - r0, c1 - c0)
            )
            mats[:, r0:r1, c0:c1] = blocks / np.sqrt(2)
        T = MatrixTuple(mats)
        if len(sizes) == 1 or _is_irreducible(T):
            break
    else:
        raise InputError(f"could not draw an irreducible plant for sizes {sizes}, g={g}")
    if conjugate:
        U = haar_unitary(d, rng)
        T = T.compressed(U)
    return T


def pencil_ball_tuple(
    s: int,
    t: int,
    g: int,
    rng: np.random.Generator,
    conjugate: bool = True,
    max_draws: int = 64,
) -> MatrixTuple:
    """Plant a corner-form tuple [[0, F], [0, 0]] with F of shape s x t."""
    if s < 1 or t < 1:
        raise InputError("corner dimensions must be positive")
    if g * min(s, t) < max(s, t):
        raise InputError(
            f"no irreducible corner tuple with s={s}, t={t}, g={g}: "
            "the stacked ranges cannot fill both factors"
        )
    d = s + t
    for _ in range(max_draws):
        F = rng.standard_normal((g, s, t)) + 1j * rng.standard_normal((g, s, t))
        mats = np.zeros((g, d, d), dtype=complex)
        mats[:, :s, s:] = F / np.sqrt(2)
        T = MatrixTuple(mats)
        if _is_irreducible(T):
            break
    else:
        raise InputError(f"could not draw an irreducible corner plant s={s} t={t} g={g}")
    if conjugate:
        U = haar_unitary(d, rng)
        T = T.compressed(U)
    return T


# ---------------------------------------------------------------------------
# Members and boundary points.  Along a real ray r*T the monic pencil is
# I - r*H with H Hermitian, so the exit scale is 1/lambda_max(H) in closed
# form; directions with lambda_max <= 0 never exit (unbounded).
# ---------------------------------------------------------------------------


def ray_boundary(A: MatrixTuple, T: MatrixTuple) -> float:
    lam = eval_homogeneous(A, T)
    H = lam + lam.conj().T
    top = float(np.linalg.eigvalsh(H)[-1])
    if top <= 1.0 / SCALE_CAP:
        raise Unbounded("direction does not exit the spectrahedron below the scale cap")
    return 1.0 / top


def member_points(
    A: MatrixTuple,
    level: int,
    count: int,
    rng: np.random.Generator,
    radial: tuple = (0.0, 0.95),
) -> List[MatrixTuple]:
    """Random members of the spectrahedron at the given level."""
    out: List[MatrixTuple] = []
    attempts = 0
    while len(out) < count and attempts < 20 * count + 50:
        attempts += 1
        T = ginibre_tuple(A.g, level, level, rng)
        try:
            r = ray_boundary(A, T)
        except Unbounded:
            continue
        u = rng.uniform(*radial)
        out.append(T.scaled(u * r))
    if len(out) < count:
        raise Unbounded("too many unbounded directions while sampling members")
    return out


def boundary_point(
    A: MatrixTuple,
    level: int,
    rng: np.random.Generator,
    tol: Tolerance = DEFAULT_TOL,
    max_tries: int = 50,
) -> DetailedBoundaryPoint:
    """Random detailed-boundary point (X, v) with L_A(X) v = 0, ||v|| = 1."""
    for _ in range(max_tries):
        T = ginibre_tuple(A.g, level, level, rng)
        try:
            r = ray_boundary(A, T)
        except Unbounded:
            continue
        lam = eval_homogeneous(A, T)
        H = lam + lam.conj().T
        _, V = np.linalg.eigh(H)
        # top eigenvector of H is a kernel vector of I - r*H = L_A(r*T)
        return DetailedBoundaryPoint(X=T.scaled(r), v=V[:, -1])
    raise Unbounded("could not find a bounded boundary direction")


def boundary_points(
    A: MatrixTuple, level: int, count: int, rng: np.random.Generator, tol: Tolerance = DEFAULT_TOL
) -> List[DetailedBoundaryPoint]:
    return [boundary_point(A, level, rng, tol) for _ in range(count)]


# ---------------------------------------------------------------------------
# Polynomial plants.
# ---------------------------------------------------------------------------


def invariant_polynomial(
    g: int,
    part_sizes: Sequence[int],
    degree: int,
    rng: np.random.Generator,
    conjugate: bool = True,
):
    """Monic polynomial that is a hidden direct sum of univariate parts."""
    from .freepoly import FreeMatrixPolynomial, Word

    part_sizes = [int(m) for m in part_sizes]
    if len(part_sizes) != g:
        raise InputError("need one part size per variable")
    d = int(np.sum(part_sizes))
    edges = np.cumsum([0] + part_sizes)
    terms = {Word(()): np.eye(d, dtype=complex)}
    for i in range(g):
        added = 0
        wanted = int(rng.integers(1, degree + 1))
        for _ in range(8 * wanted):
            if added >= wanted:
                break
            length = int(rng.integers(1, degree + 1))
            stars = rng.integers(0, 2, size=length).astype(bool)
            word = Word(tuple((i, bool(s)) for s in stars))
            if word in terms:
                continue
            blk = rng.standard_normal((part_sizes[i],) * 2) + 1j * rng.standard_normal(
                (part_sizes[i],) * 2
            )
            coeff = np.zeros((d, d), dtype=complex)
            coeff[edges[i] : edges[i + 1], edges[i] : edges[i + 1]] = blk / np.sqrt(2)
            terms[word] = coeff
            added += 1
    p = FreeMatrixPolynomial(rows=d, cols=d, g=g, terms=terms)
    if conjugate:
        U = haar_unitary(d, rng)
        p = p.coefficients_conjugated(U)
    return p


def crossterm_polynomial(g: int, d: int, degree: int, rng: np.random.Generator):
    """Monic polynomial carrying at least one cross term."""
    from .freepoly import FreeMatrixPolynomial, Word

    if g < 2:
        raise InputError("cross terms need at least two variables")
    terms = {Word(()): np.eye(d, dtype=complex)}
    i, j = rng.choice(g, size=2, replace=False)
    head = [(int(i), bool(rng.integers(0, 2))), (int(j), bool(rng.integers(0, 2)))]
    extra = [
        (int(rng.integers(0, g)), bool(rng.integers(0, 2)))
        for _ in range(int(rng.integers(0, max(1, degree - 1))))
    ]
    word = Word(tuple(head + extra))
    coeff = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    terms[word] = coeff / np.sqrt(2)
    return FreeMatrixPolynomial(rows=d, cols=d, g=g, terms=terms)


def generate(spec: GeneratorSpec) -> Union[MatrixTuple, DetailedBoundaryPoint, object]:
    """Dispatch a GeneratorSpec; identical specs produce identical bits."""
    if spec.kind not in GeneratorSpec.KINDS:
        raise InputError(f"unknown generator kind {spec.kind!r}")
    rng = np.random.default_rng(spec.seed)
    p = dict(spec.params)
    try:
        if spec.kind == "haar_unitary":
            return haar_unitary(int(p["d"]), rng)
        if spec.kind == "generic_tuple":
            return generic_tuple(int(p["g"]), int(p["d"]), rng, float(p.get("scale", 1.0)))
        if spec.kind == "superdiagonal_tuple":
            return superdiagonal_tuple(p["sizes"], int(p["g"]), rng)
        if spec.kind == "pencil_ball_tuple":
            return pencil_ball_tuple(int(p["s"]), int(p["t"]), int(p["g"]), rng)
        if spec.kind == "member_point":
            A = p["tuple"]
            return member_points(A, int(p.get("level", 1)), 1, rng)[0]
        if spec.kind == "boundary_point":
            A = p["tuple"]
            return boundary_point(A, int(p.get("level", 1)), rng)
        if spec.kind == "invariant_polynomial":
            return invariant_polynomial(
                int(p["g"]), p["part_sizes"], int(p.get("degree", 2)), rng
            )
        if spec.kind == "crossterm_polynomial":
            return crossterm_polynomial(
                int(p["g"]), int(p.get("d", 1)), int(p.get("degree", 2)), rng
            )
    except KeyError as exc:
        raise InputError(f"generator {spec.kind!r} missing parameter {exc}") from exc
    raise InputError(f"unhandled generator kind {spec.kind!r}")  # pragma: no cover
