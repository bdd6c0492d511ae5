"""Command-line front end: JSON in, one JSON document out.

Exit codes: 0 computed, 2 mathematically indeterminate verdict, 3 input
error.  Diagnostics go to stderr so stdout stays a single JSON document.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from . import __version__, jsonio
from .ball_classifier import build_envelope, classify_free_circular
from .circular_classifier import classify_circular, solve_grading, superdiagonal_form
from .errors import FreespecError, InputError
from .freepoly import FreeMatrixPolynomial, eval_poly, invariance_test
from .generators import GeneratorSpec, generate
from .inclusion_sdp import includes
from .pencil_core import (
    DEFAULT_TOL,
    DetailedBoundaryPoint,
    MatrixTuple,
    Tolerance,
    eval_homogeneous,
    eval_monic,
    membership,
)
from .separation import separate
from .tuple_algebra import irreducible_blocks, minimize_pencil

TOL_ENV = "FREESPEC_TOL"


def _tolerance(args) -> Tolerance:
    abs_tol = getattr(args, "tol", None)
    if abs_tol is None:
        env = os.environ.get(TOL_ENV)
        if env is not None:
            try:
                abs_tol = float(env)
            except ValueError as exc:
                raise InputError(f"{TOL_ENV} must be a float, got {env!r}") from exc
    if abs_tol is None:
        return DEFAULT_TOL
    return Tolerance(abs_tol=abs_tol, rel_tol=100.0 * abs_tol)


def _read_json(path: str):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path} at position {exc.pos}: {exc.msg}") from exc


def _read_tuple(path: str) -> MatrixTuple:
    return jsonio.tuple_from_json(_read_json(path))


def _read_point(path: str) -> DetailedBoundaryPoint:
    obj = _read_json(path)
    if not isinstance(obj, dict) or "X" not in obj or "v" not in obj:
        raise InputError('boundary point file needs "X" and "v" fields')
    return DetailedBoundaryPoint(
        X=jsonio.tuple_from_json(obj["X"]), v=jsonio.vector_from_json(obj["v"])
    )


def _emit(obj: dict, args) -> None:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    out = getattr(args, "output", None)
    if out and out != "-":
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_sizes(text: str):
    try:
        return [int(x) for x in text.split(",") if x != ""]
    except ValueError as exc:
        raise InputError(f"expected comma-separated integers, got {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="freespec", description=__doc__)
    top.add_argument("--version", action="version", version=f"freespec {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, point=False, seeded=False):
        p.add_argument("-i", "--input", default="-", help="input JSON file (default stdin)")
        p.add_argument("-o", "--output", default="-", help="output JSON file (default stdout)")
        p.add_argument("--tol", type=float, default=None, help="absolute tolerance")
        if point:
            p.add_argument("--point", required=True, help="evaluation point JSON file")
        if seeded:
            p.add_argument("--seed", type=int, default=0)
        return p

    common(sub.add_parser("eval", help="evaluate a pencil at a point"), point=True).add_argument(
        "--homogeneous", action="store_true", help="evaluate the homogeneous pencil"
    )
    common(sub.add_parser("member", help="membership in the free spectrahedron"), point=True)
    p = common(sub.add_parser("boundary-point", help="sample a detailed boundary point"), seeded=True)
    p.add_argument("--level", type=int, default=1)
    common(sub.add_parser("blocks", help="irreducible block decomposition"), seeded=True)
    common(sub.add_parser("minimize", help="minimal defining tuple"), seeded=True)
    p = common(sub.add_parser("include", help="spectrahedral inclusion"), seeded=True)
    p.add_argument("--other", required=True, help="JSON file with the target tuple")
    common(sub.add_parser("circular", help="classify circularity"), seeded=True)
    common(sub.add_parser("canonical-form", help="superdiagonal canonical form"), seeded=True)
    common(sub.add_parser("free-circular", help="classify free circularity"), seeded=True)
    p = common(sub.add_parser("envelope", help="separating pencil envelope"), seeded=True)
    p.add_argument("--samples", type=int, default=8)
    p = sub.add_parser("separate", help="separating pencil at a boundary point")
    p.add_argument("--pencil", required=True, help="coefficient tuple JSON file")
    p.add_argument("--point", required=True, help="boundary point JSON file (X and v)")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    common(sub.add_parser("poly-eval", help="evaluate a free matrix polynomial"), point=True)
    common(sub.add_parser("poly-invariant", help="coordinate-conjugation invariance"), seeded=True)
    common(sub.add_parser("poly-decompose", help="univariate direct-sum decomposition"), seeded=True)
    p = sub.add_parser("gen", help="seeded random instance generator")
    p.add_argument("--kind", required=True, choices=GeneratorSpec.KINDS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--d", type=int)
    p.add_argument("--g", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--sizes", help="comma-separated level sizes")
    p.add_argument("--part-sizes", dest="part_sizes", help="comma-separated part sizes")
    p.add_argument("--tuple", dest="tuple_file", help="tuple JSON for point generators")
    return top


def _run(args) -> int:
    cmd = args.command
    tol = _tolerance(args) if hasattr(args, "tol") else DEFAULT_TOL

    if cmd == "eval":
        A = _read_tuple(args.input)
        X = _read_tuple(args.point)
        value = eval_homogeneous(A, X) if args.homogeneous else eval_monic(A, X)
        _emit({"value": jsonio.matrix_to_json(value)}, args)
        return 0
    if cmd == "member":
        rep = membership(_read_tuple(args.input), _read_tuple(args.point), tol)
        _emit(rep.to_json(), args)
        return 0
    if cmd == "boundary-point":
        from .generators import boundary_point

        A = _read_tuple(args.input)
        pt = boundary_point(A, args.level, np.random.default_rng(args.seed), tol)
        _emit(pt.to_json(), args)
        return 0
    if cmd == "blocks":
        dec = irreducible_blocks(_read_tuple(args.input), tol, seed=args.seed)
        _emit(dec.to_json(), args)
        return 0
    if cmd == "minimize":
        cert = minimize_pencil(_read_tuple(args.input), tol, seed=args.seed)
        _emit(cert.to_json(), args)
        return 2 if cert.indeterminate else 0
    if cmd == "include":
        verdict = includes(_read_tuple(args.input), _read_tuple(args.other), tol, seed=args.seed)
        _emit(verdict.to_json(), args)
        return 2 if verdict.status == "Indeterminate" else 0
    if cmd == "circular":
        res = classify_circular(_read_tuple(args.input), tol, seed=args.seed)
        _emit(res.to_json(), args)
        return 2 if res.minimality.indeterminate else 0
    if cmd == "canonical-form":
        A = _read_tuple(args.input)
        res = classify_circular(A, tol, seed=args.seed)
        if not res.circular:
            _emit({"circular": False}, args)
            return 2 if res.minimality.indeterminate else 0
        out = res.form.to_json()
        out["circular"] = True
        out["minimal_tuple"] = jsonio.tuple_to_json(res.minimality.minimal_tuple)
        _emit(out, args)
        return 0
    if cmd == "free-circular":
        res = classify_free_circular(_read_tuple(args.input), tol, seed=args.seed)
        _emit(res.to_json(), args)
        return 2 if res.minimality.indeterminate else 0
    if cmd == "envelope":
        A = _read_tuple(args.input)
        res = classify_free_circular(A, tol, seed=args.seed)
        if not res.free_circular or res.form is None:
            _emit({"free_circular": res.free_circular, "envelope": None}, args)
            return 2 if res.minimality.indeterminate else 0
        env = build_envelope(A, res.form, args.samples, seed=args.seed, tol=tol)
        _emit(env.to_json(), args)
        return 0
    if cmd == "separate":
        A = _read_tuple(args.pencil)
        pt = _read_point(args.point)
        cert = separate(A, pt, tol, audit_samples=args.samples, seed=args.seed)
        _emit(cert.to_json(), args)
        return 0
    if cmd == "poly-eval":
        p = FreeMatrixPolynomial.from_json(_read_json(args.input))
        X = _read_tuple(args.point)
        _emit({"value": jsonio.matrix_to_json(eval_poly(p, X))}, args)
        return 0
    if cmd in ("poly-invariant", "poly-decompose"):
        p = FreeMatrixPolynomial.from_json(_read_json(args.input))
        verdict = invariance_test(p, tol=tol.abs_tol, seed=args.seed)
        out = verdict.to_json()
        if cmd == "poly-decompose" and not verdict.invariant:
            out = {"invariant": False, "witness": out.get("witness")}
        _emit(out, args)
        return 0
    if cmd == "gen":
        params = {}
        if args.kind in ("haar_unitary", "generic_tuple", "crossterm_polynomial"):
            if args.d is None:
                raise InputError(f"--d is required for {args.kind}")
            params["d"] = args.d
        if args.kind in ("generic_tuple", "superdiagonal_tuple", "pencil_ball_tuple",
                         "invariant_polynomial", "crossterm_polynomial"):
            if args.g is None:
                raise InputError(f"--g is required for {args.kind}")
            params["g"] = args.g
        if args.kind == "superdiagonal_tuple":
            if not args.sizes:
                raise InputError("--sizes is required for superdiagonal_tuple")
            params["sizes"] = _parse_sizes(args.sizes)
        if args.kind == "pencil_ball_tuple":
            if args.s is None or args.t is None:
                raise InputError("--s and --t are required for pencil_ball_tuple")
            params["s"], params["t"] = args.s, args.t
        if args.kind in ("member_point", "boundary_point"):
            if not args.tuple_file:
                raise InputError(f"--tuple is required for {args.kind}")
            params["tuple"] = _read_tuple(args.tuple_file)
            params["level"] = args.level
        if args.kind == "invariant_polynomial":
            if not args.part_sizes:
                raise InputError("--part-sizes is required for invariant_polynomial")
            params["part_sizes"] = _parse_sizes(args.part_sizes)
            params["degree"] = args.degree
        if args.kind == "crossterm_polynomial":
            params["degree"] = args.degree
        if args.kind == "generic_tuple":
            params["scale"] = args.scale
        obj = generate(GeneratorSpec(kind=args.kind, params=params, seed=args.seed))
        if isinstance(obj, MatrixTuple):
            _emit(jsonio.tuple_to_json(obj), args)
        elif isinstance(obj, DetailedBoundaryPoint):
            _emit(obj.to_json(), args)
        elif isinstance(obj, np.ndarray):
            _emit({"matrix": jsonio.matrix_to_json(obj)}, args)
        else:
            _emit(obj.to_json(), args)
        return 0
    raise InputError(f"unknown command {cmd!r}")  # pragma: no cover


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the input-error code
        return 0 if exc.code in (0, None) else 3
    try:
        return _run(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except FreespecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
