"""Shared JSON interchange format.

Complex scalars are two-element ``[re, im]`` arrays; matrices are
row-major nested lists of those; a matrix tuple is
``{"g": int, "d": int, "matrices": [...]}`` (rectangular tuples carry
``"rows"``/``"cols"`` instead of ``"d"``).
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .errors import InputError
from .pencil_core import MatrixTuple


def complex_to_json(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def matrix_to_json(M: np.ndarray) -> list:
    M = np.asarray(M)
    return [[complex_to_json(z) for z in row] for row in M]


def vector_to_json(v: np.ndarray) -> list:
    return [complex_to_json(z) for z in np.asarray(v).ravel()]


def _entry_from_json(e: Any) -> complex:
    if (
        not isinstance(e, (list, tuple))
        or len(e) != 2
        or not all(isinstance(x, (int, float)) for x in e)
    ):
        raise InputError(f"complex entry must be a [re, im] pair, got {e!r}")
    return complex(e[0], e[1])


def matrix_from_json(obj: Any) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InputError("matrix must be a nonempty list of rows")
    rows = []
    width = None
    for row in obj:
        if not isinstance(row, list) or not row:
            raise InputError("matrix rows must be nonempty lists")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError("matrix rows have inconsistent lengths")
        rows.append([_entry_from_json(e) for e in row])
    return np.array(rows, dtype=complex)


def vector_from_json(obj: Any) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InputError("vector must be a nonempty list of [re, im] pairs")
    return np.array([_entry_from_json(e) for e in obj], dtype=complex)


def tuple_to_json(T: MatrixTuple) -> dict:
    out: dict = {"g": T.g}
    if T.is_square:
        out["d"] = T.d
    else:
        out["rows"] = T.rows
        out["cols"] = T.cols
    out["matrices"] = [matrix_to_json(M) for M in T.mats]
    return out


def tuple_from_json(obj: Any) -> MatrixTuple:
    if not isinstance(obj, dict):
        raise InputError("matrix tuple must be a JSON object")
    if "matrices" not in obj:
        raise InputError('matrix tuple needs a "matrices" field')
    mats = obj["matrices"]
    if not isinstance(mats, list) or not mats:
        raise InputError('"matrices" must be a nonempty list')
    arrs = [matrix_from_json(m) for m in mats]
    shapes = {a.shape for a in arrs}
    if len(shapes) != 1:
        raise InputError("all matrices in a tuple must share one shape")
    T = MatrixTuple(arrs)
    if "g" in obj and obj["g"] != T.g:
        raise InputError(f'declared g={obj["g"]} but {T.g} matrices given')
    if "d" in obj and (not T.is_square or obj["d"] != T.rows):
        raise InputError(f'declared d={obj["d"]} does not match matrix shape')
    if "rows" in obj and obj["rows"] != T.rows:
        raise InputError("declared rows do not match matrix shape")
    if "cols" in obj and obj["cols"] != T.cols:
        raise InputError("declared cols do not match matrix shape")
    return T
