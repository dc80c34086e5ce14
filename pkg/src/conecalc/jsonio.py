"""Canonical JSON emission and matrix/cone (de)serialization.

Reports must be byte-stable across runs, so floats are always rendered with
the same %.12e format, keys are sorted, and infinities become the string
"inf" (strict JSON has no literal for them).  Matrices travel as row-major
arrays of [re, im] pairs; plain numbers are accepted on input as real
entries.
"""

from __future__ import annotations

import math

import numpy as np

from .cones import SelfDualCone
from .errors import SchemaError
from .numerics import LinearOperator


def _canon_float(x: float) -> str:
    if math.isnan(x):
        raise ValueError("NaN has no canonical representation")
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return "%.12e" % x


def _canon(obj) -> str:
    if isinstance(obj, dict):
        items = sorted(obj.items())
        inner = ",".join(f"{_canon(str(k))}:{_canon(v)}" for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _canon_float(float(obj))
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"')
        out = out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
        return f'"{out}"'
    if obj is None:
        return "null"
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, %.12e floats, LF-free one-liner."""
    return _canon(obj)


def _entry_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def matrix_to_json(mat: np.ndarray) -> list:
    return [[_entry_to_pair(z) for z in row] for row in np.asarray(mat, dtype=complex)]


def _parse_entry(cell) -> complex:
    if isinstance(cell, (int, float)):
        return complex(cell)
    if isinstance(cell, list) and len(cell) == 2 and all(
            isinstance(c, (int, float)) for c in cell):
        return complex(cell[0], cell[1])
    raise SchemaError(f"matrix entry must be a number or [re, im] pair, got {cell!r}")


def matrix_from_json(rows, context: str = "matrix") -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise SchemaError(f"{context}: expected a nonempty list of rows")
    try:
        mat = np.array([[_parse_entry(cell) for cell in row] for row in rows])
    except SchemaError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{context}: {exc}") from exc
    if mat.ndim != 2:
        raise SchemaError(f"{context}: ragged rows")
    return mat


def vector_to_json(vec: np.ndarray) -> list:
    return [_entry_to_pair(z) for z in np.asarray(vec, dtype=complex)]


def vector_from_json(cells, context: str = "vector") -> np.ndarray:
    if not isinstance(cells, list) or not cells:
        raise SchemaError(f"{context}: expected a nonempty list")
    return np.array([_parse_entry(c) for c in cells])


def operator_to_json(op: LinearOperator) -> dict:
    return {"space": op.space, "entries": matrix_to_json(op.mat)}


def cone_to_json(cone: SelfDualCone) -> dict:
    return {
        "space": cone.space,
        "label": cone.label,
        "generators": [vector_to_json(cone.generator(i)) for i in range(cone.dim)],
    }


def cone_from_json(obj) -> SelfDualCone:
    gens = np.column_stack([
        vector_from_json(g, "cone generator") for g in obj["generators"]
    ])
    return SelfDualCone(obj["space"], gens, obj.get("label", ""))
