"""Reading and writing matrix files.

A matrix file is UTF-8 JSON holding one object with an explicit ``kind``
("density", "pure", "bipartite", or "kraus_set") and ``dims`` header;
complex entries are two-element ``[re, im]`` arrays. The format is
diff-friendly and language-neutral, and parse errors carry the location
of the offending field.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .states import (
    BipartiteState,
    DensityMatrix,
    PureState,
    Tolerances,
    DEFAULT_TOLS,
)
from .transforms import KrausSet

KINDS = ("density", "pure", "bipartite", "kraus_set")


class ParseError(ValueError):
    """A matrix file failed to parse; the message carries the location."""


def _entry_to_complex(entry, where: str) -> complex:
    if (not isinstance(entry, (list, tuple)) or len(entry) != 2
            or not all(isinstance(x, (int, float)) for x in entry)):
        raise ParseError(f"{where}: complex entries must be [re, im] number pairs")
    return complex(entry[0], entry[1])


def _matrix_from_json(rows, shape: tuple[int, int], where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != shape[0]:
        raise ParseError(f"{where}: expected {shape[0]} rows")
    out = np.empty(shape, dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != shape[1]:
            raise ParseError(f"{where}[{i}]: expected {shape[1]} entries")
        for j, entry in enumerate(row):
            out[i, j] = _entry_to_complex(entry, f"{where}[{i}][{j}]")
    return out


def _complex_to_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _matrix_to_json(m: np.ndarray) -> list:
    return [[_complex_to_pair(z) for z in row] for row in np.asarray(m)]


def loads(text: str, tol: Tolerances = DEFAULT_TOLS):
    """Parse matrix-file text into the corresponding validated object."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level: expected one object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ParseError(f"field 'kind': expected one of {KINDS}, got {kind!r}")
    dims = doc.get("dims")
    if (not isinstance(dims, list) or not dims
            or not all(isinstance(d, int) and d > 0 for d in dims)):
        raise ParseError("field 'dims': expected a list of positive integers")
    entries = doc.get("entries")
    if entries is None:
        raise ParseError("field 'entries': missing")

    if kind == "pure":
        if len(dims) != 1:
            raise ParseError("field 'dims': a pure state takes one dimension")
        if not isinstance(entries, list) or len(entries) != dims[0]:
            raise ParseError(f"field 'entries': expected {dims[0]} amplitudes")
        vec = np.array([_entry_to_complex(e, f"entries[{i}]")
                        for i, e in enumerate(entries)])
        return PureState(vec, tol=tol)
    if kind == "density":
        if len(dims) != 1:
            raise ParseError("field 'dims': a density matrix takes one dimension")
        mat = _matrix_from_json(entries, (dims[0], dims[0]), "entries")
        return DensityMatrix(mat, tol=tol)
    if kind == "bipartite":
        if len(dims) != 2:
            raise ParseError("field 'dims': a bipartite state takes (d_A, d_B)")
        d = dims[0] * dims[1]
        mat = _matrix_from_json(entries, (d, d), "entries")
        return BipartiteState.from_matrix(mat, (dims[0], dims[1]), tol=tol)
    # kraus_set
    if len(dims) != 2:
        raise ParseError("field 'dims': a Kraus set takes (d_out, d_in)")
    if not isinstance(entries, list) or not entries:
        raise ParseError("field 'entries': expected a nonempty list of matrices")
    ops = tuple(_matrix_from_json(m, (dims[0], dims[1]), f"entries[{k}]")
                for k, m in enumerate(entries))
    tp = doc.get("trace_preserving")
    if tp is not None and not isinstance(tp, bool):
        raise ParseError("field 'trace_preserving': expected a boolean")
    return KrausSet(ops, trace_preserving=tp, tol=tol)


def dumps(obj) -> str:
    """Serialize a state or Kraus set to matrix-file text."""
    if isinstance(obj, PureState):
        doc = {"kind": "pure", "dims": [obj.dim],
               "entries": [_complex_to_pair(z) for z in obj.vec]}
    elif isinstance(obj, BipartiteState):
        doc = {"kind": "bipartite", "dims": list(obj.dims),
               "entries": _matrix_to_json(obj.mat)}
    elif isinstance(obj, DensityMatrix):
        doc = {"kind": "density", "dims": [obj.dim],
               "entries": _matrix_to_json(obj.mat)}
    elif isinstance(obj, KrausSet):
        doc = {"kind": "kraus_set", "dims": [obj.d_out, obj.d_in],
               "trace_preserving": bool(obj.trace_preserving),
               "entries": [_matrix_to_json(k) for k in obj.ops]}
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return json.dumps(doc, indent=1)


def load(path, tol: Tolerances = DEFAULT_TOLS):
    return loads(Path(path).read_text(encoding="utf-8"), tol=tol)


def save(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n", encoding="utf-8")
