"""JSON interchange for systems, representations and polynomials.

Complex numbers are written as ``[re, im]`` pairs.  Generator and letter
indices in files are 1-based.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DimensionError, DomainError
from .gradedspace import ProductSystem
from .representation import NcPolynomial, Representation


class SchemaError(DomainError):
    """A JSON document does not follow the expected layout."""


def _cplx(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise SchemaError(f"expected a number or [re, im], got {x!r}")


def matrix_from_json(data) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise SchemaError("matrix must be a non-empty list of rows")
    width = len(data[0])
    if any(len(r) != width for r in data):
        raise SchemaError("ragged matrix")
    return np.array([[_cplx(x) for x in r] for r in data], dtype=complex)


def matrix_to_json(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]


def system_from_json(data: dict) -> ProductSystem:
    try:
        dims = [int(d) for d in data["dims"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("system needs an integer list 'dims'") from exc
    k = int(data.get("k", len(dims)))
    if k != len(dims):
        raise SchemaError(f"k={k} but {len(dims)} dims given")
    twists = {}
    for key, mat in (data.get("twists") or {}).items():
        try:
            i, j = (int(s) for s in key.split(","))
        except ValueError as exc:
            raise SchemaError(f"twist key {key!r} must look like 'i,j'") from exc
        if not (1 <= j < i <= k):
            raise SchemaError(f"twist key {key!r} needs 1 <= j < i <= k")
        twists[(i - 1, j - 1)] = matrix_from_json(mat)
    return ProductSystem(tuple(dims), twists)


def system_to_json(system: ProductSystem) -> dict:
    return {
        "k": system.k,
        "dims": list(system.dims),
        "twists": {f"{i + 1},{j + 1}": matrix_to_json(t) for (i, j), t in sorted(system.twists.items())},
    }


def rep_from_json(data: dict, system: ProductSystem | None = None) -> Representation:
    if not isinstance(data, dict) or "blocks" not in data or "h" not in data:
        raise SchemaError("representation needs 'h' and 'blocks'")
    if "system" in data:
        system = system_from_json(data["system"])
    blocks = [[matrix_from_json(B) for B in gen] for gen in data["blocks"]]
    if system is None:
        system = ProductSystem(tuple(len(gen) for gen in blocks))
    try:
        return Representation(system, int(data["h"]), blocks)
    except DimensionError as exc:
        raise SchemaError(str(exc)) from exc


def rep_to_json(rep: Representation, with_system: bool = True) -> dict:
    out = {"h": rep.hdim, "blocks": [[matrix_to_json(B) for B in gen] for gen in rep.blocks]}
    if with_system:
        out["system"] = system_to_json(rep.system)
    return out


def poly_from_json(data: dict) -> NcPolynomial:
    try:
        terms = [
            (_cplx(t["coef"]), [(int(i) - 1, int(l) - 1) for i, l in t["word"]])
            for t in data["terms"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("polynomial needs 'terms' with 'coef' and 'word'") from exc
    return NcPolynomial(terms)


def load_json(path: str):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from exc


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, indent=2, sort_keys=True, default=_default)


def _default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x)}")
