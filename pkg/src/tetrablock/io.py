"""JSON interchange for matrices, triples and reports.

A matrix is ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` in row-major
order; a triple file is ``{"A": ..., "B": ..., "P": ...}``.  Python's float
repr is shortest-round-trip, so doubles survive a write/read cycle exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .fundamental import OperatorTriple


class InputError(ValueError):
    """Malformed or unreadable input file."""


def matrix_to_json(M) -> dict[str, Any]:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise ValueError("expected a 2-D array")
    flat = M.reshape(-1)
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "data": [[float(z.real), float(z.imag)] for z in flat]}


def matrix_from_json(d: dict[str, Any]) -> np.ndarray:
    try:
        r, c = int(d["rows"]), int(d["cols"])
        data = np.asarray(d["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix object: {exc}") from exc
    if r < 0 or c < 0 or data.shape != (r * c, 2) and not (r * c == 0 and data.size == 0):
        raise InputError(f"matrix data has shape {data.shape}, expected ({r * c}, 2)")
    if r * c == 0:
        return np.zeros((r, c), complex)
    return (data[:, 0] + 1j * data[:, 1]).reshape(r, c)


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise InputError(f"cannot read complex number from {v!r}")


def triple_to_json(t: OperatorTriple) -> dict[str, Any]:
    return {k: matrix_to_json(getattr(t, k)) for k in "ABP"}


def triple_from_json(d: dict[str, Any]) -> OperatorTriple:
    try:
        mats = [matrix_from_json(d[k]) for k in "ABP"]
    except KeyError as exc:
        raise InputError(f"triple file is missing key {exc}") from exc
    try:
        return OperatorTriple(*mats)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def write_json(path: str | Path, obj: Any) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_triple(path: str | Path) -> OperatorTriple:
    return triple_from_json(read_json(path))


def save_triple(path: str | Path, t: OperatorTriple) -> None:
    write_json(path, triple_to_json(t))
