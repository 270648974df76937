"""Reading and writing matrix system files.

A system file is a JSON object validated against ``system.schema.json``::

    {"n": 3, "diagonals": [[0.9, 0.4, 0.6], [0.1, 0.4, 0.2]]}
    {"n": 2, "matrices": [[[0.5, 0.1], [0.0, 0.3]]], "basis": [[1, 0], [0, 1]]}

``diagonals`` lists the diagonal entries of diagonal matrices and cannot be
combined with ``basis``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from subpressure.errors import DimensionError, InputError
from subpressure.linalg import MatrixSystem


@lru_cache(maxsize=None)
def schema() -> dict:
    return json.loads(resources.files("subpressure").joinpath("system.schema.json").read_text())


@dataclass(frozen=True)
class SystemFile:
    n: int
    system: MatrixSystem
    basis: np.ndarray | None = None
    diagonal_form: bool = False

    def to_dict(self) -> dict:
        out: dict = {"n": self.n}
        mats = self.system.matrices
        if self.diagonal_form:
            out["diagonals"] = [[float(x) for x in np.diag(a)] for a in mats]
        else:
            out["matrices"] = [[[float(x) for x in row] for row in a] for a in mats]
            if self.basis is not None:
                out["basis"] = [[float(x) for x in row] for row in self.basis]
        if self.system.labels is not None:
            out["labels"] = list(self.system.labels)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def parse_system(data: dict) -> SystemFile:
    try:
        jsonschema.validate(data, schema())
    except jsonschema.ValidationError as exc:
        raise InputError(f"invalid system file: {exc.message}") from None
    n = data["n"]
    labels = data.get("labels")
    if "diagonals" in data:
        diags = data["diagonals"]
        if any(len(d) != n for d in diags):
            raise DimensionError(f"every diagonal must have n = {n} entries")
        return SystemFile(n, MatrixSystem.from_diagonals(diags, labels), None, True)
    mats = data["matrices"]
    for idx, a in enumerate(mats):
        if len(a) != n or any(len(row) != n for row in a):
            raise DimensionError(f"matrix {idx} is not {n} x {n}")
    basis = None
    if "basis" in data:
        basis = np.array(data["basis"], dtype=float)
        if basis.shape != (n, n):
            raise DimensionError(f"basis is not {n} x {n}")
    system = MatrixSystem(tuple(np.array(a, dtype=float) for a in mats), labels)
    return SystemFile(n, system, basis, False)


def load_system(path: str | Path) -> SystemFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
    return parse_system(data)


def load_basis(path: str | Path) -> np.ndarray:
    """A basis file holds either a bare ``n x n`` array or ``{"basis": [...]}``."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read basis file {path}: {exc}") from None
    if isinstance(data, dict):
        data = data.get("basis")
    try:
        basis = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"basis file {path} does not hold a numeric matrix") from None
    if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
        raise DimensionError(f"basis file {path} does not hold a square matrix")
    return basis
