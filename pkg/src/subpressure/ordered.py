"""Ordered singular value functions and ordered pressures for diagonal data.

On ``[m, m+1)`` an ordering of the coordinates only matters through the set of
its first ``m`` coordinates (the *head*) and its ``(m+1)``-th coordinate (the
*pivot*), so :class:`OrderedKey` stands for a whole class of permutations and
there are ``n * C(n-1, m)`` keys per interval instead of ``n!`` permutations.

Coordinates in keys are 1-based, matching the row/column numbering of the
matrices.  Matrix indices (the alphabet of words) are 0-based.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

from subpressure.dirichlet import DirichletPolynomial
from subpressure.errors import (
    DimensionError,
    DomainError,
    NonContractingWarning,
    NotTriangularError,
    SingularMatrixError,
)
from subpressure.linalg import (
    TRIANGULAR_TOL,
    MatrixSystem,
    conjugated_diagonals,
    is_contracting,
    triangular_form,
)


@dataclass(frozen=True)
class DiagonalSystem:
    """Absolute diagonal entries ``c[i, l - 1] = c_l(i) > 0`` of a triangular system.

    ``contracting`` records whether every source matrix has operator norm
    below one; for raw diagonal data this is simply ``max(c) < 1``.
    """

    c: np.ndarray
    contracting: bool | None = None
    labels: tuple[str, ...] | None = None
    log_c: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise DimensionError(f"diagonal data must be a non-empty (count, n) table, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DimensionError("diagonal entries must be finite")
        if np.any(c <= 0):
            raise SingularMatrixError("diagonal entries must be non-zero (absolute values > 0)")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        log_c = np.log(c)
        log_c.setflags(write=False)
        object.__setattr__(self, "log_c", log_c)
        if self.contracting is None:
            object.__setattr__(self, "contracting", bool(np.max(c) < 1.0))

    @classmethod
    def from_values(cls, rows: Sequence[Sequence[float]], labels=None) -> DiagonalSystem:
        """Build from raw (possibly signed) diagonal entries; absolute values are taken."""
        return cls(np.abs(np.array(rows, dtype=float)), labels=None if labels is None else tuple(labels))

    @property
    def n(self) -> int:
        return self.c.shape[1]

    @property
    def count(self) -> int:
        return self.c.shape[0]

    def permuted(self, order: Sequence[int]) -> DiagonalSystem:
        """Relabel coordinates: new coordinate ``l`` is old coordinate ``order[l]`` (0-based)."""
        return DiagonalSystem(self.c[:, list(order)], self.contracting, self.labels)


def reduce_to_diagonal(
    system: MatrixSystem, basis=None, tol: float = TRIANGULAR_TOL
) -> DiagonalSystem:
    """Extract the diagonal data of a (simultaneously) triangular system.

    Issues :class:`~subpressure.errors.NonContractingWarning` when some matrix
    is not a contraction; the result is still returned with
    ``contracting=False``.
    """
    if basis is not None:
        c = conjugated_diagonals(system, basis, tol)
    else:
        if triangular_form(system.matrices, tol) is None:
            raise NotTriangularError(
                "matrices are not all upper or all lower triangular; supply a basis "
                "or use subpressure.oracle.finite_k_pressure for general systems"
            )
        c = np.abs(np.array([np.diag(a) for a in system.matrices]))
    if np.any(c == 0):
        raise SingularMatrixError("a diagonal entry is zero")
    contracting = all(is_contracting(a) for a in system.matrices)
    if not contracting:
        warnings.warn(
            "system is not contracting; the diagonal reduction of the pressure is "
            "only known to hold for contractions",
            NonContractingWarning,
            stacklevel=2,
        )
    return DiagonalSystem(c, contracting, system.labels)


@dataclass(frozen=True, order=True)
class OrderedKey:
    m: int
    head: tuple[int, ...]
    pivot: int

    def __post_init__(self):
        head = tuple(sorted(int(h) for h in self.head))
        object.__setattr__(self, "head", head)
        if len(head) != self.m:
            raise DomainError(f"head {head} must have exactly m={self.m} coordinates")
        if len(set(head)) != len(head):
            raise DomainError(f"head {head} has repeated coordinates")
        if self.pivot in head:
            raise DomainError(f"pivot {self.pivot} must not belong to the head {head}")

    @property
    def label(self) -> str:
        return "{" + ",".join(str(h) for h in self.head) + "}/" + str(self.pivot)

    @classmethod
    def parse(cls, label: str) -> OrderedKey:
        head_part, pivot = label.strip().split("/")
        inner = head_part.strip().lstrip("{").rstrip("}").strip()
        head = tuple(int(x) for x in inner.split(",")) if inner else ()
        return cls(len(head), head, int(pivot))

    def __str__(self) -> str:
        return self.label


def enumerate_keys(n: int, m: int) -> list[OrderedKey]:
    """All ``n * C(n-1, m)`` keys for the interval ``[m, m+1)``.

    Heads come in lexicographic order, pivots ascending within a head.
    """
    return list(_keys(n, m))


@lru_cache(maxsize=None)
def _keys(n: int, m: int) -> tuple[OrderedKey, ...]:
    if n < 1 or not 0 <= m <= n - 1:
        raise DomainError(f"need n >= 1 and 0 <= m <= n-1, got n={n}, m={m}")
    coords = range(1, n + 1)
    return tuple(
        OrderedKey(m, head, pivot)
        for head in combinations(coords, m)
        for pivot in coords
        if pivot not in head
    )


def _check_key(ds: DiagonalSystem, key: OrderedKey) -> None:
    if key.m > ds.n - 1 or key.pivot > ds.n or (key.head and key.head[-1] > ds.n) or key.pivot < 1:
        raise DomainError(f"key {key.label} does not fit dimension {ds.n}")


def _word_log_c(ds: DiagonalSystem, i) -> np.ndarray:
    """Log diagonal of a word product (an index or a sequence of indices)."""
    if isinstance(i, (int, np.integer)):
        idx = [int(i)]
    else:
        idx = [int(x) for x in i]
        if not idx:
            raise DomainError("words must be non-empty")
    if any(not 0 <= x < ds.count for x in idx):
        raise DomainError(f"word {idx} has an index outside 0..{ds.count - 1}")
    return ds.log_c[idx].sum(axis=0)


def log_ordered_svf(ds: DiagonalSystem, key: OrderedKey, i, s: float) -> float:
    _check_key(ds, key)
    if not key.m <= s <= key.m + 1:
        raise DomainError(f"s={s} outside [{key.m}, {key.m + 1}] for key {key.label}")
    lc = _word_log_c(ds, i)
    head = [h - 1 for h in key.head]
    return float(lc[head].sum() + (s - key.m) * lc[key.pivot - 1])


def ordered_svf(ds: DiagonalSystem, key: OrderedKey, i, s: float) -> float:
    """``prod_{l in head} c_l(i) * c_pivot(i)**(s - m)`` for an index or word ``i``.

    The closed endpoint ``s = m + 1`` is accepted.
    """
    return math.exp(log_ordered_svf(ds, key, i, s))


def ordered_pressure_poly(ds: DiagonalSystem, key: OrderedKey) -> DirichletPolynomial:
    """The sum ``sum_i a_i b_i**s`` whose log is the ordered pressure of ``key``.

    ``a_i = prod_{head} c_l(i) / c_pivot(i)**m`` and ``b_i = c_pivot(i)``.
    """
    _check_key(ds, key)
    head = [h - 1 for h in key.head]
    log_b = ds.log_c[:, key.pivot - 1]
    log_a = ds.log_c[:, head].sum(axis=1) - key.m * log_b
    return DirichletPolynomial.from_log_terms(log_a, log_b).canonicalize()


def ordered_pressure_eval(ds: DiagonalSystem, key: OrderedKey, s: float) -> float:
    """``log sum_i phi_key^s(i)`` on the closed interval ``[m, m+1]``."""
    _check_key(ds, key)
    if not key.m <= s <= key.m + 1:
        raise DomainError(f"s={s} outside [{key.m}, {key.m + 1}] for key {key.label}")
    head = [h - 1 for h in key.head]
    x = ds.log_c[:, head].sum(axis=1) + (s - key.m) * ds.log_c[:, key.pivot - 1]
    top = float(np.max(x))
    return top + math.log(float(np.sum(np.exp(x - top))))


@dataclass(frozen=True)
class LevelTable:
    """Every ordered pressure of one interval ``[m, m+1]`` in array form.

    Row ``k`` belongs to ``keys[k]``: the ordered pressure at ``s`` equals
    ``logsumexp(head_log[k] + (s - m) * pivot_log[k])`` over matrices.
    """

    m: int
    keys: tuple[OrderedKey, ...]
    head_log: np.ndarray
    pivot_log: np.ndarray

    def values(self, s) -> np.ndarray:
        """Ordered pressures at ``s``; shape ``(len(keys),)`` or ``(len(keys), len(s))``."""
        scalar = np.ndim(s) == 0
        t = np.atleast_1d(np.asarray(s, dtype=float)) - self.m
        x = self.head_log[:, :, None] + self.pivot_log[:, :, None] * t[None, None, :]
        top = np.max(x, axis=1)
        out = top + np.log(np.sum(np.exp(x - top[:, None, :]), axis=1))
        return out[:, 0] if scalar else out


def level_table(ds: DiagonalSystem, m: int) -> LevelTable:
    keys = _keys(ds.n, m)
    lc = ds.log_c
    head_log = np.array([lc[:, [h - 1 for h in k.head]].sum(axis=1) for k in keys])
    pivot_log = np.array([lc[:, k.pivot - 1] for k in keys])
    return LevelTable(m, keys, head_log, pivot_log)
