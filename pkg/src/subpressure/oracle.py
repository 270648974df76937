"""Brute-force ground truth: the singular value function on explicit words.

Nothing here uses the ordered-pressure closed form.  Word products are formed
by left-to-right multiplication and their singular values come from the
Jacobi routine in :mod:`subpressure.linalg`, so these functions can check the
closed form independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from subpressure.errors import DomainError, EnumerationCapError
from subpressure.linalg import MatrixSystem, batched_singular_values

ENUMERATION_CAP = 2_000_000
_CHUNK = 1 << 15


@dataclass(frozen=True)
class OracleEstimate:
    """Finite-``k`` pressure value bracketing the true pressure.

    For diagonal systems ``lower <= P(s) <= upper`` holds for every ``k``, with
    ``upper - lower = log(n!) / k``.
    """

    k: int
    value: float
    lower: float
    upper: float

    def brackets(self, p: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= p <= self.upper + slack


def _check_word(system: MatrixSystem, word: Sequence[int]) -> list[int]:
    idx = [int(x) for x in word]
    if not idx:
        raise DomainError("words must be non-empty")
    if any(not 0 <= x < system.count for x in idx):
        raise DomainError(f"word {idx} has an index outside 0..{system.count - 1}")
    return idx


def _check_s(system: MatrixSystem, s: float) -> None:
    if not 0 <= s < system.n:
        raise DomainError(f"s={s} outside [0, {system.n})")


def _log_phi_from_sorted(log_sv: np.ndarray, s: float) -> np.ndarray:
    m = int(math.floor(s))
    head = log_sv[..., :m].sum(axis=-1)
    return head + (s - m) * log_sv[..., m]


def word_log_singular_values(system: MatrixSystem, word: Sequence[int]) -> np.ndarray:
    """Log singular values (descending) of the product ``A_{i1} ... A_{ik}``."""
    idx = _check_word(system, word)
    if system.is_diagonal():
        logs = np.log(np.abs(np.array([np.diag(system.matrices[i]) for i in idx]))).sum(axis=0)
        return -np.sort(-logs)
    prod = np.eye(system.n)
    log_scale = 0.0
    for i in idx:
        prod = prod @ system.matrices[i]
        scale = float(np.max(np.abs(prod)))
        prod = prod / scale
        log_scale += math.log(scale)
    return np.log(batched_singular_values(prod[None])[0]) + log_scale


def phi(system: MatrixSystem, word: Sequence[int], s: float) -> float:
    """Singular value function ``alpha_1 ... alpha_m * alpha_{m+1}**(s-m)`` of a word."""
    _check_s(system, s)
    return math.exp(float(_log_phi_from_sorted(word_log_singular_values(system, word), s)))


def _normalise(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scale = np.max(np.abs(mats), axis=(1, 2))
    return mats / scale[:, None, None], np.log(scale)


def _all_products(mats: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalised products of every word of length ``k``, lexicographic order."""
    count, n, _ = mats.shape
    base, base_log = _normalise(mats)
    acc = np.eye(n)[None]
    acc_log = np.zeros(1)
    for _ in range(k):
        acc = np.einsum("aij,bjk->abik", acc, base).reshape(-1, n, n)
        acc_log = (acc_log[:, None] + base_log[None, :]).reshape(-1)
        acc, extra = _normalise(acc)
        acc_log = acc_log + extra
    return acc, acc_log


def _sorted_log_sv_chunks(system: MatrixSystem, k: int) -> Iterator[np.ndarray]:
    """Descending log singular values of all words of length ``k``, chunk by chunk.

    Chunks follow lexicographic word order so reductions are deterministic.
    """
    count, n = system.count, system.n
    if system.is_diagonal():
        logs = np.log(np.abs(np.array([np.diag(a) for a in system.matrices])))
        suffix_len = min(k, max(1, int(math.log(_CHUNK) / math.log(max(count, 2)))))
        suffix = np.zeros((1, n))
        for _ in range(suffix_len):
            suffix = (suffix[:, None, :] + logs[None, :, :]).reshape(-1, n)
        for prefix in np.ndindex(*([count] * (k - suffix_len))):
            offset = logs[list(prefix)].sum(axis=0) if prefix else 0.0
            yield -np.sort(-(suffix + offset), axis=1)
        return
    mats = system.stacked()
    suffix_len = min(k, max(1, int(math.log(_CHUNK) / math.log(max(count, 2)))))
    suffix, suffix_log = _all_products(mats, suffix_len)
    for prefix in np.ndindex(*([count] * (k - suffix_len))):
        head = np.eye(n)
        head_log = 0.0
        for i in prefix:
            head = head @ mats[i]
            scale = float(np.max(np.abs(head)))
            head = head / scale
            head_log += math.log(scale)
        prods, prods_log = _normalise(np.einsum("ij,bjk->bik", head, suffix))
        sv = batched_singular_values(prods)
        yield np.log(sv) + (prods_log + suffix_log + head_log)[:, None]


def finite_k_pressures(
    system: MatrixSystem, s_values: Sequence[float], k: int, cap: int = ENUMERATION_CAP
) -> list[OracleEstimate]:
    """:func:`finite_k_pressure` for several ``s`` sharing one enumeration."""
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    for s in s_values:
        _check_s(system, s)
    if system.count**k > cap:
        raise EnumerationCapError(
            f"{system.count}^{k} = {system.count**k} words exceeds the cap of {cap}"
        )
    s_arr = [float(s) for s in s_values]
    tops = [-math.inf] * len(s_arr)
    sums = [0.0] * len(s_arr)
    for chunk in _sorted_log_sv_chunks(system, k):
        for j, s in enumerate(s_arr):
            lp = _log_phi_from_sorted(chunk, s)
            top = float(np.max(lp))
            if top > tops[j]:
                sums[j] = sums[j] * math.exp(tops[j] - top) if tops[j] > -math.inf else 0.0
                tops[j] = top
            sums[j] += float(np.sum(np.exp(lp - tops[j])))
    gap = math.lgamma(system.n + 1) / k
    out = []
    for top, total in zip(tops, sums):
        value = (top + math.log(total)) / k
        out.append(OracleEstimate(k, value, value - gap, value))
    return out


def finite_k_pressure(
    system: MatrixSystem, s: float, k: int, cap: int = ENUMERATION_CAP
) -> OracleEstimate:
    """``(1/k) log sum_{|i| = k} phi^s(i)`` by exhaustive enumeration.

    Raises :class:`~subpressure.errors.EnumerationCapError` rather than
    sampling when ``count**k`` exceeds ``cap``.
    """
    return finite_k_pressures(system, [s], k, cap)[0]


def det_pressure(system: MatrixSystem, s: float) -> float:
    """``log sum_i |det A_i|**(s/n)``, the pressure for ``s >= n``."""
    if s < system.n:
        raise DomainError(f"the determinant branch needs s >= n = {system.n}, got {s}")
    x = np.array([np.linalg.slogdet(a)[1] for a in system.matrices]) * (s / system.n)
    top = float(np.max(x))
    return top + math.log(float(np.sum(np.exp(x - top))))
