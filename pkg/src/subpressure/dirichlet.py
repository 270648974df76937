"""Generalised Dirichlet polynomials ``E(s) = sum_i a_i * b_i**s`` with ``b_i > 0``.

Each term is stored in log form as ``(sign, log|a|, log b)`` so that products of
many matrix entries neither overflow nor underflow.  A polynomial with ``N``
distinct bases that is not identically zero has at most ``N - 1`` real zeros;
:func:`isolate_zeros` uses the matching Rolle recursion to locate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Literal

import numpy as np

from subpressure.errors import DomainError, IdenticallyZeroError

MERGE_TOL = 1e-12
CANCEL_RTOL = 1e-13
ROOT_TOL = 1e-12
TOUCH_RTOL = 1e-10

Term = tuple[int, float, float]


@dataclass(frozen=True)
class DirichletPolynomial:
    terms: tuple[Term, ...] = ()
    canonical: bool = False

    @classmethod
    def from_coefficients(cls, coeffs: Iterable[float], bases: Iterable[float]) -> DirichletPolynomial:
        terms = []
        for a, b in zip(coeffs, bases, strict=True):
            if not b > 0:
                raise DomainError(f"bases must be positive, got {b}")
            if a == 0:
                continue
            terms.append((1 if a > 0 else -1, math.log(abs(a)), math.log(b)))
        return cls(tuple(terms))

    @classmethod
    def from_log_terms(cls, log_coeffs, log_bases, signs=None) -> DirichletPolynomial:
        log_coeffs = [float(x) for x in log_coeffs]
        log_bases = [float(x) for x in log_bases]
        if signs is None:
            signs = [1] * len(log_coeffs)
        return cls(tuple((int(g), c, b) for g, c, b in zip(signs, log_coeffs, log_bases, strict=True)))

    @classmethod
    def constant(cls, value: float) -> DirichletPolynomial:
        return cls.from_coefficients([value], [1.0])

    def __len__(self) -> int:
        return len(self.terms)

    def __neg__(self) -> DirichletPolynomial:
        return DirichletPolynomial(tuple((-g, c, b) for g, c, b in self.terms), self.canonical)

    def __add__(self, other: DirichletPolynomial) -> DirichletPolynomial:
        return DirichletPolynomial(self.terms + other.terms)

    def __sub__(self, other: DirichletPolynomial) -> DirichletPolynomial:
        return self + (-other)

    def times_exponential(self, rate: float) -> DirichletPolynomial:
        """Multiply by ``exp(rate * s)``, i.e. shift every log base by ``rate``."""
        return DirichletPolynomial(tuple((g, c, b + rate) for g, c, b in self.terms), self.canonical)

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.terms:
            empty = np.zeros(0)
            return empty, empty, empty
        g, c, b = (np.array(col, dtype=float) for col in zip(*self.terms))
        return g, c, b

    @property
    def signs(self) -> np.ndarray:
        return self._arrays[0]

    @property
    def log_coeffs(self) -> np.ndarray:
        return self._arrays[1]

    @property
    def log_bases(self) -> np.ndarray:
        return self._arrays[2]

    @property
    def is_positive(self) -> bool:
        """True when every coefficient is positive (so the sum is positive)."""
        return len(self.terms) > 0 and all(g > 0 for g, _, _ in self.terms)

    def canonicalize(self, merge_tol: float = MERGE_TOL) -> DirichletPolynomial:
        """Merge terms with equal bases, drop cancelled terms, sort by base descending."""
        if self.canonical:
            return self
        ordered = sorted(self.terms, key=lambda t: -t[2])
        groups: list[list[Term]] = []
        for term in ordered:
            if groups and groups[-1][0][2] - term[2] <= merge_tol:
                groups[-1].append(term)
            else:
                groups.append([term])
        out: list[Term] = []
        for group in groups:
            log_base = group[0][2]
            pos = [c for g, c, _ in group if g > 0]
            neg = [c for g, c, _ in group if g < 0]
            lp = _logsumexp(pos)
            ln = _logsumexp(neg)
            if _cancels(lp, ln):
                continue
            if lp > ln:
                out.append((1, lp + math.log1p(-math.exp(ln - lp)), log_base))
            else:
                out.append((-1, ln + math.log1p(-math.exp(lp - ln)), log_base))
        return DirichletPolynomial(tuple(out), canonical=True)

    def scaled(self, s: float) -> tuple[float, float, float]:
        """Return ``(mantissa, shift, magnitude)`` with ``E(s) = mantissa * exp(shift)``.

        ``magnitude`` is the sum of the absolute term values on the same scale,
        so ``|mantissa| / magnitude`` measures relative cancellation.
        """
        if not self.terms:
            return 0.0, 0.0, 0.0
        g, c, b = self._arrays
        x = c + s * b
        shift = float(np.max(x))
        w = np.exp(x - shift)
        return float(np.dot(g, w)), shift, float(np.sum(w))

    def eval(self, s):
        """Evaluate at a scalar or an array of points."""
        if np.ndim(s) == 0:
            mantissa, shift, _ = self.scaled(float(s))
            return mantissa * math.exp(shift) if mantissa != 0.0 else 0.0
        s = np.asarray(s, dtype=float)
        if not self.terms:
            return np.zeros_like(s)
        g, c, b = self._arrays
        x = c[:, None] + b[:, None] * s.ravel()[None, :]
        shift = np.max(x, axis=0)
        return (np.exp(shift) * np.sum(g[:, None] * np.exp(x - shift), axis=0)).reshape(s.shape)

    __call__ = eval

    def log_eval(self, s):
        """``log E(s)`` for a polynomial with positive coefficients."""
        if not self.is_positive:
            raise DomainError("log_eval needs a non-empty polynomial with positive coefficients")
        _, c, b = self._arrays
        x = c[:, None] + b[:, None] * np.ravel(np.asarray(s, dtype=float))[None, :]
        shift = np.max(x, axis=0)
        out = shift + np.log(np.sum(np.exp(x - shift), axis=0))
        return float(out[0]) if np.ndim(s) == 0 else out.reshape(np.shape(s))

    def log_derivative(self, s):
        """``E'(s) / E(s)``: the slope of ``log E`` for a positive polynomial."""
        if not self.is_positive:
            raise DomainError("log_derivative needs a polynomial with positive coefficients")
        _, c, b = self._arrays
        x = c[:, None] + b[:, None] * np.ravel(np.asarray(s, dtype=float))[None, :]
        w = np.exp(x - np.max(x, axis=0))
        out = np.sum(w * b[:, None], axis=0) / np.sum(w, axis=0)
        return float(out[0]) if np.ndim(s) == 0 else out.reshape(np.shape(s))

    def derivative(self) -> DirichletPolynomial:
        out = []
        for g, c, b in self.terms:
            if b == 0.0:
                continue
            out.append((g if b > 0 else -g, c + math.log(abs(b)), b))
        return DirichletPolynomial(tuple(out), self.canonical)

    def zero_bound(self) -> int:
        p = self.canonicalize()
        if not p.terms:
            raise IdenticallyZeroError("the zero polynomial has infinitely many zeros")
        return len(p.terms) - 1

    def is_identically_zero(self) -> bool:
        return len(self.canonicalize().terms) == 0


def _logsumexp(values: list[float]) -> float:
    if not values:
        return -math.inf
    top = max(values)
    return top + math.log(sum(math.exp(v - top) for v in values))


def _cancels(lp: float, ln: float) -> bool:
    top = max(lp, ln)
    if min(lp, ln) == -math.inf:
        return False
    return abs(math.exp(lp - top) - math.exp(ln - top)) <= CANCEL_RTOL


@dataclass(frozen=True)
class Root:
    location: float
    kind: Literal["simple", "tangential"]


def isolate_zeros(
    p: DirichletPolynomial,
    lo: float,
    hi: float,
    tol: float = ROOT_TOL,
    touch_rtol: float = TOUCH_RTOL,
) -> list[Root]:
    """All real zeros of ``p`` in the closed interval ``[lo, hi]``, ascending.

    Zeros of the derivative split the interval into monotone pieces; each
    piece holding a sign change is bisected down to width ``tol``.  A critical
    point where ``|p|`` is below ``touch_rtol`` times the local term magnitude
    is reported as a zero; it is ``"tangential"`` when ``p`` keeps its sign
    across it.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    q = p.canonicalize()
    if not q.terms:
        raise IdenticallyZeroError("cannot isolate the zeros of the zero polynomial")
    roots = _zeros(q, float(lo), float(hi), tol, touch_rtol)
    assert len(roots) <= len(q.terms) - 1, "zero count exceeds the N - 1 bound"
    return roots


def _sign_info(q: DirichletPolynomial, s: float, touch_rtol: float) -> tuple[int, bool]:
    mantissa, _, magnitude = q.scaled(s)
    near_zero = abs(mantissa) <= touch_rtol * magnitude
    return (mantissa > 0) - (mantissa < 0), near_zero


def _bisect(q: DirichletPolynomial, a: float, b: float, sign_a: int, tol: float) -> float:
    while b - a > tol:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        mantissa, _, _ = q.scaled(mid)
        if mantissa == 0.0:
            return mid
        if (mantissa > 0) == (sign_a > 0):
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _zeros(q: DirichletPolynomial, lo: float, hi: float, tol: float, touch_rtol: float) -> list[Root]:
    if len(q.terms) <= 1:
        return []
    # Dividing by the leading exponential turns its term into a constant, so
    # the derivative loses one term: the Rolle induction on N.
    q = q.times_exponential(-q.terms[0][2])
    dq = q.derivative()
    critical = [r.location for r in _zeros(dq, lo, hi, tol, touch_rtol) if lo < r.location < hi]
    points = [lo, *critical, hi]
    info = [_sign_info(q, x, touch_rtol) for x in points]

    def side_sign(j: int, k: int) -> int:
        # Sign of q strictly between points j and k (q is monotone there).
        sign, near = info[k]
        if not near and sign != 0:
            return sign
        sign, _ = _sign_info(q, 0.5 * (points[j] + points[k]), 0.0)
        return sign

    roots: list[Root] = []
    last = len(points) - 1
    for j, x in enumerate(points):
        sign, near = info[j]
        if not near:
            continue
        if j == 0 or j == last:
            _, slope_near = _sign_info(dq, x, touch_rtol)
            kind = "tangential" if slope_near else "simple"
        else:
            left = side_sign(j, j - 1)
            right = side_sign(j, j + 1)
            kind = "simple" if left * right < 0 else "tangential"
        roots.append(Root(x, kind))
    for j in range(last):
        (sa, na), (sb, nb) = info[j], info[j + 1]
        if na or nb or sa * sb >= 0:
            continue
        roots.append(Root(_bisect(q, points[j], points[j + 1], sa, tol), "simple"))
    roots.sort(key=lambda r: r.location)
    merged: list[Root] = []
    for r in roots:
        if merged and r.location - merged[-1].location <= tol:
            continue
        merged.append(r)
    return merged
