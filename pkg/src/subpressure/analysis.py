"""The pressure as an upper envelope of ordered pressures, and what follows from it.

On each ``[m, m+1)`` with ``m < n`` the pressure is the maximum of the
``n * C(n-1, m)`` ordered pressures; from ``s = n`` on it is
``log sum_i |det A_i|**(s/n)``.  :func:`build_profile` resolves the maximum into
segments with exact hand-over points, which gives phase transitions, one-sided
derivatives and the affinity dimension.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from subpressure.dirichlet import ROOT_TOL, DirichletPolynomial, isolate_zeros
from subpressure.errors import (
    DomainError,
    NotContractingError,
    PressureError,
)
from subpressure.linalg import MatrixSystem
from subpressure.ordered import (
    DiagonalSystem,
    LevelTable,
    OrderedKey,
    enumerate_keys,
    level_table,
    ordered_pressure_poly,
    reduce_to_diagonal,
)

GRID = 2048
KINK_TOL = 1e-9
DEDUP_TOL = 1e-10
DEDUP_POINTS = 64
DET_LABEL = "det"
SNAP_TOL = 1e-9

_TIE_TOL = 1e-12
_MAX_DEPTH = 60
_CHECK_POINTS = 257


@dataclass(frozen=True)
class PressureSegment:
    """A piece ``[s_lo, s_hi]`` on which one ordered pressure is the maximum.

    ``key`` is None for the determinant branch.  ``equivalent`` lists every
    key whose ordered pressure is the same function as ``key``'s.
    """

    s_lo: float
    s_hi: float
    key: OrderedKey | None
    poly: DirichletPolynomial
    equivalent: tuple[OrderedKey, ...] = ()

    @property
    def label(self) -> str:
        return DET_LABEL if self.key is None else self.key.label

    def value(self, s):
        return self.poly.log_eval(s)

    def slope(self, s):
        return self.poly.log_derivative(s)


@dataclass(frozen=True)
class Level:
    """Deduplicated ordered pressures of one unit interval."""

    m: int
    table: LevelTable
    groups: tuple[tuple[int, ...], ...]
    rep_table: LevelTable
    rep_polys: tuple[DirichletPolynomial, ...]

    def rep_keys(self) -> tuple[OrderedKey, ...]:
        return self.rep_table.keys

    def equivalents(self, rep: int) -> tuple[OrderedKey, ...]:
        return tuple(self.table.keys[j] for j in self.groups[rep])


@dataclass(frozen=True)
class PressureProfile:
    ds: DiagonalSystem
    segments: tuple[PressureSegment, ...]
    tail: DirichletPolynomial
    levels: tuple[Level, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.ds.n

    def value(self, s: float) -> float:
        if s < 0:
            raise DomainError(f"pressure is defined for s >= 0, got {s}")
        if s >= self.n:
            return float(self.tail.log_eval(s))
        level = self.levels[int(math.floor(s))]
        return float(np.max(level.rep_table.values(s)))

    def snap(self, s: float, tol: float = SNAP_TOL) -> float:
        """Move ``s`` onto a segment boundary lying within ``tol`` of it.

        Hand-over points are only known to the root tolerance, so a query such
        as ``s = 0.5`` should see the boundary at ``0.5000000000001``.
        """
        for seg in self.segments:
            if abs(seg.s_hi - s) <= tol:
                return seg.s_hi
        return s

    def segment_right(self, s: float) -> PressureSegment:
        """The segment active immediately to the right of ``s``."""
        if s >= self.n:
            return PressureSegment(float(self.n), math.inf, None, self.tail)
        starts = [seg.s_lo for seg in self.segments]
        return self.segments[bisect.bisect_right(starts, s) - 1]

    def segment_left(self, s: float) -> PressureSegment:
        """The segment active immediately to the left of ``s`` (``s > 0``)."""
        if s > self.n:
            return PressureSegment(float(self.n), math.inf, None, self.tail)
        ends = [seg.s_hi for seg in self.segments]
        return self.segments[bisect.bisect_left(ends, s)]

    def segments_on(self, m: int) -> list[PressureSegment]:
        return [seg for seg in self.segments if m <= seg.s_lo and seg.s_hi <= m + 1]


class TransitionKind(str, enum.Enum):
    INTEGER_POINT = "integer-point"
    ENVELOPE_CROSSING = "envelope-crossing"
    CANDIDATE_HIGHER_ORDER = "candidate-higher-order"


@dataclass(frozen=True)
class PhaseTransition:
    s: float
    left_derivative: float
    right_derivative: float
    kind: TransitionKind

    @property
    def jump(self) -> float:
        return self.right_derivative - self.left_derivative


def as_diagonal(system: MatrixSystem | DiagonalSystem, basis=None) -> DiagonalSystem:
    if isinstance(system, DiagonalSystem):
        return system
    return reduce_to_diagonal(system, basis)


def tail_polynomial(ds: DiagonalSystem) -> DirichletPolynomial:
    """``sum_i (|det A_i|**(1/n))**s``; its log is the pressure for ``s >= n``."""
    log_det = ds.log_c.sum(axis=1)
    return DirichletPolynomial.from_log_terms(np.zeros(ds.count), log_det / ds.n).canonicalize()


def pressure(system: MatrixSystem | DiagonalSystem, s: float, basis=None) -> float:
    """``P(s) = max`` over ordered pressures for ``s < n``, determinant branch after.

    A :class:`MatrixSystem` must be triangular (optionally after conjugation by
    ``basis``); otherwise :class:`~subpressure.errors.NotTriangularError` is
    raised and :func:`subpressure.oracle.finite_k_pressure` is the fallback.
    """
    ds = as_diagonal(system, basis)
    if s < 0:
        raise DomainError(f"pressure is defined for s >= 0, got {s}")
    if s >= ds.n:
        return float(tail_polynomial(ds).log_eval(s))
    return float(np.max(level_table(ds, int(math.floor(s))).values(s)))


def _subtable(table: LevelTable, rows: Sequence[int]) -> LevelTable:
    rows = list(rows)
    return LevelTable(
        table.m,
        tuple(table.keys[r] for r in rows),
        table.head_log[rows],
        table.pivot_log[rows],
    )


def _dedup(
    table: LevelTable, polys: Sequence[DirichletPolynomial], tol: float = DEDUP_TOL
) -> list[list[int]]:
    """Group keys whose ordered pressures are the same function; ordered by first key."""
    probe = table.values(np.linspace(table.m, table.m + 1, DEDUP_POINTS))
    groups: list[list[int]] = []
    for k in range(len(polys)):
        home = None
        if groups:
            reps = [g[0] for g in groups]
            dist = np.max(np.abs(probe[reps] - probe[k]), axis=1)
            for r, d in zip(reps, dist):
                if d < 1e-6 and (polys[r] - polys[k]).is_identically_zero():
                    home = r
                    break
            if home is None:
                close = np.flatnonzero(dist <= tol)
                if close.size:
                    home = reps[close[0]]
        if home is None:
            groups.append([k])
        else:
            next(g for g in groups if g[0] == home).append(k)
    return groups


class _Envelope:
    """Upper envelope of the representative ordered pressures of one level."""

    def __init__(self, level: Level, tol: float):
        self.level = level
        self.m = level.m
        self.tol = tol
        self._roots: dict[tuple[int, int], list[float]] = {}

    def argmax(self, s: float, prefer: int | None = None) -> int:
        vals = self.level.rep_table.values(s)
        best = int(np.argmax(vals))
        if prefer is not None and vals[prefer] >= vals[best] - _TIE_TOL * (1 + abs(vals[best])):
            return prefer
        return best

    def _pair_roots(self, a: int, b: int) -> list[float]:
        pair = (min(a, b), max(a, b))
        if pair not in self._roots:
            diff = (self.level.rep_polys[pair[0]] - self.level.rep_polys[pair[1]]).canonicalize()
            if not diff.terms:
                self._roots[pair] = []
            else:
                self._roots[pair] = [
                    r.location for r in isolate_zeros(diff, self.m, self.m + 1, self.tol)
                ]
        return self._roots[pair]

    def crossing(self, a: float, ka: int, b: float, kb: int) -> float:
        inside = [r for r in self._pair_roots(ka, kb) if a - self.tol <= r <= b + self.tol]
        if inside:
            return min(max(inside[0], a), b)
        # Numerical near-tie: bisect the value difference directly.
        vals = self.level.rep_table
        lo, hi = a, b
        while hi - lo > self.tol:
            mid = 0.5 * (lo + hi)
            v = vals.values(mid)
            if v[ka] >= v[kb]:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def refine(self, a: float, ka: int, b: float, kb: int, depth: int = 0) -> list[tuple[float, int, int]]:
        """Hand-overs in ``[a, b]`` given the maximisers ``ka`` at ``a`` and ``kb`` at ``b``."""
        if ka == kb:
            return []
        r = self.crossing(a, ka, b, kb)
        if depth >= _MAX_DEPTH:
            return [(r, ka, kb)]
        c = self.argmax(r, prefer=ka)
        if c != ka and self.argmax(r, prefer=kb) == c:
            return self.refine(a, ka, r, c, depth + 1) + self.refine(r, c, b, kb, depth + 1)
        if r - a > self.tol:
            mid = 0.5 * (a + r)
            x = self.argmax(mid, prefer=ka)
            if x != ka:
                return self.refine(a, ka, mid, x, depth + 1) + self.refine(mid, x, b, kb, depth + 1)
        if b - r > self.tol:
            mid = 0.5 * (r + b)
            y = self.argmax(mid, prefer=kb)
            if y != kb:
                return self.refine(a, ka, mid, y, depth + 1) + self.refine(mid, y, b, kb, depth + 1)
        return [(r, ka, kb)]

    def endpoint_argmax(self, s: float, side: int) -> int:
        """Maximiser just inside an endpoint: ties go to the steepest function inward."""
        vals = self.level.rep_table.values(s)
        top = float(np.max(vals))
        tied = np.flatnonzero(vals >= top - _TIE_TOL * (1 + abs(top)))
        slopes = [side * float(self.level.rep_polys[k].log_derivative(s)) for k in tied]
        return int(tied[int(np.argmax(slopes))])

    def segments(self, grid: int) -> list[tuple[float, float, int]]:
        m = self.m
        centres = m + (np.arange(grid) + 0.5) / grid
        inner = np.argmax(self.level.rep_table.values(centres), axis=0)
        centres = np.concatenate([[float(m)], centres, [float(m + 1)]])
        winners = np.concatenate([[self.endpoint_argmax(m, 1)], inner, [self.endpoint_argmax(m + 1, -1)]])
        handovers: list[tuple[float, int, int]] = []
        for j in np.flatnonzero(winners[1:] != winners[:-1]):
            handovers += self.refine(
                float(centres[j]), int(winners[j]), float(centres[j + 1]), int(winners[j + 1])
            )
        marks = [(float(m), int(winners[0]))]
        for r, _, kr in sorted(handovers):
            if kr != marks[-1][1]:
                marks.append((r, kr))
        ends = [x for x, _ in marks[1:]] + [float(m + 1)]
        pieces = [[lo, hi, k] for (lo, k), hi in zip(marks, ends)]
        out: list[list] = []
        for piece in pieces:
            if out and piece[1] - piece[0] <= self.tol:
                out[-1][1] = piece[1]
                continue
            if out and out[-1][2] == piece[2]:
                out[-1][1] = piece[1]
                continue
            if out:
                piece[0] = out[-1][1]
            out.append(piece)
        if len(out) > 1 and out[0][1] - out[0][0] <= self.tol:
            out[1][0] = out[0][0]
            out.pop(0)
        return [(lo, hi, k) for lo, hi, k in out]

    def consistent(self, pieces: Iterable[tuple[float, float, int]]) -> bool:
        pieces = list(pieces)
        probe = [np.linspace(lo, hi, 5)[1:-1] for lo, hi, _ in pieces]
        probe.append(self.m + np.linspace(0, 1, _CHECK_POINTS))
        s = np.concatenate(probe)
        vals = self.level.rep_table.values(s)
        top = np.max(vals, axis=0)
        starts = [lo for lo, _, _ in pieces]
        active = [pieces[max(bisect.bisect_right(starts, x) - 1, 0)][2] for x in s]
        return bool(np.all(vals[active, np.arange(s.size)] >= top - 1e-10 * (1 + np.abs(top))))


def _build_level(ds: DiagonalSystem, m: int) -> Level:
    table = level_table(ds, m)
    polys = [ordered_pressure_poly(ds, key) for key in table.keys]
    groups = _dedup(table, polys)
    reps = [g[0] for g in groups]
    return Level(
        m,
        table,
        tuple(tuple(g) for g in groups),
        _subtable(table, reps),
        tuple(polys[r] for r in reps),
    )


def build_profile(
    ds: DiagonalSystem | MatrixSystem, grid: int = GRID, tol: float = ROOT_TOL, basis=None
) -> PressureProfile:
    """Resolve the pressure on ``[0, n]`` into analytic segments.

    Hand-over candidates come from a scan of ``grid`` cell centres per unit
    interval; each is then located exactly as a zero of the difference of the
    two competing Dirichlet polynomials.  If the result fails a sampled
    argmax check the scan is repeated on a finer grid.
    """
    ds = as_diagonal(ds, basis)
    if grid < 2:
        raise DomainError("grid needs at least 2 points")
    levels = []
    segments: list[PressureSegment] = []
    for m in range(ds.n):
        level = _build_level(ds, m)
        env = _Envelope(level, tol)
        g = grid
        pieces = env.segments(g)
        for _ in range(3):
            if env.consistent(pieces):
                break
            g *= 4
            pieces = env.segments(g)
        else:
            if not env.consistent(pieces):
                raise PressureError(f"could not resolve the envelope on [{m}, {m + 1}]")
        levels.append(level)
        for lo, hi, k in pieces:
            segments.append(
                PressureSegment(lo, hi, level.rep_keys()[k], level.rep_polys[k], level.equivalents(k))
            )
    return PressureProfile(ds, tuple(segments), tail_polynomial(ds), tuple(levels))


def one_sided_derivatives(
    profile: PressureProfile, s: float, snap: float = SNAP_TOL
) -> tuple[float | None, float]:
    """``(P'_-(s), P'_+(s))``; the left derivative is None at ``s = 0``.

    Points within ``snap`` of a segment boundary are treated as that boundary.
    """
    if s < 0:
        raise DomainError(f"s must be >= 0, got {s}")
    s = profile.snap(s, snap)
    left = None if s == 0 else float(profile.segment_left(s).slope(s))
    right = float(profile.segment_right(s).slope(s))
    return left, right


def find_transitions(profile: PressureProfile, kink_tol: float = KINK_TOL) -> list[PhaseTransition]:
    """Segment boundaries where the pressure may fail to be analytic, ascending.

    A derivative jump above ``kink_tol`` is a transition (``integer-point`` or
    ``envelope-crossing``).  A boundary between two different functions with
    matching slopes is reported as ``candidate-higher-order``; boundaries
    between identical functions are dropped.
    """
    pieces = list(profile.segments) + [PressureSegment(float(profile.n), math.inf, None, profile.tail)]
    out = []
    for left_seg, right_seg in zip(pieces[:-1], pieces[1:]):
        s = left_seg.s_hi
        left = float(left_seg.slope(s))
        right = float(right_seg.slope(s))
        integer = float(s).is_integer()
        if abs(right - left) > kink_tol:
            kind = TransitionKind.INTEGER_POINT if integer else TransitionKind.ENVELOPE_CROSSING
        elif (left_seg.poly - right_seg.poly).is_identically_zero():
            continue
        else:
            kind = TransitionKind.CANDIDATE_HIGHER_ORDER
        out.append(PhaseTransition(s, left, right, kind))
    return out


def affinity_dimension(profile: PressureProfile, xtol: float = 1e-13) -> float:
    """The unique zero of the pressure of a contracting system."""
    if not profile.ds.contracting:
        raise NotContractingError("the affinity dimension needs every matrix to be a contraction")
    f = profile.value
    if f(0.0) <= 0.0:
        return 0.0
    hi = float(profile.n)
    while f(hi) > 0.0:
        hi *= 2.0
    return float(brentq(f, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500))


def transition_bound(n: int, count: int) -> int:
    """``n + (2|I| - 1) * (n^3 / (8n - 4) * C(2n, n) - 2^n n / 4)`` evaluated exactly."""
    if n < 1 or count < 1:
        raise DomainError(f"need n >= 1 and count >= 1, got n={n}, count={count}")
    pairs = Fraction(n**3, 8 * n - 4) * math.comb(2 * n, n) - Fraction(2**n * n, 4)
    total = n + (2 * count - 1) * pairs
    assert total.denominator == 1
    return int(total)


def check_analyticity_condition(ds: DiagonalSystem | MatrixSystem, m: int) -> OrderedKey | None:
    """A key whose ordering matches every matrix's own singular value order on ``[m, m+1]``.

    The head values must be the ``m`` largest diagonal values of each matrix
    and the pivot value the ``(m+1)``-th largest.  When a key is returned the
    pressure equals that key's ordered pressure on the whole of ``[m, m+1]``.
    """
    ds = as_diagonal(ds)
    if not 0 <= m <= ds.n - 1:
        raise DomainError(f"m must lie in 0..{ds.n - 1}, got {m}")
    ranked = -np.sort(-ds.c, axis=1)
    top = ranked[:, :m]
    nxt = ranked[:, m]
    for key in enumerate_keys(ds.n, m):
        head = -np.sort(-ds.c[:, [h - 1 for h in key.head]], axis=1)
        if np.allclose(head, top, rtol=1e-12, atol=0.0) and np.allclose(
            ds.c[:, key.pivot - 1], nxt, rtol=1e-12, atol=0.0
        ):
            return key
    return None


@dataclass(frozen=True)
class CurveTable:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


def curve_data(profile: PressureProfile, s_lo: float, s_hi: float, points: int) -> CurveTable:
    """Ordered pressures and the pressure on a uniform grid.

    Columns are ``s``, ``P``, one per key (all levels, enumeration order) and
    the active key label.  A key column is filled only where its interval
    ``[m, m+1]`` contains ``s``, so integer rows carry both neighbours.
    """
    if not 0 <= s_lo < s_hi:
        raise DomainError(f"need 0 <= s_lo < s_hi, got [{s_lo}, {s_hi}]")
    if points < 2:
        raise DomainError("need at least 2 points")
    columns = ["s", "P"]
    offsets = []
    for level in profile.levels:
        offsets.append(len(columns))
        columns += [key.label for key in level.table.keys]
    columns.append("active")
    rows = []
    for s in np.linspace(s_lo, s_hi, points):
        s = float(s)
        row: list = [None] * len(columns)
        row[0] = s
        row[1] = profile.value(s)
        for level, off in zip(profile.levels, offsets):
            if level.m <= s <= level.m + 1:
                vals = level.table.values(s)
                row[off : off + len(vals)] = [float(v) for v in vals]
        row[-1] = profile.segment_right(s).label
        rows.append(tuple(row))
    return CurveTable(tuple(columns), tuple(rows))
