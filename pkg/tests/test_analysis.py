import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import EX1, EX2, EX3
from systems import random_diagonal, random_upper
from subpressure.analysis import (
    TransitionKind,
    affinity_dimension,
    build_profile,
    check_analyticity_condition,
    curve_data,
    find_transitions,
    one_sided_derivatives,
    pressure,
    transition_bound,
)
from subpressure.errors import DomainError, NotContractingError
from subpressure.linalg import MatrixSystem
from subpressure.oracle import finite_k_pressures
from subpressure.ordered import DiagonalSystem, OrderedKey, enumerate_keys, ordered_pressure_eval

# Hand-over points derived independently of the envelope code.
EX1_CROSSING = 0.5
EX2_CROSSING = 1 + math.log2(8 / 7)
EX3_CROSSING = 2 + brentq(
    lambda t: math.log(0.45 * 0.8**t + 0.45 * 0.01**t) - math.log(0.729 * 0.5**t), 0.01, 0.99, xtol=1e-15
)
GOLDEN = math.log2((1 + math.sqrt(5)) / 2)


def brute_max(ds, s):
    m = min(int(math.floor(s)), ds.n - 1)
    return max(ordered_pressure_eval(ds, key, s) for key in enumerate_keys(ds.n, m))


def crossings(profile):
    return [t for t in find_transitions(profile) if t.kind == TransitionKind.ENVELOPE_CROSSING]


class TestExamples:
    def test_first(self):
        profile = build_profile(DiagonalSystem.from_values(EX1))
        (t,) = crossings(profile)
        assert t.s == pytest.approx(EX1_CROSSING, abs=1e-12)
        assert t.left_derivative == pytest.approx(math.log(0.4), abs=1e-12)
        right = (math.sqrt(0.9) * math.log(0.9) + math.sqrt(0.1) * math.log(0.1)) / (2 * math.sqrt(0.4))
        assert t.right_derivative == pytest.approx(right, abs=1e-10)
        assert [s.label for s in profile.segments] == ["{}/2", "{}/1", "{1}/3", "{1,3}/2"]

    def test_second(self):
        profile = build_profile(DiagonalSystem.from_values(EX2))
        (t,) = crossings(profile)
        assert t.s == pytest.approx(EX2_CROSSING, abs=1e-11)
        assert t.left_derivative == pytest.approx(-1.469054, abs=1e-6)
        assert t.right_derivative == pytest.approx(-0.977709, abs=1e-6)
        assert t.s == pytest.approx(1.193, abs=1e-3)

    def test_third(self):
        profile = build_profile(DiagonalSystem.from_values(EX3))
        (t,) = crossings(profile)
        assert t.s == pytest.approx(EX3_CROSSING, abs=1e-11)
        assert t.right_derivative == pytest.approx(math.log(0.5), abs=1e-12)
        assert t.left_derivative == pytest.approx(-1.6950453, abs=1e-6)

    def test_integer_points_are_transitions(self):
        profile = build_profile(DiagonalSystem.from_values(EX1))
        integer = [t.s for t in find_transitions(profile) if t.kind == TransitionKind.INTEGER_POINT]
        assert integer == [1.0, 2.0, 3.0]

    def test_derivatives_at_crossing(self):
        profile = build_profile(DiagonalSystem.from_values(EX1))
        left, right = one_sided_derivatives(profile, 0.5)
        assert left == pytest.approx(-0.916, abs=5e-3)
        assert right == pytest.approx(-0.655, abs=5e-3)

    def test_derivatives_elsewhere_agree(self):
        profile = build_profile(DiagonalSystem.from_values(EX1))
        left, right = one_sided_derivatives(profile, 1.4)
        assert left == right
        h = 1e-6
        assert right == pytest.approx((profile.value(1.4 + h) - profile.value(1.4 - h)) / (2 * h), abs=1e-7)
        assert one_sided_derivatives(profile, 0.0)[0] is None

    def test_tail(self):
        profile = build_profile(DiagonalSystem.from_values(EX1))
        assert profile.value(3.0) == pytest.approx(math.log(0.224))
        assert profile.value(4.5) == pytest.approx(math.log(0.216**1.5 + 0.008**1.5))
        assert profile.segment_right(3.5).key is None

    def test_pressure_function(self, ex1_system):
        assert pressure(ex1_system, 0.5) == pytest.approx(math.log(2 * math.sqrt(0.4)))
        assert pressure(ex1_system, 3.0) == pytest.approx(math.log(0.224))
        with pytest.raises(DomainError):
            pressure(ex1_system, -0.1)


class TestDimension:
    def test_golden(self):
        profile = build_profile(DiagonalSystem.from_values([[0.5], [0.25]]))
        assert affinity_dimension(profile) == pytest.approx(GOLDEN, abs=1e-12)

    def test_first_example(self):
        # 0.9*0.4^(s-1) + 0.1*0.2^(s-1) = 1 at s = 1.
        assert affinity_dimension(build_profile(DiagonalSystem.from_values(EX1))) == pytest.approx(1.0, abs=1e-12)

    def test_single_map_is_zero(self):
        assert affinity_dimension(build_profile(DiagonalSystem.from_values([[0.5, 0.5]]))) == 0.0

    def test_beyond_n(self):
        # Four maps of ratio 0.9 in dimension 1: the zero lies far above n.
        profile = build_profile(DiagonalSystem.from_values([[0.9]] * 4))
        assert affinity_dimension(profile) == pytest.approx(math.log(4) / -math.log(0.9), rel=1e-12)

    def test_not_contracting(self, big_system):
        with pytest.warns(Warning):
            profile = build_profile(big_system)
        with pytest.raises(NotContractingError):
            affinity_dimension(profile)

    def test_pressure_vanishes(self, rng):
        for _ in range(20):
            profile = build_profile(random_diagonal(rng, 3, 3))
            d = affinity_dimension(profile)
            assert abs(profile.value(d)) < 1e-12


class TestBound:
    @staticmethod
    def unsimplified(n, count):
        pairs = sum(math.comb(n * math.comb(n - 1, m), 2) for m in range(n))
        return n + (2 * count - 1) * pairs

    def test_value(self):
        assert transition_bound(5, 2) == 2510

    @pytest.mark.parametrize("n", range(1, 9))
    @pytest.mark.parametrize("count", [1, 2, 5])
    def test_matches_pair_count(self, n, count):
        assert transition_bound(n, count) == self.unsimplified(n, count)

    def test_exact_for_large_n(self):
        n = 30
        expected = n + 3 * (Fraction(n**3, 8 * n - 4) * math.comb(2 * n, n) - Fraction(2**n * n, 4))
        assert transition_bound(n, 2) == expected

    def test_invalid(self):
        with pytest.raises(DomainError):
            transition_bound(0, 2)

    def test_random_systems_respect_bound(self, rng):
        for _ in range(20):
            ds = random_diagonal(rng, 3, 3)
            assert len(find_transitions(build_profile(ds))) <= transition_bound(3, 3)


class TestAnalyticityCondition:
    def test_big_system(self, big_system):
        with pytest.warns(Warning):
            assert check_analyticity_condition(big_system, 3) == OrderedKey(3, (3, 4, 6), 5)
        with pytest.warns(Warning):
            assert check_analyticity_condition(big_system, 6) == OrderedKey(6, (1, 3, 4, 5, 6, 7), 2)

    def test_absent(self):
        assert check_analyticity_condition(DiagonalSystem.from_values(EX1), 0) is None

    def test_aligned_system(self):
        ds = DiagonalSystem.from_values([[0.9, 0.5, 0.1], [0.8, 0.3, 0.2]])
        for m in range(3):
            assert check_analyticity_condition(ds, m) == enumerate_keys(3, m)[0]

    def test_range(self, ex1_ds):
        with pytest.raises(DomainError):
            check_analyticity_condition(ex1_ds, 3)

    def test_key_is_active(self, rng):
        found = 0
        for _ in range(200):
            ds = random_diagonal(rng, 3, 2)
            profile = build_profile(ds)
            for m in range(3):
                key = check_analyticity_condition(ds, m)
                if key is None:
                    continue
                found += 1
                segs = profile.segments_on(m)
                assert len(segs) == 1
                assert key in segs[0].equivalent
        assert found > 20


class TestEnvelope:
    def test_matches_brute_force(self, rng):
        for _ in range(30):
            ds = random_diagonal(rng, 3, 3)
            profile = build_profile(ds)
            for s in rng.uniform(0, 3, size=20):
                assert profile.value(s) == pytest.approx(brute_max(ds, s), abs=1e-13)

    def test_segments_tile(self, rng):
        for _ in range(30):
            profile = build_profile(random_diagonal(rng, 4, 2))
            segs = profile.segments
            assert segs[0].s_lo == 0.0
            assert segs[-1].s_hi == 4.0
            for a, b in zip(segs[:-1], segs[1:]):
                assert a.s_hi == b.s_lo
                assert a.s_lo < a.s_hi

    def test_active_key_is_maximal(self, rng):
        for _ in range(30):
            ds = random_diagonal(rng, 3, 4)
            profile = build_profile(ds)
            for seg in profile.segments:
                mid = 0.5 * (seg.s_lo + seg.s_hi)
                assert ordered_pressure_eval(ds, seg.key, mid) == pytest.approx(brute_max(ds, mid), abs=1e-13)

    def test_oracle_sandwich(self, rng):
        s_values = [0.3, 0.9, 1.5, 2.2]
        for _ in range(5):
            ds = random_diagonal(rng, 3, 2)
            profile = build_profile(ds)
            estimates = finite_k_pressures(MatrixSystem.from_diagonals(ds.c), s_values, 12)
            for s, est in zip(s_values, estimates):
                assert est.brackets(profile.value(s), 1e-10)

    def test_permutation_invariance(self, rng):
        for _ in range(20):
            ds = random_diagonal(rng, 3, 3)
            a = build_profile(ds)
            b = build_profile(ds.permuted(rng.permutation(3)))
            for s in np.linspace(0, 3.5, 29):
                assert a.value(s) == pytest.approx(b.value(s), abs=1e-13)
            ta = [t.s for t in crossings(a)]
            tb = [t.s for t in crossings(b)]
            assert ta == pytest.approx(tb, abs=1e-10)

    def test_decreasing_for_contractions(self, rng):
        for _ in range(20):
            profile = build_profile(random_diagonal(rng, 3, 3))
            values = [profile.value(s) for s in np.linspace(0, 4, 161)]
            assert np.all(np.diff(values) < 0)

    def test_equal_rows_collapse(self):
        # Identical maps: every ordered pressure is a shifted copy; duplicates merge.
        ds = DiagonalSystem.from_values([[0.5, 0.5, 0.5], [0.3, 0.3, 0.3]])
        profile = build_profile(ds)
        assert len(profile.segments) == 3
        assert len(profile.segments[0].equivalent) == 3

    def test_triangular_system(self, rng):
        system = random_upper(rng, 3, 2)
        a = build_profile(system)
        b = build_profile(DiagonalSystem(np.abs([np.diag(x) for x in system.matrices])))
        assert a.value(1.3) == b.value(1.3)

    def test_coarse_grid_still_resolves(self):
        profile = build_profile(DiagonalSystem.from_values(EX2), grid=2)
        (t,) = crossings(profile)
        assert t.s == pytest.approx(EX2_CROSSING, abs=1e-11)


class TestCurveData:
    def test_columns(self, ex1_ds):
        table = curve_data(build_profile(ex1_ds), 0, 3, 7)
        assert table.columns[:3] == ("s", "P", "{}/1")
        assert table.columns[-1] == "active"
        assert len(table.columns) == 2 + 12 + 1

    def test_row_max(self, ex1_ds):
        profile = build_profile(ex1_ds)
        table = curve_data(profile, 0, 3, 61)
        for row in table.rows:
            s, p = row[0], row[1]
            m = min(int(s), 2)
            level = [v for v, col in zip(row[2:-1], table.columns[2:-1]) if OrderedKey.parse(col).m == m]
            assert p == pytest.approx(max(level), abs=1e-13)

    def test_integer_rows_carry_both_levels(self, ex1_ds):
        table = curve_data(build_profile(ex1_ds), 0, 2, 3)
        row = table.rows[1]
        assert row[0] == 1.0
        assert all(v is not None for v in row[2:-1][:9])

    def test_invalid(self, ex1_ds):
        profile = build_profile(ex1_ds)
        with pytest.raises(DomainError):
            curve_data(profile, 1, 1, 5)
        with pytest.raises(DomainError):
            curve_data(profile, 0, 1, 1)
