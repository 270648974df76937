import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subpressure.dirichlet import DirichletPolynomial, isolate_zeros
from subpressure.errors import IdenticallyZeroError

GOLDEN_ROOT = math.log2((1 + math.sqrt(5)) / 2)


def poly(coeffs, bases):
    return DirichletPolynomial.from_coefficients(coeffs, bases)


class TestCanonicalize:
    def test_merge(self):
        p = DirichletPolynomial(((1, 0.0, math.log(0.5)), (1, 0.0, math.log(0.5)))).canonicalize()
        assert len(p) == 1
        sign, log_coeff, log_base = p.terms[0]
        assert sign == 1
        assert log_coeff == pytest.approx(math.log(2))
        assert log_base == pytest.approx(math.log(0.5))

    def test_cancellation(self):
        p = DirichletPolynomial(((1, 0.0, math.log(0.5)), (-1, 0.0, math.log(0.5))))
        assert p.canonicalize().terms == ()
        assert p.is_identically_zero()

    def test_idempotent(self):
        p = poly([1.5, -0.25, 3.0], [0.2, 0.7, 1.3]).canonicalize()
        assert p.canonicalize() == p
        assert DirichletPolynomial(p.terms).canonicalize().terms == p.terms

    def test_sorted_descending(self):
        p = poly([1, 1, 1], [0.2, 0.9, 0.5]).canonicalize()
        assert list(p.log_bases) == sorted(p.log_bases, reverse=True)

    def test_partial_cancellation_sign(self):
        p = poly([1.0, -3.0], [0.4, 0.4]).canonicalize()
        assert len(p) == 1
        assert p.eval(1.0) == pytest.approx(-0.8)

    def test_near_equal_bases_merge(self):
        b = math.log(0.4)
        p = DirichletPolynomial(((1, 0.0, b), (1, 0.0, b + 5e-13))).canonicalize()
        assert len(p) == 1


class TestEval:
    def test_single_term(self):
        assert poly([2], [0.5]).canonicalize().eval(1.0) == pytest.approx(1.0)

    def test_empty(self):
        assert DirichletPolynomial().eval(3.7) == 0.0

    def test_difference_at_zero(self):
        assert poly([1, -1], [0.9, 0.1]).canonicalize().eval(0.0) == pytest.approx(0.0, abs=1e-16)

    def test_array(self):
        p = poly([1, 1, -1], [0.5, 0.25, 1.0]).canonicalize()
        s = np.linspace(-3, 3, 13)
        assert np.allclose(p.eval(s), 0.5**s + 0.25**s - 1)

    def test_no_overflow_in_log_form(self):
        p = DirichletPolynomial(((1, 800.0, 0.0), (1, 799.0, 0.0))).canonicalize()
        assert p.log_eval(0.0) == pytest.approx(800 + math.log1p(math.exp(-1)))


class TestDerivative:
    def test_single_term(self):
        d = poly([2], [0.5]).canonicalize().derivative()
        assert len(d) == 1
        sign, log_coeff, log_base = d.terms[0]
        assert sign == -1
        assert log_coeff == pytest.approx(math.log(2 * math.log(2)))
        assert log_base == pytest.approx(math.log(0.5))

    def test_constant_vanishes(self):
        assert DirichletPolynomial.constant(4.0).canonicalize().derivative().terms == ()

    def test_term_count_preserved(self):
        p = poly([1, -2], [0.3, 3.0]).canonicalize()
        assert len(p.derivative().derivative()) <= 2

    def test_against_finite_differences(self):
        p = poly([1.0, -0.5, 2.0], [math.exp(3), math.exp(-2), math.exp(0.5)]).canonicalize()
        d = p.derivative()
        s = 0.3
        errs = [abs(d.eval(s) - (p.eval(s + h) - p.eval(s - h)) / (2 * h)) for h in (1e-4, 1e-5)]
        assert 70 < errs[0] / errs[1] < 130

    def test_log_derivative(self):
        p = poly([1.0, 2.0], [0.3, 0.8]).canonicalize()
        s = 0.7
        assert p.log_derivative(s) == pytest.approx(p.derivative().eval(s) / p.eval(s), rel=1e-13)


class TestZeroBound:
    def test_two_matrix_difference(self):
        # Two ordered pressures of a two-matrix system: 2|I| = 4 terms before merging.
        a = poly([1, 1], [0.9, 0.1])
        b = poly([1, 1], [0.6, 0.2])
        diff = a - b
        assert len(diff) - 1 == 3
        assert diff.zero_bound() == 3

    def test_merged_difference_is_sharper(self):
        diff = poly([1, 1], [0.9, 0.1]) - poly([1, 1], [0.4, 0.4])
        assert len(diff) - 1 == 3
        assert diff.zero_bound() == 2

    def test_single_term(self):
        assert poly([3], [0.7]).zero_bound() == 0

    def test_zero_polynomial(self):
        with pytest.raises(IdenticallyZeroError):
            (poly([1], [0.5]) - poly([1], [0.5])).zero_bound()


class TestIsolateZeros:
    def test_golden_ratio(self):
        roots = isolate_zeros(poly([1, 1, -1], [0.5, 0.25, 1.0]), 0.0, 2.0)
        assert len(roots) == 1
        assert roots[0].kind == "simple"
        assert roots[0].location == pytest.approx(GOLDEN_ROOT, abs=1e-12)

    def test_positive_polynomial(self):
        assert isolate_zeros(poly([1, 2, 0.5], [0.3, 1.2, 4.0]), -5, 5) == []

    def test_first_example_crossing(self):
        # Level-0 ordered pressures with pivots 1 and 2 of the first example.
        e = poly([1, 1], [0.9, 0.1]) - poly([2], [0.4])
        interior = isolate_zeros(e, 0.01, 0.99)
        assert [r.location for r in interior] == [pytest.approx(0.5, abs=1e-12)]
        closed = isolate_zeros(e, 0.0, 1.0)
        assert [round(r.location, 10) for r in closed] == [0.0, 0.5]

    def test_tangential(self):
        # (2^s - 1)^2 touches zero at s = 0.
        roots = isolate_zeros(poly([1, -2, 1], [1, 2, 4]), -1, 1)
        assert len(roots) == 1
        assert roots[0].kind == "tangential"
        assert roots[0].location == pytest.approx(0.0, abs=1e-6)

    def test_crossing_at_critical_point_is_simple(self):
        # (2^s - 1)^3 has a triple root at 0 with a sign change.
        roots = isolate_zeros(poly([1, -3, 3, -1], [8, 4, 2, 1]), -1, 1)
        assert [r.kind for r in roots] == ["simple"]
        assert roots[0].location == pytest.approx(0.0, abs=1e-4)

    def test_identically_zero(self):
        with pytest.raises(IdenticallyZeroError):
            isolate_zeros(poly([1], [0.5]) - poly([1], [0.5]), 0, 1)

    def test_three_roots(self):
        # (x - 1/2)(x - 1/4)(x - 1/8) with x = 2^-s: roots at s = 1, 2, 3.
        p = poly([1, -(0.5 + 0.25 + 0.125), 0.5 * 0.25 + 0.5 * 0.125 + 0.25 * 0.125, -(0.5 * 0.25 * 0.125)],
                 [1 / 8, 1 / 4, 1 / 2, 1.0])
        roots = isolate_zeros(p, 0.0, 4.0)
        assert [r.location for r in roots] == [pytest.approx(x, abs=1e-10) for x in (1, 2, 3)]
        assert all(r.kind == "simple" for r in roots)


finite = st.floats(-3, 3, allow_nan=False)


@st.composite
def random_polys(draw, max_terms=6):
    n = draw(st.integers(1, max_terms))
    log_bases = draw(st.lists(st.floats(-2.5, 2.5), min_size=n, max_size=n, unique=True))
    coeffs = draw(st.lists(st.floats(0.1, 3.0), min_size=n, max_size=n))
    signs = draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
    p = DirichletPolynomial(tuple((g, math.log(c), b) for g, c, b in zip(signs, coeffs, log_bases))).canonicalize()
    return p


@settings(max_examples=200, deadline=None)
@given(random_polys())
def test_root_count_never_exceeds_bound(p):
    if not p.terms:
        return
    roots = isolate_zeros(p, -3.0, 3.0)
    assert len(roots) <= p.zero_bound()
    assert all(-3.0 <= r.location <= 3.0 for r in roots)
    assert [r.location for r in roots] == sorted(r.location for r in roots)


@settings(max_examples=200, deadline=None)
@given(random_polys())
def test_simple_root_residual(p):
    if not p.terms:
        return
    tol = 1e-12
    d = p.derivative()
    for r in isolate_zeros(p, -3.0, 3.0, tol=tol):
        if r.kind == "simple":
            _, _, scale = p.scaled(r.location)
            value = abs(p.eval(r.location))
            slope = abs(d.eval(r.location))
            # Rounding floor of the evaluation itself.
            floor = 64 * np.finfo(float).eps * scale * math.exp(p.scaled(r.location)[1])
            assert value <= 10 * tol * slope + floor
