import math
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from salemforge.errors import DimensionError, DomainError, IntervalError, ShapeError
from salemforge.intpoly import (CYCLOTOMIC_PRODUCT, MIXED, NOT_O_PLUS, SALEM, EntropyInterval, IntPolynomial,
                                char_poly, classify, cyclotomic, cyclotomics_up_to_degree,
                                expand_trace_polynomial, is_reciprocal, spectral_radius, sturm_count,
                                totient, trace_polynomial)

P = IntPolynomial
t = P((0, 1))
LEHMER = P(oracles.LEHMER_COEFFS)
GOLDEN_SQ = P((1, -3, 1))


def companion(coeffs):
    n = len(coeffs) - 1
    m = [[0] * n for _ in range(n)]
    for i in range(1, n):
        m[i][i - 1] = 1
    for i in range(n):
        m[i][n - 1] = -coeffs[i]
    return m


# ---------------------------------------------------------------- arithmetic

def test_zero_and_normalisation():
    assert P((1, 2, 0, 0)).coeffs == (1, 2)
    assert P((0, 0)).is_zero() and not P((0, 0))
    assert (t - 1) * (t + 1) == P((-1, 0, 1))


def test_exact_division_and_gcd():
    a = (t - 1) ** 3 * (t + 2)
    assert a.exact_div(t - 1) == (t - 1) ** 2 * (t + 2)
    assert a.gcd(a.derivative()) == (t - 1) ** 2
    assert a.squarefree() == (t - 1) * (t + 2)
    assert P((2, 4, 6)).content() == 2


def test_squarefree_decomposition_multiplicities():
    p = (t - 1) * (t + 1) ** 2 * (t ** 2 + 1) ** 3
    parts = dict((f.coeffs, k) for f, k in p.squarefree_decomposition())
    assert parts == {(t - 1).coeffs: 1, (t + 1).coeffs: 2, (t ** 2 + 1).coeffs: 3}


def test_json_round_trip_uses_decimal_strings():
    p = P((10 ** 40, -3, 1))
    data = p.to_json()
    assert data == [str(10 ** 40), "-3", "1"]
    assert P.from_json(data) == p


# ---------------------------------------------------------------- char_poly

def test_char_poly_examples():
    assert char_poly([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == (t - 1) ** 3
    assert char_poly([[0, 1], [1, 0]]) == t ** 2 - 1
    assert char_poly(companion(oracles.LEHMER_COEFFS)) == LEHMER


def test_char_poly_rejects_non_square():
    with pytest.raises(DimensionError):
        char_poly([[1, 2, 3], [4, 5, 6]])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_char_poly_matches_interpolation_oracle(m):
    assert list(char_poly(m).coeffs) == oracles.char_poly_by_interpolation(m)


# ---------------------------------------------------------------- cyclotomics

def test_cyclotomic_examples():
    assert cyclotomic(1) == t - 1
    assert cyclotomic(2) == t + 1
    assert cyclotomic(12) == P((1, 0, -1, 0, 1))
    with pytest.raises(DomainError):
        cyclotomic(0)


def test_cyclotomic_enumeration_small():
    assert [n for n, _ in cyclotomics_up_to_degree(1)] == [1, 2]
    assert [n for n, _ in cyclotomics_up_to_degree(2)] == [1, 2, 3, 4, 6]


def test_cyclotomic_count_matches_totient_oracle():
    assert oracles.cyclotomic_count(22, 2 * 22 ** 2) == oracles.CYCLOTOMIC_COUNT_22
    assert len(cyclotomics_up_to_degree(22)) == oracles.CYCLOTOMIC_COUNT_22


@pytest.mark.parametrize("d", [1, 4, 8, 22])
def test_enumerated_cyclotomics_divide_t_n_minus_one(d):
    for n, phi in cyclotomics_up_to_degree(d):
        assert phi.degree == totient(n) == oracles.totient(n) <= d
        assert phi.divides(t ** n - 1)


# ---------------------------------------------------------------- reciprocity and trace polynomials

def test_reciprocal_examples():
    assert is_reciprocal(GOLDEN_SQ)
    assert not is_reciprocal(t ** 2 - 2)
    assert is_reciprocal(LEHMER)


def test_trace_polynomial_examples():
    y = t
    assert trace_polynomial(GOLDEN_SQ) == y - 3
    assert trace_polynomial(cyclotomic(12)) == y ** 2 - 3
    assert trace_polynomial(P((1, 1, 1))) == y + 1


@pytest.mark.parametrize("bad", [t ** 3 + 1, t ** 2 - 2, (t - 1) ** 2, P((1, 2, 1))])
def test_trace_polynomial_rejects_bad_shapes(bad):
    with pytest.raises(ShapeError):
        trace_polynomial(bad)


monic_trace = st.integers(1, 8).flatmap(
    lambda d: st.lists(st.integers(-30, 30), min_size=d, max_size=d)).map(lambda c: P(tuple(c) + (1,)))


@settings(max_examples=1000, deadline=None)
@given(monic_trace)
def test_trace_polynomial_round_trip(tr):
    p = expand_trace_polynomial(tr)
    assume(p(1) != 0 and p(-1) != 0)
    assert is_reciprocal(p) and p.degree == 2 * tr.degree
    assert trace_polynomial(p) == tr
    assert expand_trace_polynomial(trace_polynomial(p)) == p


# ---------------------------------------------------------------- Sturm counting

def test_sturm_examples():
    assert sturm_count(t - 3, 2, 10 ** 6) == 1
    assert sturm_count(t ** 2 - 3, -2, 2) == 2
    assert sturm_count((t - 1) ** 2, 0, 2) == 1
    assert sturm_count(t - 2, 1, 2) == 1 and sturm_count(t - 1, 1, 2) == 0  # half-open (a, b]
    with pytest.raises(IntervalError):
        sturm_count(t, 1, 1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=7),
       st.lists(st.integers(-20, 20), min_size=1, max_size=4),
       st.lists(st.fractions(min_value=-8, max_value=8, max_denominator=5), min_size=1, max_size=5, unique=True))
def test_sturm_additive_over_partitions(roots, extra, cuts):
    p = P.from_roots(roots) * P(tuple(extra) + (1,))
    pts = [-math.inf] + sorted(cuts) + [math.inf]
    parts = sum(sturm_count(p, a, b) for a, b in zip(pts, pts[1:]))
    assert parts == sturm_count(p, -math.inf, math.inf)
    assert sturm_count(p, -math.inf, math.inf) >= len(set(roots))


# ---------------------------------------------------------------- classification

def test_classify_lehmer_with_cyclotomic_factors():
    p = cyclotomic(1) ** 2 * cyclotomic(6) * LEHMER
    c = classify(p)
    assert c.kind == MIXED
    assert c.cyclotomic_factors == ((1, 2), (6, 1))
    assert c.salem_factor == LEHMER and c.salem_degree == 10
    assert c.reconstruct() == p


def test_classify_unipotent_and_quadratic():
    c = classify((t - 1) ** 22)
    assert c.kind == CYCLOTOMIC_PRODUCT and c.cyclotomic_factors == ((1, 22),)
    q = classify(GOLDEN_SQ)
    assert q.kind == SALEM and q.salem_degree == 2
    assert classify(GOLDEN_SQ, strict=True).kind == NOT_O_PLUS


def test_classify_rejects_non_monic():
    with pytest.raises(ShapeError):
        classify(P((1, 2)))


@pytest.mark.parametrize("p", [t ** 2 - 2, t ** 4 - 4 * t ** 2 + 1, t ** 2 + 3 * t + 1, (t ** 2 - 3 * t + 1) ** 2,
                               (t ** 2 - 3 * t + 1) * (t ** 2 - 4 * t + 1)])
def test_non_salem_shapes(p):
    c = classify(p)
    assert c.kind == NOT_O_PLUS and c.salem_factor is None
    assert c.reconstruct() == p


cyclo_products = st.lists(st.tuples(st.sampled_from([1, 2, 3, 4, 5, 6, 8, 10, 12]), st.integers(1, 3)), max_size=4)


@settings(max_examples=150, deadline=None)
@given(cyclo_products, st.sampled_from([None, LEHMER, GOLDEN_SQ, P((1, -1, -1, -1, 1)), t ** 2 - 2]))
def test_classify_reconstructs_input(factors, core):
    p = P((1,))
    for n, k in factors:
        p = p * cyclotomic(n) ** k
    if core is not None:
        p = p * core
    assume(p.degree >= 1)
    c = classify(p)
    assert c.reconstruct() == p
    assert [n for n, _ in c.cyclotomic_factors] == sorted(n for n, _ in c.cyclotomic_factors)
    if c.salem_factor is not None:
        assert c.salem_factor.is_monic() and is_reciprocal(c.salem_factor) and c.salem_degree % 2 == 0


# ---------------------------------------------------------------- spectral radius

def test_lehmer_radius_matches_bisection_oracle():
    lo, hi = oracles.lehmer_root_by_bisection()
    assert hi - lo < Fraction(1, 10 ** 30)
    assert abs(lo - oracles.LEHMER_ROOT) < Fraction(1, 10 ** 30)
    e = spectral_radius(classify(LEHMER), Fraction(1, 10 ** 6))
    assert e.width <= Fraction(1, 10 ** 6)
    assert e.contains(oracles.LEHMER_ROOT)
    assert Fraction(e.log_lower) <= Fraction("0.162357612007738") <= Fraction(e.log_upper)


def test_golden_square_radius_contains_closed_form():
    e = spectral_radius(classify(GOLDEN_SQ), Fraction(1, 10 ** 6))
    assert e.width <= Fraction(1, 10 ** 6)
    # (3 + sqrt 5)/2 in [lo, hi]  <=>  sqrt 5 in [2lo - 3, 2hi - 3]
    assert (2 * e.lower - 3) ** 2 <= 5 <= (2 * e.upper - 3) ** 2


def test_cyclotomic_product_has_zero_entropy():
    e = spectral_radius(classify((t - 1) ** 22), Fraction(1, 10 ** 6))
    assert e.lower == e.upper == 1
    assert Fraction(e.log_lower) == Fraction(e.log_upper) == 0


def test_radius_rejects_bad_tolerance():
    with pytest.raises(DomainError):
        spectral_radius(classify(LEHMER), 0)


def test_radius_rejects_non_salem_shape():
    with pytest.raises(ShapeError):
        spectral_radius(classify(t ** 2 - 2), Fraction(1, 100))


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 40), st.sampled_from([Fraction(1, 10), Fraction(1, 10 ** 4), Fraction(1, 10 ** 9)]))
def test_quadratic_salem_intervals(k, tol):
    # t^2 - k t + 1 has largest root (k + sqrt(k^2 - 4)) / 2
    e = spectral_radius(classify(P((1, -k, 1))), tol)
    assert e.lower > 1 and e.width <= tol
    assert (2 * e.lower - k) ** 2 <= k * k - 4 <= (2 * e.upper - k) ** 2
    assert math.log(float(e.lower)) - 1e-12 <= float(e.log_upper)


def test_entropy_interval_json_round_trip():
    e = spectral_radius(classify(LEHMER), Fraction(1, 10 ** 8))
    assert EntropyInterval.from_json(e.to_json()) == e


def test_random_palindromes_never_crash():
    rng = random.Random(5)
    for _ in range(200):
        half = [1] + [rng.randint(-4, 4) for _ in range(rng.randint(1, 5))]
        p = P(tuple(half + half[-2::-1]))
        c = classify(p)
        assert c.reconstruct() == p
