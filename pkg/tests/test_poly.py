from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from whitehead_calc.poly import Poly, power_sum

j, k = Poly.var("j"), Poly.var("k")

small_ints = st.integers(-5, 5)
polys = st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2), small_ints), max_size=4).map(
    lambda ts: sum((Poly.const(c) * j ** a * k ** b for a, b, c in ts), Poly()))


def test_canonical_form_drops_zero_terms():
    assert (j + k - j) == k
    assert (j - j).is_zero()
    assert Poly.const(0) == Poly()


def test_arithmetic_and_evaluation():
    p = (j + 1) * (k - 2)
    assert p.evaluate({"j": 3, "k": 5}) == 12
    assert str(Poly.const(3) * j * j - k) == "3*j^2 - k"


def test_power_sums_match_closed_forms():
    n = sympy.Symbol("n")
    t = sympy.Symbol("t")
    for d in range(6):
        expected = sympy.summation(t ** d, (t, 0, n))
        for value in range(8):
            assert power_sum(d).evaluate({"n": value}) == expected.subs(n, value)


@settings(max_examples=60, deadline=None)
@given(polys, st.integers(-3, 4), st.integers(-3, 6))
def test_sum_over_agrees_with_direct_summation(p, lo_shift, hi):
    lo = Poly.var("j") + lo_shift
    s = p.sum_over("k", lo, Poly.const(hi))
    for jv in range(-2, 4):
        direct = sum(p.evaluate({"j": jv, "k": kv}) for kv in range(jv + lo_shift, hi + 1))
        if jv + lo_shift <= hi + 1:
            assert s.evaluate({"j": jv}) == direct


@given(polys, st.integers(1, 12))
def test_reduce_mod_preserves_residues(p, m):
    q = p.reduce_mod(m)
    for jv in range(-3, 4):
        for kv in range(-3, 4):
            assert (p.evaluate({"j": jv, "k": kv}) - q.evaluate({"j": jv, "k": kv})) % m == 0


def test_reduce_mod_of_integer_valued_rational_polynomial():
    tri = j * (j + 1) * Fraction(1, 2)
    r = tri.reduce_mod(2)
    for jv in range(10):
        assert (r.evaluate({"j": jv}) - jv * (jv + 1) // 2) % 2 == 0


j_polys = st.lists(st.tuples(st.integers(0, 2), small_ints), max_size=3).map(
    lambda ts: sum((Poly.const(c) * j ** a for a, c in ts), Poly()))


@given(polys, j_polys)
def test_subs_is_composition(p, q):
    r = p.subs({"k": q})
    for jv in range(-2, 3):
        kv = q.evaluate({"j": jv})
        assert r.evaluate({"j": jv}) == p.evaluate({"j": jv, "k": kv})
