from itertools import product

from hypothesis import given, settings
from hypothesis import strategies as st

from whitehead_calc.affine import (Affine, Cong, Eq, Ineq, LinForm, feasible, implied, integer_points,
                                   simplify, var_bounds)

BOX = range(-6, 7)


def brute(cons):
    return [{"j": a, "k": b} for a, b in product(BOX, BOX)
            if all(c.holds({"j": a, "k": b}) for c in cons)]


forms = st.builds(lambda a, b, c: LinForm({"j": a, "k": b}, c),
                  st.integers(-3, 3), st.integers(-3, 3), st.integers(-6, 6))
box = [Ineq(LinForm.var("j") + 6), Ineq(6 - LinForm.var("j")),
       Ineq(LinForm.var("k") + 6), Ineq(6 - LinForm.var("k"))]
constraint = st.one_of(forms.map(Ineq), forms.map(Eq),
                       st.tuples(forms, st.integers(2, 4)).map(lambda t: Cong(*t)))


def test_affine_printing_and_evaluation():
    a = Affine.of("j", 2, -1)
    assert str(a) == "2j-1"
    assert a.evaluate({"j": 3}) == 5
    assert a.shift(2).const == 1
    assert str(Affine.constant(4)) == "4"


@settings(max_examples=150, deadline=None)
@given(st.lists(constraint, min_size=1, max_size=4))
def test_feasibility_is_sound(cons):
    cons = cons + box
    pts = brute(cons)
    if pts:
        assert feasible(cons)
    simp = simplify(cons)
    if simp is None:
        assert not pts
    else:
        assert brute(simp) == pts


@settings(max_examples=150, deadline=None)
@given(st.lists(constraint, min_size=1, max_size=3))
def test_integer_points_are_exact(cons):
    cons = cons + box
    got = sorted((p["j"], p["k"]) for p in integer_points(cons, ["j", "k"]))
    assert got == sorted((p["j"], p["k"]) for p in brute(cons))


@settings(max_examples=150, deadline=None)
@given(st.lists(constraint, min_size=1, max_size=3), forms)
def test_implied_is_sound(cons, target):
    cons = cons + box
    if implied(cons, Ineq(target)):
        assert all(target.evaluate(p) >= 0 for p in brute(cons))


@settings(max_examples=100, deadline=None)
@given(st.lists(constraint, min_size=1, max_size=3))
def test_var_bounds_cover_every_point(cons):
    cons = cons + box
    b = var_bounds(cons, "j")
    pts = brute(cons)
    if b is None:
        assert not pts
        return
    lo, hi = b
    for p in pts:
        assert (lo is None or p["j"] >= lo) and (hi is None or p["j"] <= hi)


def test_var_bounds_keep_the_variable_through_equalities():
    cons = [Eq(LinForm.var("j") - LinForm.var("k") + 1), Ineq(LinForm.var("j") - 1)]
    assert var_bounds(cons, "j") == (1, None)
    assert var_bounds(cons, "k") == (2, None)
