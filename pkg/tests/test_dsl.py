import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from whitehead_calc.affine import Affine
from whitehead_calc.dsl import parse, to_text, tokenize
from whitehead_calc.errors import ParseError
from whitehead_calc.expr import Bracket, Const, FinSum, Gen, InfSum, IntMul, Neg, grade
from whitehead_calc.poly import Poly


def l(i, label=0, n=2):
    return Gen(Affine.constant(i), label, n)


def test_bracket_of_two_generators():
    assert parse("W(l[1], l[2])") == Bracket(l(1), l(2))


def test_all_ones_sum():
    e = parse("sum_{j>=1}( W(l[j], sum_{k>j}( l[k] )) )")
    assert isinstance(e, InfSum) and e.var == "j"
    assert e.bounds == (Affine.constant(1),)
    inner = e.body.right
    assert isinstance(inner, InfSum) and inner.bounds == (Affine.of("j", 1, 1),)
    assert to_text(e) == "sum_{j>=1}(W(l[j], sum_{k>j}(l[k])))"


def test_odd_even_sum_round_trip():
    s = "W(sum_{j>=1}(l[2j-1]), sum_{j>=1}(l[2j]))"
    e = parse(s)
    assert e.left.body.sub == Affine.of("j", 2, -1)
    assert to_text(e) == s


@pytest.mark.parametrize("s", [
    "l[1]",
    "l[3]:1",
    "0",
    "2*l[1] - l[2]",
    "-W(l[1], l[2])",
    "l[1] + {-3}*l[2]",
    "{j^2 - 2*j + 1}*l[j]",
    "sum_{j>=1}(W(l[j], sum_{k>j+1}(3*l[k])))",
    "sum_{k>=2, k>=j}(l[k])",
    "W(l[1] + l[2], l[3]) - W(l[2], l[3])",
])
def test_canonical_text_is_fixed(s):
    assert to_text(parse(s)) == s


def test_whitespace_and_newlines_are_insignificant():
    assert parse("W(\n  l[1] ,\n\tl[2]\n)") == parse("W(l[1],l[2])")


def test_signed_integer_coefficients():
    assert parse("l[1] + -3*l[2]") == FinSum((l(1), IntMul(Poly.const(-3), l(2))))
    assert parse("-2*l[1]") == Neg(IntMul(Poly.const(2), l(1)))


def test_grade_is_threaded_to_generators():
    assert grade(parse("W(l[1], l[2])", grade_n=4)) == 7
    assert parse("0", grade_n=3) == Const(3)


@pytest.mark.parametrize("text,line,col", [
    ("W(l[1] l[2])", 1, 8),
    ("W(l[1],\n  l[2]", 2, 7),
    ("l[1] +", 1, 7),
    ("sum_{j>=1}(l[j]", 1, 16),
    ("l[1] $ l[2]", 1, 6),
    ("3 + l[1]", 1, 3),
])
def test_parse_errors_carry_positions(text, line, col):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.col) == (line, col)
    assert info.value.expected
    assert info.value.to_json()["line"] == line


def test_parse_error_lists_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse("W(l[1] l[2])")
    assert "','" in info.value.expected


def test_tokens_report_columns():
    toks = tokenize("W(l[10],\n l[2])")
    assert [(t.text, t.line, t.col) for t in toks[:4]] == [("W", 1, 1), ("(", 1, 2), ("l", 1, 3), ("[", 1, 4)]
    assert toks[-2].line == 2


CORPUS = oracle.corpus(200, seed=3) + oracle.corpus(50, seed=4, grade_n=3)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(CORPUS))
def test_parse_print_round_trip(e):
    text = to_text(e)
    back = parse(text, grade_n=e_grade(e))
    assert back == e
    assert to_text(back) == text


def e_grade(e):
    for node in walk(e):
        if isinstance(node, Gen):
            return node.grade
    return 2


def walk(e):
    yield e
    for attr in ("arg", "left", "right", "body"):
        if hasattr(e, attr):
            yield from walk(getattr(e, attr))
    for a in getattr(e, "args", ()):
        yield from walk(a)


def test_to_text_rejects_non_expressions():
    with pytest.raises(TypeError):
        to_text(FinSum((l(1), "x")))
