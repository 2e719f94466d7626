import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import corpus
from whitehead_calc.abgroup import FGAbelianGroup
from whitehead_calc.dsl import parse, to_text
from whitehead_calc.errors import (ClusterViolation, ConservativeReject, GradeMismatch, HeterogeneousSchema,
                                   InvalidExpression, OverlapViolation)
from whitehead_calc.expr import (Bracket, Const, FinSum, Gen, WedgeSpec, check_cluster, check_subscripts,
                                 check_wedge_disjoint, gen, grade, is_valid, support, truncate, validate)

P = parse


def test_grades():
    assert grade(gen(3)) == 2
    assert grade(P("W(l[1], l[2])")) == 3
    assert grade(P("sum_{j>=1}(W(l[2j-1], l[2j]))")) == 3
    assert grade(P("W(l[1], l[2])", grade_n=3)) == 5
    assert grade(P("W(W(l[1], l[2]), l[3])")) == 4


def test_grade_mismatch_in_sums():
    with pytest.raises(GradeMismatch):
        grade(FinSum((gen(1), Bracket(gen(2), gen(3)))))


def test_support_examples():
    assert str(support(P("l[1] + l[2]"))) == "{1} u {2}"
    s = support(P("sum_{k>=j+1}(l[k])"))
    assert str(s) == "{k : k>=j+1}"
    assert s.min_at({"j": 4}) == 5
    s = support(P("W(l[j], sum_{k>j}(l[k]))"))
    assert s.min_at({"j": 3}) == 3


def test_support_enumeration_matches_index_oracle():
    e = P("W(l[j], sum_{k>j}(l[k]))")
    for jv in range(1, 5):
        assert support(e).indices({"j": jv}, 8) == set(range(jv, 9))


def test_const_has_empty_support():
    assert not support(Const(2))


def test_cluster_accepts_growing_sums():
    check_cluster(P("sum_{j>=1}(l[j])"))
    check_cluster(P("sum_{j>=1}(W(l[j], sum_{k>j}(l[k])))"))


@pytest.mark.parametrize("text,schema", [
    ("sum_{k>=1}(W(l[1], l[k]))", "{1}"),
    ("sum_{k>=2}(W(l[1], l[k]))", "{1}"),
    ("sum_{j>=1}(l[1])", "{1}"),
])
def test_cluster_rejects_constant_subscripts(text, schema):
    with pytest.raises(ClusterViolation) as info:
        check_cluster(P(text))
    assert info.value.schema == schema


def test_wedge_disjoint_accepts():
    check_wedge_disjoint(P("W(l[1], l[2])"))
    e = P("sum_{j>=1}(W(l[j], sum_{k>j}(l[k])))")
    b = e.body
    check_wedge_disjoint(b, (("j", e.bounds),))


def test_wedge_disjoint_overlap_witness():
    with pytest.raises(OverlapViolation) as info:
        check_wedge_disjoint(P("W(l[1] + l[2], l[2])"))
    assert info.value.index == 2


def test_wedge_disjoint_symbolic_overlap():
    e = P("sum_{j>=1}(W(l[2j], sum_{k>=j}(l[k])))")
    with pytest.raises(OverlapViolation):
        validate(e)


def test_residue_separated_sums_are_disjoint():
    validate(P("W(sum_{j>=1}(l[2j-1]), sum_{j>=1}(l[2j]))"))
    validate(P("W(sum_{j>=1}(l[3j-1]), sum_{j>=1}(l[3j] + l[3j-2]))"))


def test_conservative_rejection_is_flagged_distinctly():
    e = P("W(sum_{j>=1}(l[5j]), sum_{k>=1}(l[7k+1]))")
    # with no search budget the relaxation cannot rule out 5j = 7k + 1
    with pytest.raises(ConservativeReject):
        check_wedge_disjoint(e, window=0)
    with pytest.raises(OverlapViolation) as info:
        check_wedge_disjoint(e)
    assert info.value.index % 5 == 0 and info.value.index % 7 == 1


def test_subscripts_must_be_positive():
    with pytest.raises(InvalidExpression):
        validate(P("sum_{j>=1}(W(l[j-1], sum_{k>j}(l[k])))"))


def test_heterogeneous_wedge_rule():
    w = WedgeSpec((FGAbelianGroup((2,)), FGAbelianGroup((3,))), FGAbelianGroup((0,)), 2)
    check_subscripts(P("W(l[1], sum_{k>=3}(l[k]))"), w)
    with pytest.raises(HeterogeneousSchema):
        check_subscripts(P("W(l[1], sum_{k>=2}(l[k]))"), w)


def test_truncate_examples():
    assert to_text(truncate(P("sum_{j>=1}(l[j])"), 3)) == "l[1] + l[2] + l[3]"
    assert to_text(truncate(P("W(sum_{j>=1}(l[2j-1]), sum_{j>=1}(l[2j]))"), 4)) == "W(l[1] + l[3], l[2] + l[4])"
    assert (to_text(truncate(P("sum_{j>=1}(W(l[j], sum_{k>j}(2*l[k])))"), 3))
            == "W(l[1], 2*l[2] + 2*l[3]) + W(l[2], 2*l[3])")


CORPUS = corpus(120, seed=5)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(CORPUS), st.integers(1, 8))
def test_truncation_support_is_bounded(e, n):
    t = truncate(e, n)
    assert support(t).indices({}, 10 ** 6) <= set(range(1, n + 1))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(CORPUS), st.integers(1, 8))
def test_disjointness_is_monotone_under_truncation(e, n):
    from whitehead_calc.expr import brackets_with_context

    for b, ctx in brackets_with_context(e):
        if not ctx:
            check_wedge_disjoint(Bracket(truncate(b.left, n), truncate(b.right, n)))
    # every bracket instance of the truncation is certified too
    validate(truncate(e, n))


def test_standard_shape_is_valid():
    # sum_j sum_i [f_{j,i}, g_{j,i}] with f at {j} and g above j
    e = P("sum_{j>=1}(W(l[j], sum_{k>j}(l[k])) + W(2*l[j], sum_{k>j+1}(l[k] + l[2k])))")
    validate(e)
    assert is_valid(e)


def test_generators_have_declared_grade():
    assert Gen(parse("l[3]").sub, 0, 4).grade == 4
