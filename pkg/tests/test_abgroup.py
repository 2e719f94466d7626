from itertools import product
from math import gcd

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from whitehead_calc.abgroup import (FGAbelianGroup, ProductTensor, TensorElement, finite_wedge_kernel_group,
                                    invariant_factors, matmul, null_witness, smith_normal_form, tensor,
                                    theta_forward, theta_inverse, truncated_W_group)
from whitehead_calc.expr import WedgeSpec

G = FGAbelianGroup.parse


def sympy_factors(m):
    """Nonzero invariant factors from sympy, normalized to positive values."""
    d = sympy_snf(sympy.Matrix(m), domain=sympy.ZZ)
    vals = [abs(int(d[i, i])) for i in range(min(d.shape))]
    return sorted(v for v in vals if v)


def check_witnesses(m):
    snf = smith_normal_form(m)
    assert matmul(matmul(snf.left, snf.diagonal), snf.right) == [list(r) for r in m]
    assert abs(sympy.Matrix(snf.left).det()) == 1
    assert abs(sympy.Matrix(snf.right).det()) == 1
    diag = snf.factors
    nz = [d for d in diag if d]
    assert all(d > 0 for d in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    # the diagonal really is diagonal
    for i, row in enumerate(snf.diagonal):
        for jj, x in enumerate(row):
            assert i == jj or x == 0
    return snf


def test_snf_of_diag_2_3():
    assert check_witnesses([[2, 0], [0, 3]]).factors == [1, 6]
    assert str(FGAbelianGroup(tuple(invariant_factors([[2, 0], [0, 3]])))) == "Z_6"


def test_snf_of_zero_matrix_is_free():
    assert FGAbelianGroup(tuple(invariant_factors([[0, 0], [0, 0]]))) == G("Z^2")


def test_snf_of_upper_triangular_example():
    # gcd of the entries is 2 and the determinant is 4, so the factors are 2, 2
    snf = check_witnesses([[2, 4], [0, 2]])
    assert snf.factors == [2, 2]
    assert sympy_factors([[2, 4], [0, 2]]) == [2, 2]


matrices = st.integers(1, 6).flatmap(lambda r: st.integers(1, 6).flatmap(
    lambda c: st.lists(st.lists(st.integers(-20, 20), min_size=c, max_size=c), min_size=r, max_size=r)))


@settings(max_examples=120, deadline=None)
@given(matrices)
def test_snf_witnesses_and_factors_agree_with_sympy(m):
    snf = check_witnesses(m)
    assert sorted(d for d in snf.factors if d) == sympy_factors(m)


def test_group_parsing_and_printing():
    assert G("Z_2^2 + Z").orders == (2, 2, 0)
    assert str(G("Z_6 + Z_4").canonical()) == "Z_2 + Z_12"
    assert str(G("0")) == "0"
    assert G("Z_4 + Z_6").isomorphic(G("Z_2 + Z_12"))


def tensor_size_by_bilinear_maps(a: int, b: int) -> int:
    """``|Z_a (x) Z_b|`` as the number of bilinear maps into ``Z_L``.

    A bilinear map is fixed by the image ``x`` of ``(1, 1)``; it is well
    defined when ``(i, j) -> i*j*x`` respects both periods.
    """
    big = a * b
    count = 0
    for x in range(big):
        if all((i + a) * jj * x % big == i * jj * x % big and i * (jj + b) * x % big == i * jj * x % big
               for i in range(a) for jj in range(b)):
            count += 1
    return count


@pytest.mark.parametrize("a,b", [(a, b) for a in range(1, 13) for b in range(1, 13) if a <= b])
def test_cyclic_tensor_orders_match_bilinear_classification(a, b):
    t = tensor(FGAbelianGroup((a,)), FGAbelianGroup((b,))).canonical()
    size = t.order()
    assert size == tensor_size_by_bilinear_maps(a, b)


def test_tensor_examples():
    assert tensor(G("Z_4"), G("Z_6")).canonical() == G("Z_2")
    assert tensor(G("Z"), G("Z_3 + Z")).canonical() == G("Z_3 + Z").canonical()
    assert tensor(G("Z_4"), G("Z_6 + Z")).canonical() == G("Z_2 + Z_4")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 12), max_size=3), st.lists(st.integers(0, 12), max_size=3))
def test_tensor_is_symmetric(a, b):
    ga, gb = FGAbelianGroup(tuple(a)), FGAbelianGroup(tuple(b))
    assert tensor(ga, gb).invariant_factors() == tensor(gb, ga).invariant_factors()


def test_theta_forward_example():
    g, hs = G("Z_4"), (G("Z_6"), G("Z"))
    x = ProductTensor(g, hs, (((1,), ((3,), (2,))),))
    comps = theta_forward(x)
    assert comps[0].coords == (((0, 0), 1),)   # 3 mod gcd(4, 6) = 2
    assert comps[1].coords == (((0, 0), 2),)   # 2 in Z_4 (x) Z = Z_4


def test_theta_inverse_example_round_trip():
    g, hs = G("Z_4"), (G("Z_6"), G("Z"))
    comps = (TensorElement(g, hs[0], {(0, 0): 1}), TensorElement(g, hs[1], {(0, 0): 2}))
    back = theta_inverse(comps)
    assert back == ProductTensor(g, hs, (((1,), ((1,), (2,))),))
    assert theta_forward(back) == comps


def test_theta_zero_and_free_cases():
    g, hs = G("Z"), (G("Z_5"), G("Z"))
    assert all(c.is_zero() for c in theta_forward(ProductTensor(g, hs, ())))
    comps = theta_forward(ProductTensor(g, hs, (((3,), ((2,), (4,))),)))
    assert comps[0].get(0, 0) == 1 and comps[1].get(0, 0) == 12


def test_null_witness_certifies_vanishing():
    m, ns, hs = 4, (6, 10, 0), (2, 6, 0)
    w = null_witness(m, ns, hs)
    for n, h, x in zip(ns, hs, w):
        assert (m * x - h) % n == 0 if n else m * x == h


def test_finite_wedge_kernel_groups():
    assert finite_wedge_kernel_group([G("Z")] * 3) == G("Z^3")
    assert finite_wedge_kernel_group([G("Z_2"), G("Z_3")]) == FGAbelianGroup.trivial()
    assert finite_wedge_kernel_group([G("Z_5")]) == FGAbelianGroup.trivial()


def test_truncated_W_groups():
    assert truncated_W_group(WedgeSpec.earring(), 4) == G("Z^6")
    assert truncated_W_group(WedgeSpec.earring(), 2) == G("Z")
    w = WedgeSpec.finite([G("Z_2"), G("Z_4"), G("Z_8")])
    assert truncated_W_group(w, 3) == G("Z_2 + Z_2 + Z_4")


def test_tensor_element_arithmetic():
    g, h = G("Z_4"), G("Z_6 + Z")
    x = TensorElement.simple(g, h, (1,), (1, 1))
    assert x.coords == (((0, 0), 1), ((0, 1), 1))
    assert (x + x).coords == (((0, 1), 2),)
    assert (x - x).is_zero()
    assert x.scale(4).is_zero()


def test_theta_bijective_small_exhaustive():
    g = FGAbelianGroup((4,))
    hs = (FGAbelianGroup((6,)), FGAbelianGroup((3,)))
    images = set()
    for a, b1, b2 in product(range(4), range(6), range(3)):
        x = ProductTensor(g, hs, (((a,), ((b1,), (b2,))),))
        images.add(theta_forward(x))
    expected = 1
    for hj in hs:
        expected *= gcd(4, hj.orders[0])
    assert len(images) == expected
