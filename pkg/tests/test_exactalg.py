from fractions import Fraction
from itertools import combinations

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from defect.exactalg import (ContainmentError, DvrContext, ExactAlgError, Lattice, OIdeal, det,
                             elementary_divisor_valuations, gcd_of_minors, integral_kernel, is_prime,
                             lattice_quotient_length, mat_mul, p_local_echelon, smith_normal_form, verify_snf,
                             vp)


def small_matrices(max_rows=6, max_cols=6, lo=-30, hi=30):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r)))


def test_vp_basics():
    assert vp(0, 5) is None
    assert vp(250, 5) == 3
    assert vp(Fraction(3, 25), 5) == -2
    assert vp(-7, 7) == 1


def test_dvr_context_rejects_even_or_composite():
    with pytest.raises(ExactAlgError):
        DvrContext(2)
    with pytest.raises(ExactAlgError):
        DvrContext(9)
    ctx = DvrContext(5)
    assert ctx.ideal([10, 75, 0]) == OIdeal(1)
    assert ctx.ideal([0, 0]).is_zero


def test_oideal_containment_order():
    assert OIdeal(3) <= OIdeal(1)
    assert not OIdeal(1) <= OIdeal(3)
    assert OIdeal(None) <= OIdeal(0)
    with pytest.raises(ExactAlgError):
        OIdeal(None).length_of_quotient()


def test_snf_of_diagonal_input_is_sorted_divisibility_chain():
    res = smith_normal_form([[6, 0], [0, 4]], check=True)
    assert res.diagonal == (2, 12)


def test_snf_zero_matrix():
    res = smith_normal_form([[0, 0, 0], [0, 0, 0]], check=True)
    assert res.diagonal == (0, 0)
    assert gcd_of_minors([[0, 0], [0, 0]], 1) == 0


def test_gcd_of_minors_on_fixed_3x5_matches_enumeration():
    m = [[2, 4, -6, 8, 10], [3, 0, 9, -3, 1], [5, 7, 11, 13, 17]]
    expected = 0
    for rs in combinations(range(3), 2):
        for cs in combinations(range(5), 2):
            minor = m[rs[0]][cs[0]] * m[rs[1]][cs[1]] - m[rs[0]][cs[1]] * m[rs[1]][cs[0]]
            expected = sympy.igcd(expected, minor)
    assert gcd_of_minors(m, 2) == abs(expected)


@settings(max_examples=60, deadline=None)
@given(small_matrices())
def test_snf_agrees_with_sympy(m):
    ours = [d for d in smith_normal_form(m, check=True).diagonal if d]
    theirs = sympy_snf(sympy.Matrix(m), domain=sympy.ZZ)
    ref = [abs(int(theirs[i, i])) for i in range(min(theirs.shape)) if theirs[i, i] != 0]
    assert ours == ref


@settings(max_examples=60, deadline=None)
@given(small_matrices(lo=-9, hi=9))
def test_snf_prefix_products_equal_minor_gcds(m):
    res = smith_normal_form(m)
    verify_snf(m, res)
    prod = 1
    for i, d in enumerate(res.diagonal, 1):
        prod *= d
        assert prod == gcd_of_minors(m, i)


@settings(max_examples=60, deadline=None)
@given(small_matrices(lo=-40, hi=40), st.sampled_from([3, 5, 7]))
def test_local_elementary_divisors_match_integer_snf(m, p):
    diag = smith_normal_form(m).diagonal
    expected = sorted((vp(d, p) for d in diag), key=lambda x: (x is None, x))
    assert elementary_divisor_valuations(m, p) == expected


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3), min_size=3, max_size=3))
def test_det_agrees_with_sympy(m):
    assert det(m) == sympy.Matrix(m).det()


def test_lattice_quotient_equal_lattices_is_zero():
    L = Lattice.from_rows([[1, 2], [0, 5]])
    assert lattice_quotient_length(L, L, DvrContext(5)) == 0


def test_lattice_quotient_when_both_quotients_vanish():
    # (s, t, q-1) = (5, 5, 10) at p = 5: both factors gcd/t and gcd/(q-1) are units
    g, t, q1 = 5, 5, 10
    big = Lattice.from_rows([[g, 0], [0, g]])
    small = Lattice.from_rows([[t, 0], [0, q1]])
    assert lattice_quotient_length(big, small, DvrContext(5)) == 0


def test_lattice_quotient_with_t_25():
    # s = 0, t = 25, q = 11 at p = 5: (v(t) - 1) + (v(q-1) - 1) = 1
    g, t, q1 = 5, 25, 10
    big = Lattice.from_rows([[g, 0], [0, g]])
    small = Lattice.from_rows([[t, 0], [0, q1]])
    assert lattice_quotient_length(big, small, DvrContext(5)) == 1


def test_lattice_quotient_containment_failure_has_witness():
    big = Lattice.from_rows([[5, 0], [0, 5]])
    small = Lattice.from_rows([[1, 0], [0, 5]])
    with pytest.raises(ContainmentError) as info:
        lattice_quotient_length(big, small, DvrContext(5))
    assert info.value.witness is not None


def test_lattice_quotient_rank_mismatch():
    with pytest.raises(ExactAlgError):
        lattice_quotient_length(Lattice.from_rows([[1, 0], [0, 1]]), Lattice.from_rows([[1, 0]]),
                                DvrContext(3))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=3, max_size=3),
       st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=3, max_size=3))
def test_lattice_length_is_additive_along_chains(a, b):
    if det(a) == 0 or det(b) == 0:
        return
    ctx = DvrContext(3)
    L0 = Lattice.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    L1 = Lattice.from_rows(a)
    L2 = Lattice.from_rows(mat_mul(b, a))
    assert (lattice_quotient_length(L0, L2, ctx)
            == lattice_quotient_length(L0, L1, ctx) + lattice_quotient_length(L1, L2, ctx))


def test_integral_kernel_is_saturated():
    k = integral_kernel([[5, 10, 0]], 5)
    assert len(k) == 2
    for v in k:
        assert 5 * v[0] + 10 * v[1] == 0
        assert min(vp(x, 5) for x in v if x) == 0


def test_p_local_echelon_drops_dependent_rows():
    rows = p_local_echelon([[1, 2], [2, 4], [0, 3]], 3)
    assert len(rows) == 2


@pytest.mark.parametrize("n,expected", [(1, False), (2, True), (9, False), (97, True)])
def test_is_prime(n, expected):
    assert is_prime(n) is expected
