from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from defect.families import FamilyId, relations, s_sequence, steinberg_conormal_matrix
from defect.idealkit import (IdealError, PositiveDimensional, RingPresentation, colon, fitting_ideal,
                             ideal_contains, ideals_equal, intersect, is_regular_sequence, locally_equal,
                             module_annihilator, socle, span_rank, standard_monomials, staircase_dimension,
                             verify_free_over_subring)
from defect.polyring import GF, QQ, Poly, VarTable, parse_poly, specialize

VT = VarTable(("x", "y", "z"))
ST_RELS = relations(FamilyId.STEINBERG)
ST_VT = ST_RELS[0].vt


def P(text, vt=VT, dom=QQ):
    return parse_poly(text, vt, dom)


monomials = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)).filter(any)
monomial_ideals = st.lists(monomials, min_size=1, max_size=3)


def mono(e):
    return Poly(VT, {e: 1}, QQ)


def in_monomial_ideal(m, gens):
    return any(all(a >= b for a, b in zip(m, g)) for g in gens)


def box(limit=7):
    return product(range(limit), repeat=3)


@settings(max_examples=30, deadline=None)
@given(monomial_ideals, monomial_ideals)
def test_intersection_of_monomial_ideals_matches_lcms(a, b):
    got = intersect([mono(e) for e in a], [mono(e) for e in b])
    lcms = [tuple(max(x, y) for x, y in zip(u, v)) for u in a for v in b]
    assert ideals_equal(got, [mono(e) for e in lcms])
    for m in box():
        assert in_monomial_ideal(m, lcms) == (in_monomial_ideal(m, a) and in_monomial_ideal(m, b))


@settings(max_examples=30, deadline=None)
@given(monomial_ideals, monomial_ideals)
def test_colon_of_monomial_ideals_matches_brute_force(a, b):
    got = colon([mono(e) for e in a], [mono(e) for e in b])
    for m in box(5):
        expected = all(in_monomial_ideal(tuple(x + y for x, y in zip(m, g)), a) for g in b)
        assert ideal_contains(got, [mono(m)]) == expected


def test_colon_by_unit_ideal_is_identity():
    J = [P("x^2 - y"), P("y*z")]
    assert ideals_equal(colon(J, [P("1")]), J)


def test_colon_by_zero_ideal_is_refused():
    with pytest.raises(IdealError):
        colon([P("x")], [Poly.zero(VT)])


def test_steinberg_annihilator_of_i():
    # Ann of I = (r4, r5, r6) in the cover ring (r1, r2, r3)
    col = colon(ST_RELS[:3], ST_RELS[3:6])
    i_prime = [parse_poly(t, ST_VT) for t in ("(q_ + a)*alpha", "(q_ + a)*beta", "c*alpha", "c*beta")]
    assert ideals_equal(col, ST_RELS[:3] + i_prime)


def test_steinberg_fitting_ideal_matches_fifteen_generators():
    F = fitting_ideal(steinberg_conormal_matrix())
    listed = [parse_poly(t, ST_VT) for t in (
        "(q_ + a)^2*beta", "(q_ + a)*b*beta", "(q_ + a)*c*beta", "(q_ + a)*beta^2", "(q_ + a)*beta*gamma",
        "a*c*alpha", "a*c*beta", "b*c*alpha", "b*c*beta", "c^2*alpha", "c^2*beta", "c*alpha*beta",
        "c*alpha*gamma", "c*beta*gamma", "c*beta^2")]
    assert len(listed) == 15
    assert ideals_equal(F + ST_RELS[:3], listed + ST_RELS[:3])


def test_fitting_ideal_of_cyclic_module():
    assert ideals_equal(fitting_ideal([[P("x*y - 3")]]), [P("x*y - 3")])


def test_fitting_ideal_with_too_few_columns_is_zero():
    F = fitting_ideal([[P("x")], [P("y")]])
    assert all(f.is_zero() for f in F)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.lists(st.sampled_from(["0", "x", "y", "x + y", "x^2", "x*y", "y^2 - x", "1"]),
                         min_size=3, max_size=3), min_size=2, max_size=2))
def test_fitting_ideal_lies_in_annihilator(rows):
    vt = VarTable(("x", "y"))
    M = [[parse_poly(t, vt, GF(7)) for t in r] for r in rows]
    F = [f for f in fitting_ideal(M) if not f.is_zero()]
    ann = module_annihilator(M)
    if not F:
        return
    if not ann:
        pytest.fail("nonzero Fitting ideal but zero annihilator")
    assert ideal_contains(ann, F)


def test_standard_monomials_of_dual_numbers():
    A = standard_monomials([P("x^2"), P("y"), P("z")])
    assert A.basis_names() == ["1", "x"]
    assert [str(s) for s in socle(A)] == ["x"]


def test_positive_dimensional_quotient_is_reported():
    with pytest.raises(PositiveDimensional) as info:
        standard_monomials([P("x^2"), P("y")])
    assert info.value.variable == "z"


def test_steinberg_ring_fiber_socle_is_a_alpha_gamma():
    # R^st modulo the first S-sequence, p and the parameters
    vals = {"q_": 0, "s_": 0, "t_": 0}
    gens = [specialize(f, vals).change_domain(GF(5)) for f in ST_RELS + s_sequence(FamilyId.STEINBERG).images]
    A = standard_monomials(gens)
    assert A.dim == 4
    soc = socle(A)
    assert len(soc) == 3
    vt = A.vt
    expected = [parse_poly(t, vt, GF(5)) for t in ("a", "alpha", "gamma")]
    assert span_rank(A, expected) == 3
    assert span_rank(A, expected + soc) == 3


def test_staircase_dimension_of_steinberg_ring():
    dim, free = staircase_dimension(ST_RELS)
    # three relative dimensions plus the three parameters
    assert dim == 6
    assert len(free) == 6


def test_regular_sequence_on_steinberg_cover():
    pres = RingPresentation(ST_VT, ST_RELS[:3], QQ)
    seq = s_sequence(FamilyId.STEINBERG).elements()
    rep = is_regular_sequence(pres, seq, p=5)
    assert rep.regular
    assert "Cohen-Macaulay" in rep.criterion


def test_non_regular_sequence_is_detected():
    pres = RingPresentation(VT, [P("x*y")], QQ)
    rep = is_regular_sequence(pres, [P("x"), P("x")])
    assert not rep.regular


def test_freeness_report_over_prime_fibers():
    pres = RingPresentation(ST_VT, ST_RELS, QQ)
    rep = verify_free_over_subring(pres, s_sequence(FamilyId.STEINBERG), 4, primes=(3, 7))
    assert rep.certified
    assert rep.ranks == {"QQ": 4, "GF(3)": 4, "GF(7)": 4}


def test_local_equality_differs_from_global():
    a = [P("x*(1 + y)")]
    b = [P("x")]
    assert not ideals_equal(a, b)
    assert locally_equal(a, b)
