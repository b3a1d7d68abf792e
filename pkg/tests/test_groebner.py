import random

import pytest
from hypothesis import given, settings, strategies as st

from defect.families import FamilyId, relations, steinberg_conormal_matrix
from defect.groebner import (BudgetExceeded, GroebnerError, budget_scope, buchberger, default_budget, eliminate,
                             ideal_equal, module_groebner, module_normal_form, normal_form, syzygies)
from defect.polyring import GF, QQ, MonomialOrder, Poly, VarTable, parse_poly

VT = VarTable(("x", "y", "z"))


def P(text, vt=VT, dom=QQ):
    return parse_poly(text, vt, dom)


def small_polys(vt=VT, dom=QQ):
    mono = st.tuples(*[st.integers(0, 2) for _ in range(len(vt))])
    return st.dictionaries(mono, st.integers(-3, 3).filter(bool), min_size=1, max_size=3).map(
        lambda d: Poly(vt, d, dom))


def test_principal_ideal_basis_is_monic_generator():
    f = P("3*x^2 - 6*y")
    G = buchberger([f], MonomialOrder.grevlex(3))
    assert G.generators == [f.monic(MonomialOrder.grevlex(3))]


def test_unit_and_zero_ideals():
    G = buchberger([P("x"), P("x + 1")])
    assert G.is_unit_ideal()
    with pytest.raises(GroebnerError):
        buchberger([])


def test_integer_coefficients_rejected():
    from defect.polyring import ZZ
    with pytest.raises(GroebnerError):
        buchberger([Poly(VT, {(1, 0, 0): 2}, ZZ)])


def test_steinberg_relations_reduce_to_zero():
    rs = relations(FamilyId.STEINBERG)
    G = buchberger(rs)
    assert all(normal_form(r, G).is_zero() for r in rs)
    assert ideal_equal(rs, G.generators)


def test_elimination_realizes_intersection_of_principal_ideals():
    vt = VarTable(("t", "x", "y"))
    gens = [parse_poly("t*x", vt), parse_poly("(1 - t)*y", vt)]
    out = eliminate(gens, ["t"])
    assert ideal_equal(out, [parse_poly("x*y", vt)])


def test_koszul_syzygy_of_two_variables():
    S = syzygies([P("x"), P("y")])
    assert S.verify()
    assert S.ncols == 1
    col = S.columns[0]
    assert col[0] * P("x") + col[1] * P("y") == 0
    assert {str(c) for c in col} <= {"y", "-y", "x", "-x"}


@settings(max_examples=20, deadline=None)
@given(st.lists(small_polys(dom=GF(10007)), min_size=3, max_size=3), st.integers(0, 10**6))
def test_syzygies_are_complete_at_a_random_point(gens, seed):
    S = syzygies(gens)
    assert S.verify()
    rng = random.Random(seed)
    p = 10007
    pt = {n: rng.randrange(p) for n in VT.symbols}
    row = [int(g.evaluate(pt)) % p for g in gens]
    if not any(row):
        return
    cols = [[int(c.evaluate(pt)) % p for c in col] for col in S.columns]
    # over a generic point the syzygies span the 2-dimensional kernel of the row
    assert _rank_mod(cols, p) == 2


def _rank_mod(rows, p):
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] % p), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], -1, p)
        for i in range(len(rows)):
            if i != rank and rows[i][c] % p:
                f = rows[i][c] * inv % p
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def test_steinberg_conormal_columns_are_relations_modulo_the_cover():
    rs = relations(FamilyId.STEINBERG)
    cover = buchberger(rs[:3])
    A = steinberg_conormal_matrix()
    for j in range(8):
        combo = sum((A[i][j] * rs[3 + i] for i in range(3)), Poly.zero(rs[0].vt))
        assert cover.contains(combo)


def test_syzygies_of_steinberg_minors_match_conormal_block():
    # the projection of syz(r1..r6) to the r4, r5, r6 slots lies in the span of
    # the 3 x 8 block plus (r1, r2, r3) times the free module
    rs = relations(FamilyId.STEINBERG)
    vt = rs[0].vt
    zero = Poly.zero(vt)
    S = syzygies(rs)
    A = steinberg_conormal_matrix()
    gens = [[A[i][j] for i in range(3)] for j in range(8)]
    for k in range(3):
        for r in rs[:3]:
            v = [zero] * 3
            v[k] = r
            gens.append(v)
    M = module_groebner(gens)
    for col in S.columns:
        rem = module_normal_form(col[3:], M)
        assert all(x.is_zero() for x in rem)


@settings(max_examples=25, deadline=None)
@given(st.lists(small_polys(dom=GF(7)), min_size=2, max_size=4), st.randoms(use_true_random=False))
def test_reduced_basis_is_canonical_under_shuffles(gens, rnd):
    order = MonomialOrder.grevlex(3)
    G1 = buchberger(gens, order)
    shuffled = list(gens)
    rnd.shuffle(shuffled)
    G2 = buchberger(shuffled + [gens[0] * P("x", dom=GF(7))], order)
    assert G1.generators == G2.generators


@settings(max_examples=25, deadline=None)
@given(st.lists(small_polys(dom=GF(5)), min_size=1, max_size=3),
       st.lists(small_polys(dom=GF(5)), min_size=1, max_size=3))
def test_ideal_equality_is_reflexive_and_symmetric(a, b):
    assert ideal_equal(a, a)
    assert ideal_equal(a, b) == ideal_equal(b, a)
    assert ideal_equal(a, a + b) == buchberger(a).contains_ideal(b)


def test_tiny_budget_raises():
    rs = relations(FamilyId.PHI_UNIPOTENT)
    with pytest.raises(BudgetExceeded):
        buchberger(rs, budget=10)


def test_budget_scope_overrides_default(monkeypatch):
    monkeypatch.setenv("DEFECT_BUDGET", "1234")
    assert default_budget() == 1234
    with budget_scope(99):
        assert default_budget() == 99
    assert default_budget() == 1234
