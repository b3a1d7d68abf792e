import random
from fractions import Fraction

import pytest

from defect.defectcore import wiles_defect
from defect.families import (FamilyId, FamilyInstance, RegimeError, augmentation, ci_cover, cover_relations,
                             cover_variants, expected_defect, presentation, relations, s_sequence,
                             s_sequence_count)
from defect.groebner import buchberger
from defect.idealkit import ideals_equal, intersect, socle, standard_monomials
from defect.polyring import GF, parse_poly, specialize

ST, UN, PHI = FamilyId.STEINBERG, FamilyId.UNIPOTENT, FamilyId.PHI_UNIPOTENT


def random_instances(fam, count, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        p = rng.choice((3, 5, 7))
        q = 1 + p * rng.choice((1, 2, 4, 6, p))
        s = p * rng.choice((0, 1, 2, -1, p))
        t = p * rng.choice((1, 2, -1, p, p * p))
        if fam is PHI and s + t == 0:
            continue
        out.append(FamilyInstance(fam, p, q, s, t))
    return out


def test_family_tags_parse():
    assert FamilyId.parse("st") is ST
    assert FamilyId.parse("phi-uni") is PHI
    assert FamilyId.parse("un") is UN
    with pytest.raises(ValueError):
        FamilyId.parse("gl2")


def test_steinberg_presentation_has_six_relations():
    pres = presentation(ST)
    assert len(pres.relations) == 6
    assert pres.vt.variables == ("a", "b", "c", "alpha", "beta", "gamma")


def test_phi_uni_presentation_starts_with_x_products():
    rs = relations(PHI)
    vt = rs[0].vt
    assert len(rs) == 9
    assert rs[:3] == [parse_poly(t, vt) for t in ("alpha*X", "beta*X", "gamma*X")]


def test_unipotent_presentation_contents():
    rs = relations(UN)
    vt = rs[0].vt
    assert len(rs) == 9
    assert rs[0] == parse_poly("X*gamma", vt)
    assert parse_poly("a^2 + b*c + a*X + q_*a + (q_ + 1)*X", vt) in rs


def test_steinberg_cover_is_first_three_relations():
    assert cover_relations(ST) == relations(ST)[:3]


def test_phi_uni_cover_is_s4_when_s_vanishes():
    cov = ci_cover(PHI, FamilyInstance(PHI, 5, 11, 0, 25))
    assert cov.label == "phi-uni:s4"


def test_unipotent_cover_has_four_relations():
    assert len(cover_relations(UN)) == 4
    assert cover_variants(UN)[0] == "s1..s4"


@pytest.mark.parametrize("fam", list(FamilyId))
def test_s_sequences_land_in_the_augmentation_kernel(fam):
    pt = augmentation(FamilyInstance(fam, 5, 11, 5, 25)).as_dict()
    for k in range(s_sequence_count(fam)):
        for f in s_sequence(fam, k).images:
            assert f.evaluate(pt) == 0


@pytest.mark.parametrize("fam,expected", [(ST, 4), (UN, 5), (PHI, 6)])
def test_ring_fiber_ranks(fam, expected):
    vals = {"q_": 0, "s_": 0, "t_": 0}
    for p in (3, 5, 7):
        gens = [specialize(f, vals).change_domain(GF(p)) for f in relations(fam) + s_sequence(fam).images]
        assert standard_monomials(gens).dim == expected


def test_steinberg_fiber_basis():
    vals = {"q_": 0, "s_": 0, "t_": 0}
    gens = [specialize(f, vals).change_domain(GF(5)) for f in relations(ST) + s_sequence(ST).images]
    A = standard_monomials(gens)
    names = set(A.basis_names())
    # the S-sequence identifies b, c, beta, gamma with combinations of the rest
    assert len(names) == 4 and "1" in names


@pytest.mark.parametrize("fam,socle_dim", [(ST, 3), (UN, 1), (PHI, 1)])
def test_gorenstein_verdicts(fam, socle_dim):
    vals = {"q_": 0, "s_": 0, "t_": 0}
    gens = [specialize(f, vals).change_domain(GF(7)) for f in relations(fam) + s_sequence(fam).images]
    assert len(socle(standard_monomials(gens))) == socle_dim


def test_unipotent_ideal_is_intersection():
    rs = relations(UN)
    vt = rs[0].vt
    st_ideal = [parse_poly(t, vt) for t in ("X",)] + rs[3:]
    unr = rs + [parse_poly(t, vt) for t in ("alpha", "beta", "gamma")]
    assert ideals_equal(intersect(unr, st_ideal), rs)


def test_phi_uni_minimal_primes():
    rs = relations(PHI)
    vt = rs[0].vt
    left = rs + [parse_poly(t, vt) for t in ("alpha", "beta", "gamma")]
    right = rs + [parse_poly("X", vt)]
    assert ideals_equal(intersect(left, right), rs)


def test_augmentation_at_5_11_5_5():
    inst = FamilyInstance(ST, 5, 11, 5, 5)
    assert inst.n == 1
    assert augmentation(inst).as_dict()["beta"] == 5


def test_phi_uni_instance_with_s_zero():
    assert FamilyInstance(PHI, 5, 11, 0, 25).n == 1


@pytest.mark.parametrize("fam", list(FamilyId))
def test_t_zero_is_rejected(fam):
    with pytest.raises(RegimeError):
        FamilyInstance(fam, 5, 11, 5, 0)


@pytest.mark.parametrize("args", [(4, 11, 5, 5), (5, 12, 5, 5), (5, 1, 5, 5), (5, 11, 3, 5)])
def test_invalid_parameters_are_rejected(args):
    with pytest.raises(RegimeError):
        FamilyInstance(ST, *args)


def test_expected_defect_values():
    assert expected_defect(FamilyInstance(ST, 5, 11, 5, 5)).delta == 2
    assert expected_defect(FamilyInstance(UN, 5, 101, 25, 25)).delta == 2
    e = expected_defect(FamilyInstance(PHI, 5, 11, 0, 25))
    assert e.delta == 3 and e.regime_ok


def test_phi_uni_regime_flag_off_when_annihilator_is_small():
    e = expected_defect(FamilyInstance(PHI, 5, 11, 5, 5))
    assert not e.regime_ok
    assert "3n" in e.note


def test_unipotent_defect_at_n_2():
    r = wiles_defect(ci_cover(UN, FamilyInstance(UN, 5, 101, 25, 25)))
    assert r.delta == Fraction(2)


@pytest.mark.parametrize("fam", [ST, UN])
def test_computed_defect_matches_closed_form_on_random_instances(fam):
    for inst in random_instances(fam, 10, seed=404):
        r = wiles_defect(ci_cover(fam, inst))
        e = expected_defect(inst)
        assert (r.c1, r.d1, r.delta) == (e.c1, e.d1, e.delta), inst
        assert r.lambda_ann.valuation == e.ann_valuation, inst


def test_phi_uni_c1_and_annihilator_on_random_instances():
    for inst in random_instances(PHI, 10, seed=404):
        r = wiles_defect(ci_cover(PHI, inst))
        e = expected_defect(inst)
        assert r.c1 == e.c1, inst
        assert r.lambda_ann.valuation == e.ann_valuation, inst
