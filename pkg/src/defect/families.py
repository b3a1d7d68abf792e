"""Steinberg, unipotent and phi-unipotent local ring presentations.

Each family is a polynomial ring over Q[q_, s_, t_] modulo explicit relations,
with q entering only through q_ = q - 1.  The augmentation sends
a, c, X, alpha, gamma to 0, b to s and beta to t.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .exactalg import is_prime, vp
from .idealkit import RingPresentation, SubringMap
from .polyring import QQ, AugmentationPoint, Poly, VarTable, parse_poly


class RegimeError(ValueError):
    """Parameters outside the range where the family formulas apply."""


class FamilyId(Enum):
    STEINBERG = "steinberg"
    UNIPOTENT = "unipotent"
    PHI_UNIPOTENT = "phi_unipotent"

    @staticmethod
    def parse(tag: str) -> "FamilyId":
        t = tag.strip().lower().replace("-", "_")
        aliases = {"st": "steinberg", "un": "unipotent", "phi_uni": "phi_unipotent", "fun": "phi_unipotent"}
        t = aliases.get(t, t)
        for f in FamilyId:
            if f.value == t:
                return f
        raise ValueError(f"unknown family {tag!r}; expected st, un or phi-uni")

    @property
    def short(self) -> str:
        return {"steinberg": "st", "unipotent": "un", "phi_unipotent": "phi-uni"}[self.value]


PARAMS = ("q_", "s_", "t_")
_ST_VT = VarTable(("a", "b", "c", "alpha", "beta", "gamma"), PARAMS)
_UN_VT = VarTable(("a", "b", "c", "X", "alpha", "beta", "gamma"), PARAMS)

_RELATIONS = {
    FamilyId.STEINBERG: [
        "alpha^2 + beta*gamma",
        "(q_ + a)*alpha + c*beta",
        "(q_ + a)*a + b*c",
        "(q_ + a)*gamma - c*alpha",
        "a*alpha + b*gamma",
        "a*beta - b*alpha",
    ],
    FamilyId.PHI_UNIPOTENT: [
        "alpha*X",
        "beta*X",
        "gamma*X",
        "a*(q_ + 1) + (a^2 + b*c)*(1 + X) - a*(1 + X)^2",
        "alpha^2 + beta*gamma",
        "alpha*c - gamma*(q_ + a)",
        "alpha*a + gamma*b",
        "beta*c + alpha*(q_ + a)",
        "beta*a - alpha*b",
    ],
    FamilyId.UNIPOTENT: [
        "X*gamma",
        "X*beta",
        "X*alpha",
        "alpha^2 + beta*gamma",
        "b*alpha - a*beta",
        "a*alpha + b*gamma",
        "c*beta - b*gamma + q_*alpha",
        "c*alpha - a*gamma - q_*gamma",
        "a^2 + b*c + a*X + q_*a + (q_ + 1)*X",
    ],
}

# cover relations as combinations of the r_i (1-based indices, coefficient text)
_COVERS: Dict[FamilyId, Dict[str, List[List[Tuple[str, int]]]]] = {
    FamilyId.STEINBERG: {
        "r1,r2,r3": [[("1", 1)], [("1", 2)], [("1", 3)]],
        "r1,r2+r6,r3": [[("1", 1)], [("1", 2), ("1", 6)], [("1", 3)]],
    },
    FamilyId.PHI_UNIPOTENT: {
        # the r2 term enters s4 with a minus sign: with +r2 the top Jacobian
        # minors at lambda are (s - t)t^2(q, s, t), which contradicts the
        # s4 / s4' selection rule on s + t
        "s4": [[("1", 9), ("1", 6)],
               [("1", 8), ("-1", 7), ("1", 2)],
               [("1", 5)],
               [("-1", 2), ("a", 3), ("1", 4), ("a", 6), ("-b", 7), ("-1", 3)]],
        "s4'": [[("1", 9), ("1", 6)],
                [("1", 8), ("-1", 7), ("1", 2)],
                [("1", 5)],
                [("a", 3), ("1", 4), ("a", 6), ("-b", 7), ("-1", 3)]],
    },
    FamilyId.UNIPOTENT: {
        "s1..s4": [[("-1", 1), ("2", 2), ("1", 4), ("-2", 5)],
                   [("1", 7), ("-1", 1)],
                   [("1", 8), ("-1", 1)],
                   [("1", 9), ("-1", 1)]],
        "s1+a*r2,s2..s4": [[("-1", 1), ("2", 2), ("1", 4), ("-2", 5), ("a", 2)],
                           [("1", 7), ("-1", 1)],
                           [("1", 8), ("-1", 1)],
                           [("1", 9), ("-1", 1)]],
    },
}

_S_SEQUENCES = {
    # the y_i must vanish at the augmentation, so the Steinberg images are
    # shifted by their values at lambda
    FamilyId.STEINBERG: [
        ["gamma - beta + t_", "c + b - s_", "beta + b - s_ - t_"],
        ["b - s_", "c - alpha", "beta - t_ - gamma"],
    ],
    FamilyId.PHI_UNIPOTENT: [
        ["b - s_ - c", "beta - t_ - c", "gamma - X"],
        # dX and dgamma vanish on the tangent space at lambda, so gamma - X
        # leaves R_theta singular there; adding alpha restores transversality
        ["b - s_ - c", "beta - t_ - c", "gamma - X + alpha"],
    ],
    FamilyId.UNIPOTENT: [
        ["b - s_ - beta + t_", "a + X - gamma", "b - s_ - c"],
        ["b - s_ - beta + t_", "a + X - gamma + c", "b - s_ - c"],
    ],
}


def _vt(fam: FamilyId) -> VarTable:
    return _ST_VT if fam is FamilyId.STEINBERG else _UN_VT


def relations(fam: FamilyId) -> List[Poly]:
    vt = _vt(fam)
    return [parse_poly(t, vt, QQ) for t in _RELATIONS[fam]]


def presentation(fam: FamilyId) -> RingPresentation:
    """The family ring over Q[q_, s_, t_] with its relations r_1, r_2, ..."""
    regime: Dict[str, object] = {"q_mod_p": 1}
    if fam is FamilyId.UNIPOTENT:
        # the cover below uses 1/2 when solving for the relations
        regime["skip_primes"] = (2,)
    return RingPresentation(_vt(fam), relations(fam), QQ, regime, fam.short)


def cover_variants(fam: FamilyId) -> List[str]:
    return list(_COVERS[fam])


def cover_relations(fam: FamilyId, variant: Optional[str] = None) -> List[Poly]:
    variant = variant or cover_variants(fam)[0]
    try:
        spec = _COVERS[fam][variant]
    except KeyError:
        raise ValueError(f"unknown cover {variant!r} for {fam.short}") from None
    vt = _vt(fam)
    rs = relations(fam)
    out = []
    for combo in spec:
        f = Poly.zero(vt, QQ)
        for coef, idx in combo:
            f = f + parse_poly(coef, vt, QQ) * rs[idx - 1]
        out.append(f)
    return out


def default_variant(fam: FamilyId, inst: Optional["FamilyInstance"] = None) -> str:
    """Cover choice; phi-uni needs s4' exactly when s + t = 0."""
    if fam is FamilyId.PHI_UNIPOTENT and inst is not None and inst.s + inst.t == 0:
        return "s4'"
    return cover_variants(fam)[0]


def ci_cover(fam: FamilyId, inst: Optional["FamilyInstance"] = None, variant: Optional[str] = None,
             theta: int = 0):
    """The family cover as a :class:`~defect.defectcore.CICover`."""
    from .defectcore import CICover
    variant = variant or default_variant(fam, inst)
    point = augmentation(inst) if inst is not None else None
    return CICover(presentation(fam), cover_relations(fam, variant), point,
                   s_sequence(fam, theta), label=f"{fam.short}:{variant}",
                   symbolic_point=symbolic_point(fam))


def s_sequence(fam: FamilyId, which: int = 0) -> SubringMap:
    vt = _vt(fam)
    return SubringMap([parse_poly(t, vt, QQ) for t in _S_SEQUENCES[fam][which]])


def s_sequence_count(fam: FamilyId) -> int:
    return len(_S_SEQUENCES[fam])


def symbolic_point(fam: FamilyId) -> Dict[str, Poly]:
    """The augmentation with s, t, q - 1 kept as the parameters s_, t_, q_."""
    vt = _vt(fam)
    zero = Poly.zero(vt, QQ)
    pt = {v: zero for v in vt.variables}
    pt["b"] = Poly.symbol(vt, "s_", QQ)
    pt["beta"] = Poly.symbol(vt, "t_", QQ)
    return pt


@dataclass(frozen=True)
class FamilyInstance:
    family: FamilyId
    p: int
    q: int
    s: int
    t: int

    def __post_init__(self):
        if not is_prime(self.p) or self.p == 2:
            raise RegimeError(f"p = {self.p} must be an odd prime")
        if (self.q - 1) % self.p:
            raise RegimeError(f"q = {self.q} is not 1 mod {self.p}")
        if self.q == 1:
            raise RegimeError("q - 1 must be nonzero")
        if self.t == 0:
            raise RegimeError("t must be nonzero")
        if self.s % self.p or self.t % self.p:
            raise RegimeError(f"s and t must be divisible by {self.p}")

    @property
    def n(self) -> int:
        from math import gcd
        return vp(gcd(gcd(self.s, self.t), self.q - 1), self.p)

    def v(self, x: int) -> Optional[int]:
        return vp(x, self.p)


def augmentation(inst: FamilyInstance) -> AugmentationPoint:
    """a, c, X, alpha, gamma -> 0, b -> s, beta -> t, q_ -> q - 1."""
    vt = _vt(inst.family)
    vals = {v: 0 for v in vt.variables}
    vals["b"] = inst.s
    vals["beta"] = inst.t
    vals.update(q_=inst.q - 1, s_=inst.s, t_=inst.t)
    pt = AugmentationPoint.make(vals, inst.p)
    for r in relations(inst.family):
        if r.evaluate(pt.as_dict()) != 0:
            raise RegimeError(f"relation {r} does not vanish at the augmentation")
    return pt


@dataclass(frozen=True)
class ExpectedDefect:
    delta: Fraction
    c1: int
    d1: int
    ann_valuation: int
    fitt_valuation: int
    regime_ok: bool
    note: str = ""


def expected_defect(inst: FamilyInstance) -> ExpectedDefect:
    """Closed-form values for the instance, with a flag when they may not apply."""
    n = inst.n
    v = inst.v
    fam = inst.family
    if fam is FamilyId.STEINBERG:
        ann = v(inst.q - 1) + v(inst.t)
        return ExpectedDefect(Fraction(2 * n), n, 3 * n, ann, ann + n, True)
    if fam is FamilyId.UNIPOTENT:
        ann = v(inst.q - 1)
        return ExpectedDefect(Fraction(n), n, 2 * n, ann, ann + n, True)
    variant = default_variant(fam, inst)
    ann = v((inst.s + inst.t) * inst.t) if variant == "s4" else v(inst.s * inst.t)
    ok = ann is not None and ann >= 3 * n
    note = "" if ok else (f"v(lambda(Ann)) = {ann} < 3n = {3 * n}: the closed form for the kernel "
                          "length presupposes a containment that fails here")
    return ExpectedDefect(Fraction(3 * n), 3 * n, 6 * n, ann, ann + 3 * n if ann is not None else None, ok, note)


_ST_CONORMAL = [
    ["0", "beta", "0", "-b", "0", "-alpha", "0", "a"],
    ["beta", "0", "0", "q_ + a", "-alpha", "0", "0", "c"],
    ["-alpha", "0", "q_ + a", "0", "-gamma", "0", "c", "0"],
]


def steinberg_conormal_matrix() -> List[List[Poly]]:
    """3 x 8 matrix whose columns are relations among r4, r5, r6 modulo (r1, r2, r3).

    Evaluated at the augmentation it presents Hom(I/I^2, O) for the Steinberg
    cover, so its determinantal divisors are d_k = gcd of the k x k minors.
    """
    vt = _ST_VT
    return [[parse_poly(x, vt, QQ) for x in row] for row in _ST_CONORMAL]
