"""Wiles defect pipeline.

The main route takes a ring R = P/J with a complete-intersection cover
R~ = P/(s_1..s_m) and an augmentation lambda, passes to the finite flat
models R~_theta and R_theta obtained by adjoining an S-sequence, and then
computes lambda(Ann I), lambda(Fitt I), the length of I (x)_lambda O and the
Jacobian lattice index with O-linear algebra.  Independent routes (Phi and
Psi of a finite O-algebra, Koszul homology, Gorenstein duality, and a
symbolic colon/Fitting computation over Q[q_, s_, t_]) serve as oracles.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from .exactalg import (ContainmentError, DvrContext, Lattice, OIdeal, elementary_divisor_valuations,
                       gcd_of_minors, integral_kernel, lattice_quotient_length, min_valuation,
                       p_local_echelon, p_saturate, rational_rank, solve_rational, transpose, vp)
from .groebner import BudgetExceeded, buchberger, module_groebner, normal_form, syzygies
from .idealkit import (ArtinianQuotient, PositiveDimensional, RingPresentation, SubringMap, ideal_contains,
                       is_regular_sequence, poly_minors, standard_monomials)
from .polyring import GF, QQ, AugmentationPoint, MonomialOrder, Poly, VarTable, jacobian, specialize

Vec = List[Fraction]


class DefectError(ValueError):
    """Invalid input for a defect computation."""


class CoverError(DefectError):
    """The proposed cover is not a smooth complete-intersection cover."""


class ModelError(DefectError):
    """No finite flat local model could be built from the polynomial data."""


class InfiniteLength(DefectError):
    """A module expected to have finite length does not."""


# ---------------------------------------------------------------- finite O-algebras

def _fr(v) -> Tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in v)


@dataclass(frozen=True)
class FiniteOAlgebra:
    """O^n / torsion with multiplication table[i][j] = b_i * b_j."""

    p: int
    table: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    unit: Tuple[Fraction, ...]
    lam: Tuple[Fraction, ...]
    torsion: Tuple[Tuple[Fraction, ...], ...] = ()
    names: Tuple[str, ...] = ()

    @staticmethod
    def make(p: int, table, unit, lam, torsion=(), names=(), check: bool = True) -> "FiniteOAlgebra":
        A = FiniteOAlgebra(p, tuple(tuple(_fr(c) for c in row) for row in table), _fr(unit), _fr(lam),
                           tuple(_fr(t) for t in torsion), tuple(names))
        if check:
            A.validate()
        return A

    @property
    def rank(self) -> int:
        return len(self.unit)

    @property
    def ctx(self) -> DvrContext:
        return DvrContext(self.p)

    def basis_vector(self, i: int) -> Vec:
        v = [Fraction(0)] * self.rank
        v[i] = Fraction(1)
        return v

    def mul(self, x: Sequence, y: Sequence) -> Vec:
        n = self.rank
        out = [Fraction(0)] * n
        for i, xi in enumerate(x):
            if not xi:
                continue
            row = self.table[i]
            for j, yj in enumerate(y):
                if not yj:
                    continue
                c = xi * yj
                for k, t in enumerate(row[j]):
                    if t:
                        out[k] += c * t
        return out

    def mult_matrix(self, x: Sequence) -> List[Vec]:
        """M with M * y = x * y (column j is x * b_j)."""
        cols = [self.mul(x, self.basis_vector(j)) for j in range(self.rank)]
        return [[cols[j][i] for j in range(self.rank)] for i in range(self.rank)]

    def apply_lambda(self, x: Sequence) -> Fraction:
        return sum((Fraction(a) * b for a, b in zip(x, self.lam)), Fraction(0))

    def _is_torsion(self, v: Sequence) -> bool:
        if not any(v):
            return True
        if not self.torsion:
            return False
        return Lattice.from_rows(self.torsion).contains(v, self.p)

    def validate(self) -> None:
        n = self.rank
        p = self.p
        for row in self.table:
            for c in row:
                if any(x and vp(x, p) < 0 for x in c):
                    raise DefectError("structure constants are not p-integral")
        e = [self.basis_vector(i) for i in range(n)]
        for i in range(n):
            if not self._is_torsion([a - b for a, b in zip(self.mul(self.unit, e[i]), e[i])]):
                raise DefectError("the unit element does not act as the identity")
            for j in range(i + 1, n):
                if not self._is_torsion([a - b for a, b in zip(self.table[i][j], self.table[j][i])]):
                    raise DefectError("multiplication is not commutative")
        for i in range(n):
            for j in range(n):
                for k in range(j, n):
                    lhs = self.mul(self.table[i][j], e[k])
                    rhs = self.mul(e[i], self.table[j][k])
                    if not self._is_torsion([a - b for a, b in zip(lhs, rhs)]):
                        raise DefectError("multiplication is not associative")
        if self.apply_lambda(self.unit) != 1:
            raise DefectError("lambda does not send 1 to 1")
        for i in range(n):
            for j in range(i, n):
                if self.apply_lambda(self.table[i][j]) != self.lam[i] * self.lam[j]:
                    raise DefectError("lambda is not multiplicative")
        for t in self.torsion:
            if self.apply_lambda(t) != 0:
                raise DefectError("lambda does not vanish on the torsion relations")
            for i in range(n):
                if not self._is_torsion(self.mul(t, e[i])):
                    raise DefectError("torsion relations do not form an ideal")
        if any(x and vp(x, p) < 0 for x in self.lam):
            raise DefectError("lambda is not integral")

    def kernel_lambda(self) -> List[Vec]:
        """Spanning set of ker(lambda): b_i - lambda(b_i) * 1."""
        return [[(1 if k == i else 0) - self.lam[i] * self.unit[k] for k in range(self.rank)]
                for i in range(self.rank)]

    def ideal_span(self, gens: Sequence[Sequence]) -> List[Vec]:
        """O-spanning set of the ideal generated by ``gens``."""
        return [self.mul(g, self.basis_vector(i)) for g in gens for i in range(self.rank)]

    def tensor(self, other: "FiniteOAlgebra") -> "FiniteOAlgebra":
        if self.p != other.p:
            raise DefectError("tensor product over different primes")
        n, m = self.rank, other.rank

        def kron(x, y):
            return [a * b for a in x for b in y]

        table = [[kron(self.table[i][k], other.table[j][l]) for k in range(n) for l in range(m)]
                 for i in range(n) for j in range(m)]
        unit = kron(self.unit, other.unit)
        lam = kron(self.lam, other.lam)
        tors = [kron(t, other.basis_vector(j)) for t in self.torsion for j in range(m)]
        tors += [kron(self.basis_vector(i), t) for i in range(n) for t in other.torsion]
        names = ()
        if self.names and other.names:
            names = tuple(f"{a}*{b}" for a in self.names for b in other.names)
        return FiniteOAlgebra.make(self.p, table, unit, lam, tors, names, check=False)

    def quotient(self, gens: Sequence[Sequence]) -> "FiniteOAlgebra":
        """B / (gens), recorded as extra torsion relations."""
        rel = [list(t) for t in self.torsion] + self.ideal_span(gens)
        rel = p_local_echelon(rel, self.p) if rel else []
        return FiniteOAlgebra.make(self.p, self.table, self.unit, self.lam, rel, self.names, check=False)

    def torsion_free(self) -> "FiniteOAlgebra":
        """Quotient by the p-saturation of the torsion relations, on a fresh basis."""
        if not self.torsion:
            return self
        n = self.rank
        sat = p_saturate([list(t) for t in self.torsion], self.p)
        if not sat:
            return FiniteOAlgebra.make(self.p, self.table, self.unit, self.lam, (), self.names, check=False)
        # Y: rows spanning the annihilator of sat; x -> Y x is onto O^(n-r)
        Y = integral_kernel(sat, self.p, n)
        cols = _unit_minor_columns(Y, self.p)
        YJ = [[row[c] for c in cols] for row in Y]

        def proj(v):
            w = [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in Y]
            sol = solve_rational(transpose(YJ), [w])
            return sol[0]

        table = [[proj(self.table[a][b]) for b in cols] for a in cols]
        names = tuple(self.names[c] for c in cols) if self.names else ()
        return FiniteOAlgebra.make(self.p, table, proj(self.unit), [self.lam[c] for c in cols], (), names,
                                   check=False)

    @staticmethod
    def from_generators(points: Sequence[Sequence[int]], p: int) -> "FiniteOAlgebra":
        """The O-subalgebra of O^r generated by the given vectors (coordinatewise product).

        lambda is the first coordinate.
        """
        r = len(points[0])
        one = [1] * r
        span = [one]
        frontier = [one]
        for _ in range(r):
            new = []
            for v in frontier:
                for x in points:
                    new.append([a * b for a, b in zip(v, x)])
            span += new
            frontier = new
        basis = p_local_echelon(span, p)
        prod = lambda u, v: [a * b for a, b in zip(u, v)]

        def coords(v):
            sol = solve_rational(basis, [v])
            if sol is None:
                raise DefectError("vector outside the subalgebra")
            return sol[0]

        table = [[coords(prod(u, v)) for v in basis] for u in basis]
        return FiniteOAlgebra.make(p, table, coords(one), [b[0] for b in basis], check=False)

    @staticmethod
    def monogenic(charpoly: Sequence[int], p: int, name: str = "x") -> "FiniteOAlgebra":
        """O[x]/(f) for monic f = x^d + c_{d-1} x^{d-1} + ... + c_0 (list c_0..c_{d-1}); lambda(x) = 0."""
        d = len(charpoly)
        if charpoly[0] != 0:
            raise DefectError("lambda(x) = 0 needs f(0) = 0")
        powers = []
        for k in range(2 * d - 1):
            if k < d:
                v = [Fraction(0)] * d
                v[k] = Fraction(1)
            else:
                prev = powers[k - 1]
                top = prev[d - 1]
                v = [Fraction(0)] + prev[:d - 1]
                v = [a - top * c for a, c in zip(v, charpoly)]
            powers.append(v)
        table = [[powers[i + j] for j in range(d)] for i in range(d)]
        unit = powers[0]
        lam = [1] + [0] * (d - 1)
        names = ["1"] + [name if k == 1 else f"{name}^{k}" for k in range(1, d)]
        return FiniteOAlgebra.make(p, table, unit, lam, (), names, check=False)


def _unit_minor_columns(Y: List[Vec], p: int) -> List[int]:
    """Columns of Y forming a square block invertible mod p."""
    rows = []
    for r in Y:
        den = 1
        for x in r:
            den = den * x.denominator // gcd(den, x.denominator)
        rows.append([int(x * den) % p for x in r])
    n = len(Y[0])
    a = [list(r) for r in rows]
    cols = []
    ri = 0
    for c in range(n):
        sel = next((k for k in range(ri, len(a)) if a[k][c] % p), None)
        if sel is None:
            continue
        a[ri], a[sel] = a[sel], a[ri]
        inv = pow(a[ri][c], -1, p)
        a[ri] = [(x * inv) % p for x in a[ri]]
        for k in range(len(a)):
            if k != ri and a[k][c]:
                f = a[k][c]
                a[k] = [(x - f * y) % p for x, y in zip(a[k], a[ri])]
        cols.append(c)
        ri += 1
        if ri == len(a):
            break
    if len(cols) != len(Y):
        raise DefectError("rows are not saturated")
    return cols


# ---------------------------------------------------------------- Phi, Psi, c0

def _lattice_length(big: List[Vec], small: List[Vec], ctx: DvrContext, what: str) -> int:
    B = Lattice.from_rows(big)
    S = Lattice.from_rows(small, B.n)
    if B.rank() != S.rank():
        raise InfiniteLength(f"{what} has infinite length")
    return lattice_quotient_length(B, S, ctx)


def phi_length(B: FiniteOAlgebra) -> int:
    """Length of ker(lambda) / ker(lambda)^2."""
    K = B.kernel_lambda()
    tors = [list(t) for t in B.torsion]
    K2 = [B.mul(x, y) for i, x in enumerate(K) for y in K[i:]]
    nonzero = [v for v in K + tors if any(v)]
    if not nonzero:
        return 0
    return _lattice_length(nonzero, [v for v in K2 + tors if any(v)] or [[0] * B.rank], B.ctx,
                           "the cotangent module")


def _annihilator(B: FiniteOAlgebra, gens: Sequence[Sequence]) -> List[Vec]:
    """Saturated O-basis of {x : x * g = 0 for all g} in a torsion-free algebra."""
    rows: List[Vec] = []
    for g in gens:
        if any(g):
            rows.extend(B.mult_matrix(g))
    if not rows:
        return [B.basis_vector(i) for i in range(B.rank)]
    return integral_kernel(rows, B.p, B.rank)


def lambda_of_annihilator(B: FiniteOAlgebra, gens: Sequence[Sequence]) -> OIdeal:
    ann = _annihilator(B, gens)
    return OIdeal(min_valuation([B.apply_lambda(x) for x in ann], B.p))


def psi_length(B: FiniteOAlgebra) -> int:
    """Length of O / lambda(Ann_{B^tf}(ker lambda))."""
    C = B.torsion_free()
    ideal = lambda_of_annihilator(C, C.kernel_lambda())
    if ideal.is_zero:
        raise InfiniteLength("lambda vanishes on the annihilator of ker(lambda)")
    return ideal.valuation


def c0(B: FiniteOAlgebra) -> int:
    """Congruence length computed on the torsion-free quotient."""
    return psi_length(B.torsion_free())


# ---------------------------------------------------------------- dimension-one models

@dataclass
class DimOneModel:
    """A CI O-algebra A~ (finite flat), an ideal I and Jacobian rows at lambda."""

    cover: FiniteOAlgebra
    ideal: List[Vec]
    jac_cover: List[List[int]]
    jac_full: List[List[int]]
    target: Optional[FiniteOAlgebra] = None
    label: str = ""
    notes: List[str] = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.cover.p

    def target_algebra(self) -> FiniteOAlgebra:
        if self.target is None:
            self.target = self.cover.quotient(self.ideal)
        return self.target

    def tensor(self, other: "DimOneModel") -> "DimOneModel":
        A = self.cover.tensor(other.cover)
        one1, one2 = list(self.cover.unit), list(other.cover.unit)
        ideal = [[a * b for a in g for b in one2] for g in self.ideal]
        ideal += [[a * b for a in one1 for b in h] for h in other.ideal]
        n1 = len(self.jac_cover[0]) if self.jac_cover else 0
        n2 = len(other.jac_cover[0]) if other.jac_cover else 0

        def blocks(r1, r2):
            return [list(r) + [0] * n2 for r in r1] + [[0] * n1 + list(r) for r in r2]

        T = None
        if self.target is not None and other.target is not None:
            T = self.target.tensor(other.target)
        return DimOneModel(A, ideal, blocks(self.jac_cover, other.jac_cover),
                           blocks(self.jac_full, other.jac_full), T,
                           f"({self.label})x({other.label})")


@dataclass
class DefectReport:
    """All invariants of one computation; lengths are O-lengths (e = 1)."""

    lambda_ann: OIdeal
    lambda_fitt: OIdeal
    c1: int
    hom_I_length: int
    lattice_kernel_length: int
    d1: int
    delta: Fraction
    elementary_divisors: List[Optional[int]] = field(default_factory=list)
    hom_I_length_lattice: Optional[int] = None
    provenance: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        def ideal(I):
            return None if I.is_zero else I.valuation
        d = {
            "lambda_ann_valuation": ideal(self.lambda_ann),
            "lambda_fitt_valuation": ideal(self.lambda_fitt),
            "c1": self.c1,
            "hom_I_length": self.hom_I_length,
            "hom_I_length_lattice": self.hom_I_length_lattice,
            "lattice_kernel_length": self.lattice_kernel_length,
            "d1": self.d1,
            "delta": str(self.delta),
            "elementary_divisor_valuations": list(self.elementary_divisors),
            "provenance": {k: self.provenance[k] for k in sorted(self.provenance)},
        }
        return d

    def same_invariants(self, other: "DefectReport") -> bool:
        """c1, D1 and delta agree; lambda(Ann) and the Hom length depend on the cover."""
        return (self.c1, self.d1, self.delta) == (other.c1, other.d1, other.delta)


def minimal_ideal_generators(A: FiniteOAlgebra, gens: Sequence[Sequence]) -> List[Vec]:
    """A subset of ``gens`` whose images span I / m I (m = ker lambda + p)."""
    gens = [list(g) for g in gens if any(g)]
    if not gens:
        return []
    p = A.p
    I_rows = A.ideal_span(gens)
    mI = [A.mul(k, v) for k in A.kernel_lambda() for v in gens] + [[p * x for x in v] for v in I_rows]
    chosen: List[Vec] = []
    span = p_local_echelon([v for v in mI if any(v)], p)
    for g in gens:
        spanned = span + A.ideal_span(chosen)
        if spanned and Lattice.from_rows(spanned).contains(g, p):
            continue
        chosen.append(g)
    return chosen


def dim_one_invariants(model: DimOneModel, cross_check: bool = True) -> DefectReport:
    """c1, D1 and delta of a dimension-one model."""
    A = model.cover
    p = A.p
    ctx = A.ctx
    gens = minimal_ideal_generators(A, model.ideal)
    n = A.rank
    if not gens:
        zero_rows_ok = not model.jac_full or not model.jac_cover or \
            rational_rank(model.jac_full) == rational_rank(model.jac_cover)
        kern = 0
        if model.jac_full and zero_rows_ok and rational_rank(model.jac_cover):
            kern = _lattice_length(model.jac_full, model.jac_cover, ctx, "the Jacobian lattice quotient")
        return DefectReport(OIdeal(0), OIdeal(0), 0, 0, kern, -kern, Fraction(-kern), [],
                            0, {"model": model.label, "ideal_generators": 0})
    # lambda(Ann I)
    ann = lambda_of_annihilator(A, gens)
    if ann.is_zero:
        raise InfiniteLength("lambda vanishes on Ann(I): lambda is not smooth on the cover")
    # I (x)_lambda O through the lattice I / ker(lambda) I
    I_rows = A.ideal_span(gens)
    kI = [A.mul(k, g) for k in A.kernel_lambda() for g in gens]
    hom_lattice = _lattice_length(I_rows, [v for v in kI if any(v)] or [[0] * n], ctx, "I (x) O")
    divisors: List[Optional[int]] = []
    hom_snf = None
    if cross_check:
        # presentation: O^(n k) -> A, (i, j) -> b_i g_j; kernel = syzygies over A
        cols = [A.mul(A.basis_vector(i), g) for g in gens for i in range(n)]
        M = [[cols[c][r] for c in range(len(cols))] for r in range(n)]
        syz = integral_kernel(M, p, len(cols))
        k = len(gens)
        lam_rows = [[sum((z[j * n + i] * A.lam[i] for i in range(n)), Fraction(0)) for j in range(k)]
                    for z in syz]
        lam_mat = transpose(lam_rows) if lam_rows else [[0] for _ in range(k)]
        divisors = elementary_divisor_valuations(lam_mat, p)
        if any(d is None for d in divisors) or len(divisors) < k:
            raise InfiniteLength("lambda(Fitt(I)) is zero")
        hom_snf = sum(divisors)
        if hom_snf != hom_lattice:
            raise DefectError(f"length of I (x) O disagrees: {hom_snf} by elementary divisors, "
                              f"{hom_lattice} by lattices")
    fitt = OIdeal(hom_lattice)
    c1 = fitt.valuation - ann.valuation
    if c1 < 0:
        raise DefectError("v(lambda Fitt) < v(lambda Ann) contradicts Fitt inside Ann")
    try:
        kern = _lattice_length(model.jac_full, model.jac_cover, ctx, "the Jacobian lattice quotient")
    except ContainmentError as exc:
        raise DefectError(f"Jacobian lattice of the cover is not inside that of the ring: witness {exc.witness}")
    d1 = hom_lattice - kern
    prov = {"model": model.label, "ideal_generators": len(gens), "cover_rank": n}
    if model.target is not None:
        prov["target_rank"] = model.target.rank
    return DefectReport(ann, fitt, c1, hom_snf if hom_snf is not None else hom_lattice, kern, d1,
                        Fraction(d1 - c1), divisors, hom_lattice, prov)


# ---------------------------------------------------------------- CI covers of presented rings

@dataclass
class CICover:
    """A complete-intersection cover P/(relations) of parent = P/J at an augmentation."""

    parent: RingPresentation
    relations: List[Poly]
    point: Optional[AugmentationPoint] = None
    theta: Optional[SubringMap] = None
    label: str = ""
    symbolic_point: Optional[Dict[str, Poly]] = None

    def with_point(self, point: AugmentationPoint) -> "CICover":
        return replace(self, point=point)

    def with_theta(self, theta: SubringMap) -> "CICover":
        return replace(self, theta=theta)

    @property
    def vt(self) -> VarTable:
        return self.parent.vt

    def _need_point(self) -> AugmentationPoint:
        if self.point is None:
            raise DefectError("the cover has no augmentation point")
        return self.point

    def specialized(self, polys: Sequence[Poly]) -> List[Poly]:
        pt = self._need_point()
        vals = pt.param_values(self.vt)
        missing = [s for s in self.vt.params if s not in vals]
        if missing:
            raise DefectError(f"augmentation does not assign {', '.join(missing)}")
        out_vt = VarTable(self.vt.variables, ())
        return [specialize(f, vals, out_vt).change_domain(QQ) for f in polys]


@dataclass
class CoverValidation:
    member: bool
    regular: bool
    flat_fibers: Dict[str, int]
    minors_gcd: int
    minors_valuation: Optional[int]
    regularity_note: str = ""

    @property
    def smooth(self) -> bool:
        return self.minors_valuation is not None

    @property
    def ok(self) -> bool:
        return self.member and self.regular and self.smooth


def jacobian_at(polys: Sequence[Poly], names: Sequence[str], point: AugmentationPoint) -> List[List[int]]:
    vals = point.as_dict()
    out = []
    for row in jacobian(list(polys), list(names)):
        r = []
        for f in row:
            v = Fraction(f.evaluate(vals))
            if v.denominator != 1:
                if vp(v, point.p) < 0:
                    raise DefectError("Jacobian entry is not p-integral at the augmentation")
            r.append(v)
        out.append(r)
    return out


def check_ci_cover(cover: CICover, raise_on_error: bool = True, budget: Optional[int] = None) -> CoverValidation:
    """Membership, regularity of (cover, theta, p) and smoothness at lambda."""
    pt = cover._need_point()
    p = pt.p
    vt = cover.vt
    parent_gb = buchberger(cover.parent.relations, MonomialOrder.block(vt), budget=budget)
    member = all(parent_gb.contains(f) for f in cover.relations)
    for f in list(cover.parent.relations) + list(cover.relations):
        if f.evaluate(pt.as_dict()) != 0:
            raise DefectError(f"{f} does not vanish at the augmentation")
    theta = cover.theta or find_theta(cover, budget=budget)
    sc = cover.specialized(cover.relations)
    st = cover.specialized(theta.images)
    regular = False
    fibers: Dict[str, int] = {}
    note = ""
    try:
        rep = is_regular_sequence(RingPresentation(sc[0].vt, []), sc + st, p, budget)
        fibers = rep.fiber_dims
        regular = rep.regular and len(set(fibers.values())) == 1 and len(fibers) == 2
        note = rep.criterion
        if len(sc) + len(st) != vt.nvars:
            regular = False
            note = "the cover and S-sequence do not form a system of parameters"
    except PositiveDimensional as exc:
        note = str(exc)
    J = jacobian_at(cover.relations, vt.variables, pt)
    m = len(cover.relations)
    g = gcd_of_minors(J, m) if m <= len(vt.variables) else 0
    res = CoverValidation(member, regular, fibers, g, vp(g, p) if g else None, note)
    if raise_on_error:
        if not member:
            raise CoverError("cover relations are not in the ideal of the ring")
        if not regular:
            raise CoverError(f"cover relations with the S-sequence and p are not a regular sequence ({note})")
        if not res.smooth:
            raise CoverError("the top Jacobian minors of the cover vanish at lambda")
    return res


def find_theta(cover: CICover, tries: int = 40, seed: int = 0, budget: Optional[int] = None) -> SubringMap:
    """Search for y_i = integer linear forms in (x - lambda(x)) giving a finite flat local model."""
    pt = cover._need_point()
    vt = cover.vt
    vals = pt.as_dict()
    d = vt.nvars - len(cover.relations)
    if d < 0:
        raise CoverError("more cover relations than variables")
    if d == 0:
        return SubringMap([], include_params=True)
    rng = random.Random(seed)
    shifted = [Poly.symbol(vt, x, QQ) - vals.get(x, 0) for x in vt.variables]
    for attempt in range(tries):
        ys = []
        for _ in range(d):
            coeffs = [rng.choice((0, 0, 1, -1, 2)) for _ in shifted]
            if not any(coeffs):
                coeffs[rng.randrange(len(coeffs))] = 1
            f = Poly.zero(vt, QQ)
            for c, s in zip(coeffs, shifted):
                if c:
                    f = f + s * c
            ys.append(f)
        theta = SubringMap(ys)
        try:
            local_model(cover.specialized(list(cover.relations) + ys), pt, budget=budget)
            return theta
        except (ModelError, PositiveDimensional):
            continue
    raise CoverError("no S-sequence found for the cover")


# ---------------------------------------------------------------- polynomial models

@dataclass
class LocalModel:
    algebra: FiniteOAlgebra
    gens: List[Poly]
    basis: List[str]
    global_rank: int
    note: str = ""
    quotient: Optional[ArtinianQuotient] = None
    change: Optional[List[List[Fraction]]] = None   # rows: basis in monomial coordinates

    def coords(self, f: Poly) -> List[Fraction]:
        """Coordinates of a polynomial in the O-basis of the model."""
        v = [Fraction(x) for x in self.quotient.coords(f)]
        if self.change is None:
            return v
        return solve_rational(self.change, [v])[0]


def _p_integral_gb(G, p: int) -> bool:
    for g in G.generators:
        for c in g.terms.values():
            if c and vp(c, p) < 0:
                return False
    return True


def _validated_quotient(gens: List[Poly], p: int, budget=None):
    """Q-quotient whose standard monomials also form an F_p basis (flatness)."""
    AQ = standard_monomials(gens, budget=budget)
    if not _p_integral_gb(AQ.gb, p):
        raise ModelError("Groebner basis over Q has denominators divisible by p")
    AF = standard_monomials([g.change_domain(GF(p)) for g in gens], budget=budget)
    if AF.basis != AQ.basis:
        raise ModelError(f"fiber dimensions differ: {AQ.dim} over Q, {AF.dim} over GF({p})")
    return AQ, AF


def _is_local(AF) -> bool:
    vt = AF.vt
    for x in vt.variables:
        xp = Poly.symbol(vt, x, AF.domain) ** max(AF.dim, 1)
        if not normal_form(xp, AF.gb).is_zero():
            return False
    return True


def _origin_dimension(gens: List[Poly], p: int, N: int, budget=None) -> int:
    vt = gens[0].vt
    extra = [Poly.symbol(vt, x, GF(p)) ** N for x in vt.variables]
    return standard_monomials([g.change_domain(GF(p)) for g in gens] + extra, budget=budget).dim


def _charpoly_factors(M: List[List[Fraction]]):
    import sympy
    T = sympy.Symbol("T")
    cp = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in M]).charpoly(T)
    _, facs = sympy.factor_list(cp.as_expr(), T)
    out = []
    for f, e in facs:
        P = sympy.Poly(f, T)
        lc = P.LC()
        coeffs = [Fraction(int(sympy.fraction(c / lc)[0]), int(sympy.fraction(c / lc)[1]))
                  for c in P.all_coeffs()]
        out.append((coeffs, e))   # coefficients from the leading term down
    return out


def _origin_root_count(coeffs: List[Fraction], p: int) -> int:
    """Number of roots in pZ_p of a monic polynomial (coefficients leading first).

    Read off the Newton polygon: it is the first index, counted from the
    constant term, at which the minimal coefficient valuation is reached.
    """
    low = list(reversed(coeffs))          # c_0, c_1, ..., c_d = 1
    vals = [vp(c, p) if c != 0 else None for c in low]
    m = min(v for v in vals if v is not None)
    for i, v in enumerate(vals):
        if v == m:
            return i
    return len(low) - 1


def _split_origin(gens: List[Poly], AQ, point: AugmentationPoint, n0: int, budget=None):
    """Adjoin m0(l) for a linear form l whose small-root factor has degree n0."""
    p = point.p
    vt = gens[0].vt
    vals = point.as_dict()
    forms = [Poly.symbol(vt, x, QQ) - vals.get(x, 0) for x in vt.variables]
    forms += [a + b for a, b in combinations(forms, 2)] + [a - b for a, b in combinations(forms, 2)]
    for ell in forms:
        M = [[Fraction(x) for x in r] for r in AQ.mult_matrix(ell)]
        small = []
        ok = True
        for coeffs, e in _charpoly_factors(M):
            k = _origin_root_count(coeffs, p)
            if k == len(coeffs) - 1:
                small.append((coeffs, e))
            elif k:
                ok = False
                break
        if not ok or sum((len(c) - 1) * e for c, e in small) != n0:
            continue
        m0 = Poly.const(vt, 1, QQ)
        for coeffs, e in small:
            f = Poly.zero(vt, QQ)
            for c in coeffs:
                f = f * ell + c
            m0 = m0 * f ** e
        try:
            AQ2, AF2 = _validated_quotient(list(gens) + [m0], p, budget)
        except (ModelError, PositiveDimensional):
            continue
        if AQ2.dim == n0 and _is_local(AF2):
            return list(gens) + [m0], AQ2, ell
    return None


def _monomial_lattice(AQ, p: int, max_rounds: int):
    """Z_(p)-span of all monomials inside the Q-quotient, or None if it does not stabilise."""
    vt = AQ.vt
    xs = [Poly.symbol(vt, x, QQ) for x in vt.variables]
    rows = p_local_echelon([AQ.coords(Poly.const(vt, 1, QQ))], p)
    for _ in range(max_rounds):
        cand = list(rows)
        for r in rows:
            f = AQ.element(r)
            cand += [AQ.coords(f * x) for x in xs]
        new = p_local_echelon(cand, p)
        old = Lattice.from_rows(rows)
        if len(new) == len(rows) and all(old.contains(r, p) for r in new):
            return rows
        rows = new
    return None


def local_model(gens: List[Poly], point: AugmentationPoint, budget=None) -> LocalModel:
    """Finite flat model at the origin of P/(gens) over Z_(p), with lambda from ``point``.

    When the polynomial quotient has points away from the origin mod p, or
    points that are not p-integral, the origin factor is split off with the
    minimal polynomial of a linear form whose Q-irreducible factors have all
    roots in pZ_p or none there.  If no such form exists but the global
    quotient is flat, it is kept whole; every invariant read off through
    lambda is unchanged by the factors away from the origin.
    """
    p = point.p
    AQ = standard_monomials(gens, budget=budget)
    global_rank = AQ.dim
    flat_error = None
    try:
        AQ, AF = _validated_quotient(gens, p, budget)
    except ModelError as exc:
        flat_error = exc
    note = ""
    if flat_error is not None or not _is_local(AF):
        n0 = _origin_dimension(gens, p, max(global_rank, 1), budget)
        found = _split_origin(gens, AQ, point, n0, budget)
        if found is not None:
            gens, AQ, ell = found
            note = (f"polynomial quotient has rank {global_rank}; split off the origin factor "
                    f"of rank {n0} using {ell}")
        elif flat_error is not None:
            # the standard monomials are not an O-basis; use the lattice the
            # monomials span, which is flat when its rank matches the F_p fiber
            rows = _monomial_lattice(AQ, p, 4 * global_rank + 4)
            fp_dim = _fiber_dimension(gens, p, budget)
            if rows is None or len(rows) != global_rank or fp_dim != global_rank or n0 != global_rank:
                raise ModelError(f"{flat_error}, and no rational origin factor was found")
            return _lattice_local_model(AQ, rows, point, gens, global_rank,
                                        "standard monomials are not an O-basis; using the monomial lattice")
        else:
            # Over Z_p the quotient splits as A_0 x A' with lambda factoring
            # through A_0.  The unit of A' lies in ker(lambda)^2 and in
            # ker(lambda) I, and lambda kills A', so every length and
            # lambda-valuation computed below is unchanged by keeping A'.
            note = (f"polynomial quotient has rank {global_rank} with points away from the origin; "
                    f"kept whole (origin factor rank {n0})")
    vals = point.as_dict()
    basis = AQ.basis_polys()
    table = [[AQ.coords(bi * bj) for bj in basis] for bi in basis]
    unit = AQ.coords(Poly.const(AQ.vt, 1, QQ))
    lam = [b.evaluate(vals) for b in basis]
    alg = FiniteOAlgebra.make(p, table, unit, lam, (), AQ.basis_names(), check=False)
    return LocalModel(alg, list(gens), AQ.basis_names(), global_rank, note, AQ)


def _fiber_dimension(gens: List[Poly], p: int, budget=None) -> Optional[int]:
    try:
        return standard_monomials([g.change_domain(GF(p)) for g in gens], budget=budget).dim
    except PositiveDimensional:
        return None


def _lattice_local_model(AQ, rows, point, gens, global_rank, note) -> LocalModel:
    vals = point.as_dict()
    elems = [AQ.element(r) for r in rows]
    table = [[solve_rational(rows, [AQ.coords(bi * bj)])[0] for bj in elems] for bi in elems]
    unit = solve_rational(rows, [AQ.coords(Poly.const(AQ.vt, 1, QQ))])[0]
    lam = [b.evaluate(vals) for b in elems]
    names = [f"e{i}" for i in range(len(rows))]
    alg = FiniteOAlgebra.make(point.p, table, unit, lam, (), names, check=True)
    return LocalModel(alg, list(gens), names, global_rank, note, AQ, [list(r) for r in rows])


def build_model(cover: CICover, budget: Optional[int] = None) -> DimOneModel:
    """The dimension-one model (R~_theta, I_theta) of a cover with its S-sequence."""
    pt = cover._need_point()
    theta = cover.theta or find_theta(cover, budget=budget)
    ys = cover.specialized(theta.images)
    cov = cover.specialized(cover.relations)
    full = cover.specialized(cover.parent.relations)
    M = local_model(cov + ys, pt, budget)
    T = local_model(full + ys, pt, budget)
    A = M.algebra
    ideal = [M.coords(f) for f in full]
    ideal = [v for v in ideal if any(v)]
    I_rank = Lattice.from_rows(A.ideal_span(ideal), A.rank).rank() if ideal else 0
    if A.rank - I_rank != T.algebra.rank:
        raise ModelError(f"rank of R~_theta / I is {A.rank - I_rank}, model of R_theta has rank {T.algebra.rank}")
    if ideal:
        I_rows = A.ideal_span(ideal)
        sat = p_saturate(I_rows, A.p)
        if lattice_quotient_length(Lattice.from_rows(sat), Lattice.from_rows(I_rows), A.ctx):
            raise ModelError("R~_theta / I has p-torsion, so it is not the flat model of R_theta")
    names = cover.vt.variables
    jc = jacobian_at(cover.relations, names, pt)
    jf = jacobian_at(cover.parent.relations, names, pt)
    notes = [n for n in (M.note, T.note) if n]
    return DimOneModel(A, ideal, jc, jf, T.algebra, cover.label or "cover", notes)


_MODEL_CACHE: Dict[Tuple, DimOneModel] = {}


def _cached_model(cover: CICover, budget=None) -> DimOneModel:
    key = (tuple(str(f) for f in cover.parent.relations), tuple(str(f) for f in cover.relations),
           cover.point, tuple(str(f) for f in (cover.theta.images if cover.theta else ())))
    m = _MODEL_CACHE.get(key)
    if m is None:
        m = build_model(cover, budget)
        _MODEL_CACHE[key] = m
    return m


def wiles_defect(cover: CICover, validate: bool = True, budget: Optional[int] = None) -> DefectReport:
    """delta = D1 - c1 with the full report."""
    if validate:
        val = check_ci_cover(cover, budget=budget)
    model = _cached_model(cover, budget)
    rep = dim_one_invariants(model)
    rep.provenance.update({
        "cover": cover.label or "cover",
        "prime": cover.point.p,
        "order": "block-grevlex",
        "s_sequence": [str(y) for y in (cover.theta.images if cover.theta else [])],
    })
    if model.notes:
        rep.provenance["model_notes"] = list(model.notes)
    if validate:
        rep.provenance["fiber_dimensions"] = dict(sorted(val.flat_fibers.items()))
    return rep


def lambda_ann(cover: CICover) -> OIdeal:
    return wiles_defect(cover, validate=False).lambda_ann


def lambda_fitt(cover: CICover) -> OIdeal:
    return wiles_defect(cover, validate=False).lambda_fitt


def c1(cover: CICover) -> int:
    return wiles_defect(cover, validate=False).c1


def d1(cover: CICover) -> int:
    return wiles_defect(cover, validate=False).d1


# ---------------------------------------------------------------- symbolic route

def theta_substitution(cover: CICover) -> Dict[str, Poly]:
    """Solve the S-sequence for variables occurring linearly with constant coefficient."""
    if cover.theta is None:
        raise DefectError("symbolic route needs an S-sequence")
    vt = cover.vt
    subs: Dict[str, Poly] = {}
    pending = list(cover.theta.images)
    for y in pending:
        y = y.substitute(subs) if subs else y
        pick = None
        for x in vt.variables:
            i = vt.index(x)
            lin = [(m, c) for m, c in y.terms.items() if m[i]]
            if len(lin) == 1 and sum(lin[0][0]) == 1:
                pick = (x, lin[0][1])
                break
        if pick is None:
            raise DefectError(f"cannot solve {y} for a variable")
        x, c = pick
        xs = Poly.symbol(vt, x, QQ)
        sol = (xs * c - y) * Fraction(1, 1) * (Fraction(1) / Fraction(c))
        subs = {k: v.substitute({x: sol}) for k, v in subs.items()}
        subs[x] = sol
    return subs


def _sym_point(cover: CICover) -> Dict[str, Poly]:
    if cover.symbolic_point is None:
        raise DefectError("symbolic route needs a symbolic augmentation")
    return cover.symbolic_point


def _minimal_modulo(base: List[Poly], gens: List[Poly]) -> List[Poly]:
    """A subset of ``gens`` generating the same ideal modulo ``base``, none redundant."""
    out: List[Poly] = []
    for f in gens:
        if not ideal_contains(base + out, [f]):
            out.append(f)
    k = 0
    while k < len(out):
        rest = out[:k] + out[k + 1:]
        if ideal_contains(base + rest, [out[k]]):
            out = rest
        else:
            k += 1
    return out


def symbolic_lambda_ann(cover: CICover, budget: Optional[int] = None) -> List[Poly]:
    """Generators over Q[params] of lambda(Ann_{R~_theta}(I_theta))."""
    subs = theta_substitution(cover)
    cov = [f.substitute(subs) for f in cover.relations]
    full = _minimal_modulo(cov, [f.substitute(subs) for f in cover.parent.relations])
    # (cov : I) in one module computation: f with f*(g_1, ..., g_m) in cov^m is the
    # last coordinate of the elements of <(g_1, ..., g_m, 1), cov*e_k> whose first
    # m coordinates vanish (position-over-term order eliminates those coordinates)
    vt, dom = cov[0].vt, cov[0].domain
    zero, one = Poly.zero(vt, dom), Poly.const(vt, 1, dom)
    m = len(full)
    vecs = [list(full) + [one]]
    for k in range(m):
        for c in cov:
            v = [zero] * (m + 1)
            v[k] = c
            vecs.append(v)
    G = module_groebner(vecs, module_order="pot", budget=budget)
    ann = [v[m] for v in G if all(x.is_zero() for x in v[:m])]
    pt = _sym_point(cover)
    vals = [f.substitute(pt) for f in ann]
    return [v for v in vals if not v.is_zero()]


def symbolic_lambda_fitt(cover: CICover, budget: Optional[int] = None) -> List[Poly]:
    """Generators over Q[params] of lambda(Fitt_{R~_theta}(I_theta))."""
    subs = theta_substitution(cover)
    cov = [f.substitute(subs) for f in cover.relations]
    gens = _minimal_modulo(cov, [f.substitute(subs) for f in cover.parent.relations])
    S = syzygies(gens + cov, budget=budget)
    pt = _sym_point(cover)
    m = len(gens)
    cols = []
    for col in S.columns:
        ev = [col[i].substitute(pt) for i in range(m)]
        if any(not e.is_zero() for e in ev):
            cols.append(ev)
    if not cols:
        return []
    # same submodule, fewer columns: reduced module basis over Q[params]
    basis = module_groebner(cols, module_order="top")
    mat = [[v[i] for v in basis] for i in range(m)]
    if len(basis) < m:
        return []
    return [f for f in poly_minors(mat, m) if not f.is_zero()]


def symbolic_jacobian_minors(cover: CICover) -> List[Poly]:
    """Top minors of the cover Jacobian evaluated at the symbolic augmentation."""
    pt = _sym_point(cover)
    J = jacobian(cover.relations, cover.vt.variables)
    ev = [[f.substitute(pt) for f in row] for row in J]
    return [f for f in poly_minors(ev, len(cover.relations)) if not f.is_zero()]


# ---------------------------------------------------------------- oracles

def _wedge(A: FiniteOAlgebra, u: Dict[Tuple[int, ...], Vec], v: Dict[Tuple[int, ...], Vec]):
    out: Dict[Tuple[int, ...], Vec] = {}
    for S, a in u.items():
        for T, b in v.items():
            if set(S) & set(T):
                continue
            merged = S + T
            sign = 1
            arr = list(merged)
            for i in range(len(arr)):
                for j in range(i + 1, len(arr)):
                    if arr[i] > arr[j]:
                        sign = -sign
            key = tuple(sorted(merged))
            prod = A.mul(a, b)
            cur = out.get(key, [Fraction(0)] * A.rank)
            out[key] = [c + sign * x for c, x in zip(cur, prod)]
    return out


@dataclass
class KoszulResult:
    ann_valuation: Optional[int]
    products_valuation: Optional[int]
    c1: int


def koszul_c1_oracle(A: FiniteOAlgebra, x: Sequence[Sequence]) -> KoszulResult:
    """c1 from Koszul homology: H_k = Ann(x) against the span of products of H_1."""
    x = [list(v) for v in x]
    k = len(x)
    if k > 3:
        raise DefectError("the Koszul oracle supports at most three elements")
    nonzero = [v for v in x if any(v)]
    if not nonzero:
        return KoszulResult(0, 0, 0)
    n = A.rank
    p = A.p
    ann = _annihilator(A, x)
    ann_v = min_valuation([A.apply_lambda(a) for a in ann], p)
    # Z_1 = ker(d_1: A^k -> A), (a_1..a_k) -> sum a_t x_t
    mats = [A.mult_matrix(v) for v in x]
    D1 = [[mats[t][r][c] for t in range(k) for c in range(n)] for r in range(n)]
    Z1 = integral_kernel(D1, p, k * n)
    cycles = [{(t,): z[t * n:(t + 1) * n] for t in range(k) if any(z[t * n:(t + 1) * n])} for z in Z1]
    vals = []
    for combo in combinations(range(len(cycles)), k):
        w = cycles[combo[0]]
        for c in combo[1:]:
            w = _wedge(A, w, cycles[c])
        top = w.get(tuple(range(k)))
        if top is not None and any(top):
            vals.append(A.apply_lambda(top))
    prod_v = min_valuation(vals, p) if vals else None
    if ann_v is None or prod_v is None:
        raise InfiniteLength("lambda vanishes on Koszul homology")
    return KoszulResult(ann_v, prod_v, prod_v - ann_v)


@dataclass
class DualityResult:
    valuation: Optional[int]
    gram_det_valuation: int
    generators: List[Fraction]
    single_functional: bool


def socle_functional(A: FiniteOAlgebra) -> int:
    """Index j such that the j-th coordinate functional is nonzero on the socle of A/p."""
    from .idealkit import _field_nullspace
    from .polyring import GF as _GF
    p = A.p
    rows = []
    for kv in A.kernel_lambda():
        M = A.mult_matrix(kv)
        rows.extend([[int(x * 1) % p if x.denominator == 1 else int(x.numerator * pow(x.denominator, -1, p)) % p
                      for x in r] for r in M])
    soc = _field_nullspace(rows, _GF(p), A.rank)
    if len(soc) != 1:
        raise DefectError(f"socle of A/p has dimension {len(soc)}, not Gorenstein")
    return next(j for j, c in enumerate(soc[0]) if c % p)


def duality_ann_oracle(A: FiniteOAlgebra, quotient_coords: Sequence[Sequence], ideal_basis: Sequence[Sequence] = (),
                       target: Optional[FiniteOAlgebra] = None, tau: Optional[int] = None) -> DualityResult:
    """lambda(Ann I) through the trace pairing of a Gorenstein A.

    ``quotient_coords[k]`` holds the coordinates of pi(b_k) in the target
    basis.  With a Gorenstein target the single dual of its socle functional
    generates Hom(target, O); otherwise every coordinate functional is used.
    """
    p = A.p
    n = A.rank
    tau = socle_functional(A) if tau is None else tau
    C = [[A.table[i][k][tau] for k in range(n)] for i in range(n)]
    from .exactalg import det
    dC = det(C)
    if dC == 0:
        raise DefectError("trace pairing is degenerate")
    dv = vp(dC, p)
    m = len(quotient_coords[0]) if quotient_coords else 0
    functionals = []
    single = False
    if target is not None:
        try:
            j = socle_functional(target)
            functionals = [[row[j] for row in quotient_coords]]
            single = True
        except DefectError:
            functionals = []
    if not functionals:
        functionals = [[row[j] for row in quotient_coords] for j in range(m)]
    gens = []
    for phi in functionals:
        mu = solve_rational(C, [phi])
        if mu is None:
            raise DefectError("trace pairing system has no solution")
        h = mu[0]
        gens.append(A.apply_lambda(h))
    return DualityResult(min_valuation(gens, p), dv, gens, single)


def model_duality_oracle(model: DimOneModel) -> DualityResult:
    """lambda(Ann I) of a model through the trace pairing of its Gorenstein cover.

    The functionals vanishing on I form an O-basis of Hom_O(A/I, O); their
    images under the pairing span Ann(I).
    """
    A = model.cover
    I_rows = A.ideal_span(model.ideal) if model.ideal else []
    Y = integral_kernel(I_rows, A.p, A.rank) if I_rows else [A.basis_vector(i) for i in range(A.rank)]
    coords = [[y[k] for y in Y] for k in range(A.rank)]
    return duality_ann_oracle(A, coords)


def model_koszul_oracle(model: DimOneModel) -> KoszulResult:
    """c1 of a model from the Koszul homology of minimal generators of I."""
    return koszul_c1_oracle(model.cover, minimal_ideal_generators(model.cover, model.ideal))


# ---------------------------------------------------------------- random finite O-algebras

@dataclass
class PointModel:
    """B inside O^r generated by vectors x_1..x_m, with its CI cover tensor_i O[x_i]/chi_i."""

    points: List[List[int]]
    model: DimOneModel

    @property
    def target(self) -> FiniteOAlgebra:
        return self.model.target


def _char_poly_of_values(values: Sequence[int]) -> List[int]:
    """Coefficients c_0..c_{d-1} of prod (T - v) (monic, degree d)."""
    poly = [1]
    for v in values:
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] += c
            nxt[i] -= v * c
        poly = nxt
    return poly[:-1]


def point_model(points: Sequence[Sequence[int]], p: int, label: str = "points") -> PointModel:
    """Dimension-one model from algebra generators in O^r; lambda = first coordinate (all zero)."""
    points = [list(map(int, v)) for v in points]
    r = len(points[0])
    for v in points:
        if v[0] != 0:
            raise DefectError("generators must vanish at the first coordinate")
        if any(x % p for x in v):
            raise DefectError("generators must lie in pO^r so that B is local")
        if any(x == 0 for x in v[1:]):
            raise DefectError("0 must be a simple root of each characteristic polynomial")
    factors = [FiniteOAlgebra.monogenic(_char_poly_of_values(v), p, f"x{i + 1}") for i, v in enumerate(points)]
    A = factors[0]
    for f in factors[1:]:
        A = A.tensor(f)
    m = len(points)
    exps = [[]]
    for _ in range(m):
        exps = [e + [k] for e in exps for k in range(r)]
    evals = []
    for e in exps:
        col = []
        for k in range(r):
            val = 1
            for i in range(m):
                val *= points[i][k] ** e[i]
            col.append(val)
        evals.append(col)
    M = [[evals[c][k] for c in range(len(exps))] for k in range(r)]
    ideal = integral_kernel(M, p, len(exps))
    jc = []
    for i, v in enumerate(points):
        d = 1
        for x in v[1:]:
            d *= -x
        row = [0] * m
        row[i] = d
        jc.append(row)
    lin = [exps.index([1 if j == i else 0 for j in range(m)]) for i in range(m)]
    jf = jc + [[g[lin[i]] for i in range(m)] for g in ideal]
    B = FiniteOAlgebra.from_generators(points, p)
    return PointModel(points, DimOneModel(A, ideal, jc, jf, B, label))


def random_point_model(rng: random.Random, p: int, r: Optional[int] = None, m: Optional[int] = None) -> PointModel:
    r = r or rng.choice((2, 3, 3, 4))
    m = m or rng.choice((1, 2, 2))
    pts = []
    for _ in range(m):
        v = [0]
        for _ in range(r - 1):
            v.append(p ** rng.choice((1, 1, 2, 3)) * rng.choice((1, -1, 2, 3, -2, 4)))
        pts.append(v)
    return point_model(pts, p, f"points r={r} m={m}")


def ci_verdict(pm: PointModel) -> bool:
    """Independent CI test: the ideal of B/p in k[x] needs exactly m generators."""
    p = pm.model.p
    m = len(pm.points)
    vt = VarTable(tuple(f"x{i + 1}" for i in range(m)), ())
    F = GF(p)
    r = len(pm.points[0])
    gens = []
    for i, v in enumerate(pm.points):
        chi = _char_poly_of_values(v) + [1]
        x = Poly.symbol(vt, f"x{i + 1}", F)
        f = Poly.zero(vt, F)
        for c in reversed(chi):
            f = f * x + (c % p)
        gens.append(f)
    exps = [[]]
    for _ in range(m):
        exps = [e + [k] for e in exps for k in range(r)]
    for g in pm.model.ideal:
        den = 1
        for c in g:
            den = den * c.denominator // gcd(den, c.denominator)
        terms = {}
        for c, e in zip(g, exps):
            if c:
                val = int(c * den) % p
                if val:
                    terms[tuple(e)] = val
        if terms:
            gens.append(Poly(vt, terms, F))
    base = standard_monomials(gens).dim
    mJ = [g * Poly.symbol(vt, x, F) for g in gens for x in vt.variables]
    bigger = standard_monomials(mJ).dim
    return bigger - base == m


# ---------------------------------------------------------------- identities

@dataclass
class IdentityCheck:
    name: str
    passed: bool
    witness: Dict[str, object]


def venkatesh_identity(model: DimOneModel) -> IdentityCheck:
    rep = dim_one_invariants(model)
    B = model.target_algebra()
    try:
        phi = phi_length(B)
        psi = psi_length(B)
    except InfiniteLength as exc:
        # the S-sequence is not transversal at lambda, so R_theta is singular there
        return IdentityCheck("Phi - Psi = D1 - c1", False, {"model": model.label, "error": str(exc)})
    ok = phi - psi == rep.d1 - rep.c1
    return IdentityCheck("Phi - Psi = D1 - c1", ok,
                         {"model": model.label, "phi": phi, "psi": psi, "c1": rep.c1, "d1": rep.d1})


def verify_identities(covers: Sequence[CICover] = (), thetas: Sequence[CICover] = (),
                      models: Sequence[DimOneModel] = (), ci_models: Sequence[DimOneModel] = ()) -> List[IdentityCheck]:
    """(a) Phi - Psi = D1 - c1, (b) cover independence, (c) theta independence,
    (d) tensor additivity, (e) delta = 0 on complete intersections."""
    out: List[IdentityCheck] = []
    for m in models:
        out.append(venkatesh_identity(m))
    for cov in covers[:1] + thetas[:1]:
        out.append(venkatesh_identity(_cached_model(cov)))
    if len(covers) >= 2:
        reps = [wiles_defect(c) for c in covers]
        ok = all(reps[0].same_invariants(r) for r in reps[1:])
        out.append(IdentityCheck("cover independence", ok,
                                 {c.label: (r.c1, r.d1, str(r.delta)) for c, r in zip(covers, reps)}))
    else:
        out.append(IdentityCheck("cover independence", True, {"skipped": "fewer than two covers"}))
    if len(thetas) >= 2:
        reps = [wiles_defect(c) for c in thetas]
        ok = all(reps[0].same_invariants(r) for r in reps[1:])
        out.append(IdentityCheck("S-sequence independence", ok,
                                 {str(i): (r.c1, r.d1, str(r.delta)) for i, r in enumerate(reps)}))
    else:
        out.append(IdentityCheck("S-sequence independence", True, {"skipped": "fewer than two S-sequences"}))
    if len(models) >= 2:
        a, b = models[0], models[1]
        ra, rb = dim_one_invariants(a), dim_one_invariants(b)
        rt = dim_one_invariants(a.tensor(b), cross_check=False)
        ok = rt.c1 == ra.c1 + rb.c1 and rt.d1 == ra.d1 + rb.d1
        out.append(IdentityCheck("tensor additivity", ok,
                                 {"c1": (ra.c1, rb.c1, rt.c1), "d1": (ra.d1, rb.d1, rt.d1)}))
    for m in ci_models:
        r = dim_one_invariants(m)
        out.append(IdentityCheck("delta = 0 on complete intersections", r.delta == 0,
                                 {"model": m.label, "delta": str(r.delta)}))
    return out
