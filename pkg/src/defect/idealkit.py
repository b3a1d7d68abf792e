"""Ideal and module operations on top of the Groebner engine."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .exactalg import rational_nullspace
from .groebner import (GroebnerBasis, SyzygyMatrix, buchberger, eliminate, normal_form, syzygies)
from .polyring import GF, QQ, Domain, Monomial, MonomialOrder, Poly, PolyError, VarTable

DEFAULT_PRIMES = (3, 5, 7, 11, 13)


class IdealError(ValueError):
    """Invalid ideal-theoretic input."""


class PositiveDimensional(IdealError):
    """The quotient is not finite dimensional over the field."""

    def __init__(self, message: str, variable: str):
        super().__init__(message)
        self.variable = variable


@dataclass
class RingPresentation:
    """P/J with P a polynomial ring over ``vt`` and J generated by ``relations``."""

    vt: VarTable
    relations: List[Poly]
    domain: Domain = QQ
    regime: Dict[str, object] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        for r in self.relations:
            if r.vt != self.vt:
                raise IdealError("relation over a foreign symbol table")

    def over(self, domain: Domain) -> "RingPresentation":
        return RingPresentation(self.vt, [r.change_domain(domain) for r in self.relations], domain,
                                dict(self.regime), self.name)

    def poly(self, text: str) -> Poly:
        from .polyring import parse_poly
        return parse_poly(text, self.vt, self.domain)


@dataclass
class SubringMap:
    """Images of y_1, ..., y_d in the ambient ring."""

    images: List[Poly]
    include_params: bool = True

    def elements(self) -> List[Poly]:
        out = list(self.images)
        if self.include_params and self.images:
            vt, dom = self.images[0].vt, self.images[0].domain
            out += [Poly.symbol(vt, n, dom) for n in vt.params]
        return out


def _same_ambient(a: Sequence[Poly], b: Sequence[Poly]):
    if a and b and (a[0].vt != b[0].vt or a[0].domain != b[0].domain):
        raise IdealError("ideals live in different rings")


def _nonzero(gens: Sequence[Poly]) -> List[Poly]:
    return [g for g in gens if not g.is_zero()]


# ---------------------------------------------------------------- basics

def exact_divide(g: Poly, f: Poly) -> Poly:
    """Quotient g / f, raising if f does not divide g."""
    if f.is_zero():
        raise IdealError("division by zero polynomial")
    order = MonomialOrder.grevlex(len(g.vt))
    lm, lc = f.leading(order)
    rem = g
    quot = Poly.zero(g.vt, g.domain)
    while not rem.is_zero():
        m, c = rem.leading(order)
        if any(x < y for x, y in zip(m, lm)):
            raise IdealError("polynomial division is not exact")
        q = tuple(x - y for x, y in zip(m, lm))
        if g.domain.kind == "GF":
            coef = c * pow(lc, -1, g.domain.p) % g.domain.p
        else:
            coef = Fraction(c) / lc
        t = Poly(g.vt, {q: coef}, g.domain)
        quot = quot + t
        rem = rem - t * f
    return quot


def intersect(I: Sequence[Poly], J: Sequence[Poly], budget: Optional[int] = None) -> List[Poly]:
    """Generators of the intersection of two ideals (t*I + (1-t)*J device)."""
    I, J = _nonzero(I), _nonzero(J)
    _same_ambient(I, J)
    if not I or not J:
        return []
    vt, dom = I[0].vt, I[0].domain
    tname = "T_"
    while tname in vt.symbols:
        tname += "_"
    big = vt.extend([tname], front=True)
    T = Poly.symbol(big, tname, dom)
    one = Poly.const(big, 1, dom)
    gens = [T * f.to_vartable(big) for f in I] + [(one - T) * g.to_vartable(big) for g in J]
    elim = eliminate(gens, [tname], budget=budget)
    back = []
    for g in elim:
        out = {m[1:]: c for m, c in g.terms.items()}
        back.append(Poly(vt, out, dom))
    return back


def colon(J: Sequence[Poly], I: Sequence[Poly], budget: Optional[int] = None) -> List[Poly]:
    """Generators of (J : I) = {f : f*I inside J}."""
    J, I = _nonzero(J), _nonzero(I)
    _same_ambient(I, J)
    if not I:
        raise IdealError("colon by the zero ideal is the whole ring; pass (1) explicitly")
    vt, dom = I[0].vt, I[0].domain
    result: Optional[List[Poly]] = None
    for f in I:
        if not J:
            part: List[Poly] = []
        else:
            inter = intersect(J, [f], budget=budget)
            part = [exact_divide(g, f) for g in inter]
        if result is None:
            result = part
        else:
            result = intersect(result, part, budget=budget) if part and result else []
    return buchberger(result, budget=budget).generators if result else []


def ideal_contains(big: Sequence[Poly], small: Sequence[Poly], order: Optional[MonomialOrder] = None) -> bool:
    big = _nonzero(big)
    small = _nonzero(small)
    if not small:
        return True
    if not big:
        return False
    G = buchberger(big, order)
    return G.contains_ideal(small)


def ideals_equal(a: Sequence[Poly], b: Sequence[Poly], order: Optional[MonomialOrder] = None) -> bool:
    return ideal_contains(a, b, order) and ideal_contains(b, a, order)


def locally_contained(small: Sequence[Poly], big: Sequence[Poly]) -> bool:
    """Whether small is inside big after localizing at the origin.

    For each generator f of ``small`` the colon (big : f) must contain an
    element that does not vanish at the origin.
    """
    small = _nonzero(small)
    if not small:
        return True
    big = _nonzero(big)
    if not big:
        return False
    vt, dom = small[0].vt, small[0].domain
    origin = [Poly.symbol(vt, n, dom) for n in vt.symbols]
    G = buchberger(big)
    for f in small:
        if G.contains(f):
            continue
        col = colon(big, [f])
        if not col or not buchberger(col + origin).is_unit_ideal():
            return False
    return True


def locally_equal(a: Sequence[Poly], b: Sequence[Poly]) -> bool:
    """Equality of ideals in the localization at the origin (up to units)."""
    return locally_contained(a, b) and locally_contained(b, a)


# ---------------------------------------------------------------- Artinian quotients

def _staircase_unbounded(lms: Sequence[Monomial], n: int) -> Optional[int]:
    for i in range(n):
        if not any(m[i] > 0 and all(m[j] == 0 for j in range(n) if j != i) for m in lms):
            return i
    return None


def _enumerate_staircase(lms: Sequence[Monomial], n: int) -> List[Monomial]:
    out = []
    seen = {(0,) * n}
    stack = [(0,) * n]
    while stack:
        m = stack.pop()
        if any(all(a >= b for a, b in zip(m, l)) for l in lms):
            continue
        out.append(m)
        for i in range(n):
            nm = m[:i] + (m[i] + 1,) + m[i + 1:]
            if nm not in seen:
                seen.add(nm)
                stack.append(nm)
    return out


@dataclass
class ArtinianQuotient:
    """Finite-dimensional quotient with its standard-monomial basis."""

    vt: VarTable
    gb: GroebnerBasis
    basis: List[Monomial]
    domain: Domain

    @property
    def dim(self) -> int:
        return len(self.basis)

    def basis_polys(self) -> List[Poly]:
        return [Poly(self.vt, {m: 1}, self.domain) for m in self.basis]

    def basis_names(self) -> List[str]:
        from .polyring import format_monomial
        return [format_monomial(self.vt, m) for m in self.basis]

    def coords(self, f: Poly) -> List:
        r = normal_form(f, self.gb)
        idx = {m: i for i, m in enumerate(self.basis)}
        v = [0] * self.dim
        for m, c in r.terms.items():
            v[idx[m]] = c
        return v

    def element(self, vec: Sequence) -> Poly:
        return Poly(self.vt, {m: c for m, c in zip(self.basis, vec) if c}, self.domain)

    def mult_matrix(self, f: Poly) -> List[List]:
        """Matrix whose column j holds the coordinates of f * b_j."""
        cols = [self.coords(f * b) for b in self.basis_polys()]
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]

    def structure_constants(self) -> List[List[List]]:
        """c[i][j] = coordinates of b_i * b_j."""
        bp = self.basis_polys()
        return [[self.coords(bi * bj) for bj in bp] for bi in bp]


def standard_monomials(A, order: Optional[MonomialOrder] = None, budget: Optional[int] = None) -> ArtinianQuotient:
    """Standard-monomial basis of a zero-dimensional quotient."""
    gens = A.relations if isinstance(A, RingPresentation) else list(A)
    gens = _nonzero(gens)
    if not gens:
        raise IdealError("the zero ideal has an infinite quotient")
    vt, dom = gens[0].vt, gens[0].domain
    G = buchberger(gens, order, budget=budget)
    lms = G.leading_monomials()
    bad = _staircase_unbounded(lms, len(vt))
    if bad is not None and not G.is_unit_ideal():
        name = vt.symbols[bad]
        raise PositiveDimensional(f"quotient is positive dimensional: no power of {name} is a leading monomial", name)
    basis = [] if G.is_unit_ideal() else _enumerate_staircase(lms, len(vt))
    order_ = G.order
    basis.sort(key=order_.key)
    return ArtinianQuotient(vt, G, basis, dom)


def _field_nullspace(rows: List[List], dom: Domain, n: int) -> List[List]:
    if dom.kind == "GF":
        p = dom.p
        a = [[x % p for x in r] for r in rows]
        piv = []
        ri = 0
        for c in range(n):
            sel = next((k for k in range(ri, len(a)) if a[k][c]), None)
            if sel is None:
                continue
            a[ri], a[sel] = a[sel], a[ri]
            inv = pow(a[ri][c], -1, p)
            a[ri] = [(x * inv) % p for x in a[ri]]
            for k in range(len(a)):
                if k != ri and a[k][c]:
                    f = a[k][c]
                    a[k] = [(x - f * y) % p for x, y in zip(a[k], a[ri])]
            piv.append(c)
            ri += 1
        free = [c for c in range(n) if c not in piv]
        out = []
        for fc in free:
            v = [0] * n
            v[fc] = 1
            for i, pc in enumerate(piv):
                v[pc] = (-a[i][fc]) % p
            out.append(v)
        return out
    return rational_nullspace(rows, n)


def socle(A: ArtinianQuotient) -> List[Poly]:
    """Basis of the socle: elements killed by every symbol."""
    if A.dim == 0:
        return []
    rows = []
    for name in A.vt.symbols:
        rows.extend(A.mult_matrix(Poly.symbol(A.vt, name, A.domain)))
    return [A.element(v) for v in _field_nullspace(rows, A.domain, A.dim)]


def localize_at_origin(A: ArtinianQuotient, budget: Optional[int] = None) -> ArtinianQuotient:
    """The factor of A supported at the origin.

    With D = dim A, x^D acts as zero on the origin factor and invertibly on the
    other factors for some symbol x, so killing all x^D * b_j leaves the
    origin factor.
    """
    if A.dim == 0:
        return A
    extra = []
    for name in A.vt.symbols:
        xD = Poly.symbol(A.vt, name, A.domain) ** A.dim
        for b in A.basis_polys():
            r = normal_form(xD * b, A.gb)
            if not r.is_zero():
                extra.append(r)
    if not extra:
        return A
    return standard_monomials(list(A.gb.generators) + extra, A.gb.order, budget)


def span_rank(A: ArtinianQuotient, polys: Sequence[Poly]) -> int:
    """Dimension of the span of the images of ``polys`` in A."""
    if not polys:
        return 0
    cols = [A.coords(f) for f in polys]
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(A.dim)]
    return len(cols) - len(_field_nullspace(rows, A.domain, len(cols)))


# ---------------------------------------------------------------- Fitting ideals

def poly_minors(matrix: Sequence[Sequence[Poly]], size: int) -> List[Poly]:
    """All size x size minors of a polynomial matrix (Laplace expansion with memo)."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    if size < 1 or size > min(rows, cols):
        return []
    vt, dom = matrix[0][0].vt, matrix[0][0].domain
    memo: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Poly] = {}

    def det(rs: Tuple[int, ...], cs: Tuple[int, ...]) -> Poly:
        key = (rs, cs)
        if key in memo:
            return memo[key]
        if len(rs) == 1:
            val = matrix[rs[0]][cs[0]]
        else:
            val = Poly.zero(vt, dom)
            r0 = rs[0]
            for k, c in enumerate(cs):
                e = matrix[r0][c]
                if e.is_zero():
                    continue
                sub = det(rs[1:], cs[:k] + cs[k + 1:])
                if sub.is_zero():
                    continue
                term = e * sub
                val = val + term if k % 2 == 0 else val - term
        memo[key] = val
        return val

    out = []
    for rs in combinations(range(rows), size):
        for cs in combinations(range(cols), size):
            out.append(det(rs, cs))
    return out


def fitting_ideal(P, nrows: Optional[int] = None) -> List[Poly]:
    """0th Fitting ideal of the cokernel of a presentation matrix.

    ``P`` is either a :class:`SyzygyMatrix` or a row-major matrix with one
    row per module generator.  Fewer columns than rows gives the zero ideal.
    """
    mat = P.matrix() if isinstance(P, SyzygyMatrix) else [list(r) for r in P]
    m = len(mat) if nrows is None else nrows
    ncols = len(mat[0]) if mat else 0
    if m == 0:
        raise IdealError("presentation without generators")
    if ncols < m:
        vt, dom = (mat[0][0].vt, mat[0][0].domain) if ncols else (None, None)
        return [Poly.zero(vt, dom)] if vt else []
    return [f for f in poly_minors(mat, m) if not f.is_zero()] or [Poly.zero(mat[0][0].vt, mat[0][0].domain)]


def module_annihilator(P) -> List[Poly]:
    """Annihilator of coker(P) for a presentation with m rows.

    Computed as the intersection over generators e_i of (im P : e_i), with
    each colon obtained from a module Groebner basis of im P + R e_i.
    """
    from .groebner import module_groebner
    mat = P.matrix() if isinstance(P, SyzygyMatrix) else [list(r) for r in P]
    m = len(mat)
    cols = [[mat[i][j] for i in range(m)] for j in range(len(mat[0]))] if mat and mat[0] else []
    if not cols:
        return []
    vt, dom = mat[0][0].vt, mat[0][0].domain
    zero = Poly.zero(vt, dom)
    one = Poly.const(vt, 1, dom)
    result: Optional[List[Poly]] = None
    for i in range(m):
        # (im P : e_i): f with f*e_i in im P.  Extend vectors by a tag coordinate.
        vecs = [list(c) + [zero] for c in cols]
        tag = [zero] * m + [one]
        tag[i] = one
        vecs.append(tag)
        # eliminate the first m coordinates (position-over-term)
        G = _module_pot(vecs)
        part = [v[m] for v in G if all(x.is_zero() for x in v[:m])]
        part = _nonzero(part)
        if result is None:
            result = part
        else:
            result = intersect(result, part) if result and part else []
    return result or []


def _module_pot(vecs):
    from .groebner import module_groebner
    return module_groebner(vecs, module_order="pot")


# ---------------------------------------------------------------- dimension

def staircase_dimension(gens: Sequence[Poly], budget: Optional[int] = None) -> Tuple[int, List[str]]:
    """Krull dimension of P/(gens) from the leading-term ideal.

    Returns the dimension and a maximal independent set of symbols.
    """
    gens = _nonzero(gens)
    if not gens:
        raise IdealError("need at least one generator")
    vt = gens[0].vt
    n = len(vt)
    G = buchberger(gens, MonomialOrder.grevlex(n), budget=budget)
    if G.is_unit_ideal():
        return -1, []
    lms = G.leading_monomials()
    supports = [frozenset(i for i, e in enumerate(m) if e) for m in lms]
    for size in range(n, -1, -1):
        for S in combinations(range(n), size):
            s = set(S)
            if not any(sup <= s for sup in supports):
                return size, [vt.symbols[i] for i in S]
    return 0, []


@dataclass
class RegularityReport:
    regular: bool
    criterion: str
    steps: List[Dict[str, object]]
    fiber_dims: Dict[str, int]
    bases: Dict[str, List[str]] = field(default_factory=dict)


def is_regular_sequence(A: RingPresentation, seq: Sequence[Poly], p: Optional[int] = None,
                        budget: Optional[int] = None) -> RegularityReport:
    """Regularity of ``seq`` (then p) on a Cohen-Macaulay presentation.

    Each prefix must lower the staircase dimension by exactly one, over Q
    and over F_p, and the full sequence must leave a finite quotient; for a
    Cohen-Macaulay ambient ring this makes the sequence a system of
    parameters, which is a regular sequence.
    """
    base = list(A.relations)
    steps = []
    ok = True
    fiber_dims: Dict[str, int] = {}
    bases: Dict[str, List[str]] = {}
    domains = [QQ] + ([GF(p)] if p else [])
    for dom in domains:
        rel = [r.change_domain(dom) for r in base]
        sq = [s.change_domain(dom) for s in seq]
        vt = (rel + sq)[0].vt
        if rel:
            d0, _ = staircase_dimension(rel, budget)
        else:
            d0 = len(vt)
        prev = d0
        for i in range(len(sq)):
            d, _ = staircase_dimension(rel + sq[: i + 1], budget)
            good = d == prev - 1
            steps.append({"domain": str(dom), "prefix": i + 1, "dimension": d, "drop_ok": good})
            ok = ok and good
            prev = d
        if prev != 0:
            ok = False
        if prev == 0:
            Q = standard_monomials(rel + sq, budget=budget)
            fiber_dims[str(dom)] = Q.dim
            bases[str(dom)] = Q.basis_names()
    crit = ("each prefix lowers the leading-term (staircase) dimension by one over Q"
            + (f" and over GF({p})" if p else "")
            + " ending in a finite quotient; the ambient ring is Cohen-Macaulay, so a system of"
              " parameters is a regular sequence")
    return RegularityReport(ok, crit, steps, fiber_dims, bases)


@dataclass
class FreenessReport:
    certified: bool
    expected_rank: int
    ranks: Dict[str, int]
    bases: Dict[str, List[str]]
    note: str
    divergent: List[str] = field(default_factory=list)


def verify_free_over_subring(R: RingPresentation, S: SubringMap, expected_rank: Optional[int],
                             primes: Sequence[int] = DEFAULT_PRIMES, budget: Optional[int] = None) -> FreenessReport:
    """Fiber ranks of R over S, over Q and over F_p for each prime."""
    ranks: Dict[str, int] = {}
    bases: Dict[str, List[str]] = {}
    skipped = [q for q in primes if q in R.regime.get("skip_primes", ())]
    for dom in [QQ] + [GF(q) for q in primes if q not in skipped]:
        gens = [r.change_domain(dom) for r in R.relations] + [s.change_domain(dom) for s in S.elements()]
        try:
            Q = standard_monomials(gens, budget=budget)
        except PositiveDimensional as exc:
            raise PositiveDimensional(f"{exc} (over {dom}); the candidate is not a system of parameters",
                                      exc.variable) from None
        ranks[str(dom)] = Q.dim
        bases[str(dom)] = Q.basis_names()
    target = expected_rank if expected_rank is not None else ranks["QQ"]
    divergent = [k for k, v in ranks.items() if v != target]
    note = ("freeness certified by equal fiber ranks over Q and the listed prime fields"
            if not divergent else "fiber ranks disagree")
    if skipped:
        note += "; skipped fibers at " + ", ".join(map(str, skipped))
    return FreenessReport(not divergent, target, ranks, bases, note, divergent)
