"""Buchberger engine over Q and F_p, for ideals and submodules of free modules.

Module elements are dictionaries keyed by ``(position, monomial)``; an ideal
is the rank-one case.  Pair handling follows Gebauer and Moeller, pairs are
selected by sugar degree, and the result is always the reduced basis, so it
does not depend on the generator order.
"""
from __future__ import annotations

import heapq
import os
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import gmpy2

from .polyring import QQ, Domain, GF, Monomial, MonomialOrder, Poly, PolyError, VarTable

Term = Tuple[int, Monomial]

DEFAULT_BUDGET = 50_000_000


class GroebnerError(ValueError):
    """Invalid input to the engine."""


class BudgetExceeded(RuntimeError):
    """The configured amount of work was used up before completion."""


_BUDGET_OVERRIDE: ContextVar[Optional[int]] = ContextVar("defect_budget", default=None)


@contextmanager
def budget_scope(budget: Optional[int]):
    """Use ``budget`` as the default engine budget inside the block."""
    token = _BUDGET_OVERRIDE.set(budget)
    try:
        yield
    finally:
        _BUDGET_OVERRIDE.reset(token)


def default_budget() -> int:
    scoped = _BUDGET_OVERRIDE.get()
    if scoped is not None:
        return scoped
    env = os.environ.get("DEFECT_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise GroebnerError(f"DEFECT_BUDGET must be an integer, got {env!r}") from None
    return DEFAULT_BUDGET


# ---------------------------------------------------------------- coefficients

class _Field:
    """Coefficient arithmetic for the engine (mpq for Q, ints for F_p)."""

    def __init__(self, domain: Domain):
        if not domain.is_field:
            raise GroebnerError(f"coefficient domain {domain} is not a field")
        self.domain = domain
        self.p = domain.p if domain.kind == "GF" else 0

    def from_poly(self, c):
        if self.p:
            return int(c) % self.p
        if isinstance(c, Fraction):
            return gmpy2.mpq(c.numerator, c.denominator)
        return gmpy2.mpq(c)

    def to_poly(self, c):
        if self.p:
            return int(c)
        return Fraction(int(c.numerator), int(c.denominator))

    def inv(self, c):
        if self.p:
            return pow(c, -1, self.p)
        return 1 / c


# ---------------------------------------------------------------- engine core

class _Engine:
    def __init__(self, nsyms: int, order: MonomialOrder, fld: _Field, rank: int,
                 module_order: str = "top", budget: Optional[int] = None):
        self.n = nsyms
        self.order = order
        self.f = fld
        self.p = fld.p
        self.rank = rank
        self.module_order = module_order
        self.budget = default_budget() if budget is None else budget
        self.work = 0
        self._nk: Dict[Term, tuple] = {}

    # term order: larger key = larger term
    def key(self, t: Term) -> tuple:
        k = self._nk.get(t)
        if k is None:
            pos, m = t
            mk = self.order.key(m)
            if self.module_order == "pot":
                k = (-pos,) + mk
            elif self.module_order == "elim0":
                k = (1,) + mk + (0,) if pos == 0 else (0,) + mk + (-pos,)
            else:  # term over position
                k = mk + (-pos,)
            k = tuple(-x for x in k)  # negated: heap minimum is the largest term
            if len(self._nk) < 2_000_000:
                self._nk[t] = k
        return k

    def lead(self, f: Dict[Term, object]) -> Term:
        return min(f, key=self.key)

    def charge(self, amount: int):
        self.work += amount
        if self.work > self.budget:
            raise BudgetExceeded(f"Groebner computation exceeded budget of {self.budget} term operations")

    def monic(self, f):
        lt = self.lead(f)
        inv = self.f.inv(f[lt])
        if self.p:
            return {t: (c * inv) % self.p for t, c in f.items()}
        return {t: c * inv for t, c in f.items()}

    def reduce(self, f: Dict[Term, object], basis: List["_Elem"], full: bool = True):
        """Normal form of ``f`` with respect to ``basis`` (monic elements)."""
        p = self.p
        f = dict(f)
        heap = [(self.key(t), t) for t in f]
        heapq.heapify(heap)
        rem: Dict[Term, object] = {}
        key = self.key
        while heap:
            _, t = heapq.heappop(heap)
            c = f.pop(t, 0)
            if not c:
                continue
            pos, m = t
            g = None
            for e in basis:
                if e.pos == pos and all(a >= b for a, b in zip(m, e.lm)):
                    g = e
                    break
            if g is None:
                rem[t] = c
                if not full:
                    for _, t2 in heap:
                        c2 = f.pop(t2, 0)
                        if c2:
                            rem[t2] = c2
                    break
                continue
            q = tuple(a - b for a, b in zip(m, g.lm))
            self.charge(len(g.tail))
            for (gp, gm), gc in g.tail:
                mm = (gp, tuple(a + b for a, b in zip(gm, q)))
                old = f.get(mm)
                if old is None:
                    f[mm] = (-c * gc) % p if p else -c * gc
                    heapq.heappush(heap, (key(mm), mm))
                else:
                    f[mm] = (old - c * gc) % p if p else old - c * gc
        return rem


class _Elem:
    __slots__ = ("poly", "lt", "pos", "lm", "tail", "sugar", "mask")

    def __init__(self, poly, engine: _Engine, sugar: int):
        self.poly = poly
        self.lt = engine.lead(poly)
        self.pos, self.lm = self.lt
        self.tail = [(t, c) for t, c in poly.items() if t != self.lt]
        self.sugar = sugar
        self.mask = tuple(1 if x else 0 for x in self.lm)


def _lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x if x > y else y for x, y in zip(a, b))


def _divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _coprime(a: Monomial, b: Monomial) -> bool:
    return all(not (x and y) for x, y in zip(a, b))


def _deg(f) -> int:
    return max(sum(m) for _, m in f)


def _buchberger(engine: _Engine, gens: List[Dict[Term, object]]) -> List[Dict[Term, object]]:
    elems: List[_Elem] = []
    active: List[int] = []
    pairs: List[Tuple[int, int]] = []
    ideal_mode = engine.rank == 1

    def pair_info(i, j):
        a, b = elems[i], elems[j]
        lcm = _lcm(a.lm, b.lm)
        sug = max(a.sugar + sum(lcm) - sum(a.lm), b.sugar + sum(lcm) - sum(b.lm))
        return lcm, sug

    def update(h: int):
        nonlocal active, pairs
        eh = elems[h]
        cand = [g for g in active if elems[g].pos == eh.pos]
        lcms = {g: _lcm(eh.lm, elems[g].lm) for g in cand}
        C = list(cand)
        D = []
        while C:
            g1 = C.pop(0)
            l1 = lcms[g1]
            if (ideal_mode and _coprime(eh.lm, elems[g1].lm)) or not (
                    any(_divides(lcms[g2], l1) for g2 in C) or any(_divides(lcms[g2], l1) for g2 in D)):
                D.append(g1)
        E = [g for g in D if not (ideal_mode and _coprime(eh.lm, elems[g].lm))]
        newpairs = []
        for (i, j) in pairs:
            ei, ej = elems[i], elems[j]
            if ei.pos == eh.pos:
                lij = _lcm(ei.lm, ej.lm)
                if (_divides(eh.lm, lij) and _lcm(ei.lm, eh.lm) != lij and _lcm(ej.lm, eh.lm) != lij):
                    continue
            newpairs.append((i, j))
        newpairs.extend((g, h) for g in E)
        pairs = newpairs
        active = [g for g in active if not (elems[g].pos == eh.pos and _divides(eh.lm, elems[g].lm))]
        active.append(h)

    def add(poly, sugar):
        elems.append(_Elem(poly, engine, sugar))
        update(len(elems) - 1)

    # inter-reduce the input first to get a smaller start
    start = []
    for g in gens:
        if g:
            start.append(engine.monic(g))
    start.sort(key=lambda g: engine.key(engine.lead(g)), reverse=True)
    for g in start:
        basis = [elems[i] for i in active]
        r = engine.reduce(g, basis)
        if r:
            add(engine.monic(r), _deg(r))

    while pairs:
        best = None
        for idx, (i, j) in enumerate(pairs):
            lcm, sug = pair_info(i, j)
            k = (sug, engine.key((elems[i].pos, lcm)))
            # smaller sugar first; among equals, the smaller lcm (larger negated key)
            if best is None or k[0] < best[0][0] or (k[0] == best[0][0] and k[1] > best[0][1]):
                best = (k, idx)
        (_, _), idx = best
        i, j = pairs.pop(idx)
        a, b = elems[i], elems[j]
        lcm, sug = pair_info(i, j)
        qa = tuple(x - y for x, y in zip(lcm, a.lm))
        qb = tuple(x - y for x, y in zip(lcm, b.lm))
        s: Dict[Term, object] = {}
        p = engine.p
        for (tp, tm), c in a.tail:
            t = (tp, tuple(x + y for x, y in zip(tm, qa)))
            s[t] = s.get(t, 0) + c
        for (tp, tm), c in b.tail:
            t = (tp, tuple(x + y for x, y in zip(tm, qb)))
            s[t] = s.get(t, 0) - c
        if p:
            s = {t: c % p for t, c in s.items() if c % p}
        else:
            s = {t: c for t, c in s.items() if c}
        engine.charge(len(a.tail) + len(b.tail))
        if not s:
            continue
        r = engine.reduce(s, [elems[k] for k in active])
        if r:
            add(engine.monic(r), sug)

    # reduced basis
    basis = [elems[i] for i in active]
    basis.sort(key=lambda e: engine.key(e.lt))
    out = []
    for idx, e in enumerate(basis):
        others = basis[:idx] + basis[idx + 1:]
        r = engine.reduce(e.poly, others)
        out.append(engine.monic(r))
    out.sort(key=lambda g: engine.key(engine.lead(g)))
    return out


# ---------------------------------------------------------------- public types

def _poly_to_dict(f: Poly, fld: _Field) -> Dict[Term, object]:
    out = {}
    for m, c in f.terms.items():
        v = fld.from_poly(c)
        if v:
            out[(0, m)] = v
    return out


def _dict_to_poly(d: Dict[Term, object], vt: VarTable, fld: _Field, pos: int = 0) -> Poly:
    return Poly(vt, {m: fld.to_poly(c) for (p_, m), c in d.items() if p_ == pos}, fld.domain)


@dataclass
class GroebnerBasis:
    """Reduced, monic Groebner basis of an ideal."""

    order: MonomialOrder
    generators: List[Poly]
    domain: Domain
    vt: VarTable

    def leading_monomials(self) -> List[Monomial]:
        return [g.leading(self.order)[0] for g in self.generators]

    def is_unit_ideal(self) -> bool:
        return len(self.generators) == 1 and self.generators[0].is_constant() and not self.generators[0].is_zero()

    def is_zero_ideal(self) -> bool:
        return not self.generators

    def reduce(self, f: Poly) -> Poly:
        return normal_form(f, self)

    def contains(self, f: Poly) -> bool:
        return normal_form(f, self).is_zero()

    def contains_ideal(self, gens: Sequence[Poly]) -> bool:
        return all(self.contains(g) for g in gens)


def _prep(gens: Sequence[Poly]) -> Tuple[VarTable, Domain]:
    if not gens:
        raise GroebnerError("empty generator list")
    vt = gens[0].vt
    dom = gens[0].domain
    for g in gens:
        if g.vt != vt or g.domain != dom:
            raise GroebnerError("generators must share symbols and domain")
    if not dom.is_field:
        raise GroebnerError(f"coefficient domain {dom} is not a field")
    return vt, dom


def buchberger(gens: Sequence[Poly], order: Optional[MonomialOrder] = None,
               budget: Optional[int] = None) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``gens``."""
    vt, dom = _prep(gens)
    order = order or MonomialOrder.block(vt)
    if order.nsyms != len(vt):
        raise GroebnerError("order does not match the symbol table")
    fld = _Field(dom)
    eng = _Engine(len(vt), order, fld, 1, budget=budget)
    res = _buchberger(eng, [_poly_to_dict(g, fld) for g in gens])
    polys = [_dict_to_poly(d, vt, fld) for d in res]
    polys.sort(key=lambda g: order.key(g.leading(order)[0]))
    return GroebnerBasis(order, polys, dom, vt)


def normal_form(f: Poly, G: GroebnerBasis, budget: Optional[int] = None) -> Poly:
    """Fully reduced remainder of ``f`` modulo ``G``."""
    if f.vt != G.vt:
        raise GroebnerError("polynomial and basis use different symbol tables")
    if f.domain != G.domain:
        raise GroebnerError(f"domain mismatch: {f.domain} versus {G.domain}")
    if f.is_zero() or not G.generators:
        return f
    fld = _Field(G.domain)
    eng = _Engine(len(G.vt), G.order, fld, 1, budget=budget)
    basis = [_Elem(_poly_to_dict(g, fld), eng, g.total_degree()) for g in G.generators]
    r = eng.reduce(_poly_to_dict(f, fld), basis)
    return _dict_to_poly(r, G.vt, fld)


def ideal_equal(gens1: Sequence[Poly], gens2: Sequence[Poly], order: Optional[MonomialOrder] = None) -> bool:
    """Decide equality of two ideals by mutual normal-form reduction."""
    g1 = buchberger(gens1, order)
    g2 = buchberger(gens2, order)
    return g1.contains_ideal(gens2) and g2.contains_ideal(gens1)


def eliminate(gens: Sequence[Poly], drop: Sequence[str], inner: str = "grevlex",
              budget: Optional[int] = None) -> List[Poly]:
    """Generators of the ideal intersected with the subring free of ``drop``."""
    vt, dom = _prep(gens)
    idx = [vt.index(n) for n in drop]
    order = MonomialOrder.elimination(len(vt), idx, inner)
    G = buchberger(gens, order, budget=budget)
    return [g for g in G.generators if all(m[i] == 0 for m in g.terms for i in idx)]


# ---------------------------------------------------------------- modules

@dataclass
class SyzygyMatrix:
    """Columns are syzygies: ``sum_i gens[i] * columns[j][i] == 0``."""

    gens: List[Poly]
    columns: List[List[Poly]]

    @property
    def nrows(self) -> int:
        return len(self.gens)

    @property
    def ncols(self) -> int:
        return len(self.columns)

    def matrix(self) -> List[List[Poly]]:
        """Row-major matrix with one column per syzygy."""
        return [[col[i] for col in self.columns] for i in range(self.nrows)]

    def verify(self) -> bool:
        vt, dom = self.gens[0].vt, self.gens[0].domain
        for col in self.columns:
            tot = Poly.zero(vt, dom)
            for g, c in zip(self.gens, col):
                tot = tot + g * c
            if not tot.is_zero():
                return False
        return True


def module_groebner(vectors: Sequence[Sequence[Poly]], order: Optional[MonomialOrder] = None,
                    module_order: str = "top", budget: Optional[int] = None) -> List[List[Poly]]:
    """Reduced Groebner basis of a submodule of a free module, as vectors."""
    if not vectors:
        return []
    rank = len(vectors[0])
    flat = [x for v in vectors for x in v]
    vt, dom = _prep(flat)
    order = order or MonomialOrder.block(vt)
    fld = _Field(dom)
    eng = _Engine(len(vt), order, fld, rank, module_order=module_order, budget=budget)
    dicts = []
    for v in vectors:
        d = {}
        for pos, f in enumerate(v):
            for m, c in f.terms.items():
                d[(pos, m)] = fld.from_poly(c)
        dicts.append(d)
    res = _buchberger(eng, dicts)
    return [[_dict_to_poly(d, vt, fld, pos) for pos in range(rank)] for d in res]


def module_normal_form(vec: Sequence[Poly], basis: Sequence[Sequence[Poly]], order: Optional[MonomialOrder] = None,
                       module_order: str = "top") -> List[Poly]:
    """Remainder of a vector modulo a module Groebner basis (same order)."""
    rank = len(vec)
    vt, dom = vec[0].vt, vec[0].domain
    order = order or MonomialOrder.block(vt)
    fld = _Field(dom)
    eng = _Engine(len(vt), order, fld, rank, module_order=module_order)

    def to_dict(v):
        d = {}
        for pos, f in enumerate(v):
            for m, c in f.terms.items():
                d[(pos, m)] = fld.from_poly(c)
        return d

    elems = []
    for b in basis:
        d = to_dict(b)
        if d:
            elems.append(_Elem(eng.monic(d), eng, max(sum(m) for _, m in d)))
    r = eng.reduce(to_dict(vec), elems)
    return [_dict_to_poly(r, vt, fld, pos) for pos in range(rank)]


def syzygies(gens: Sequence[Poly], order: Optional[MonomialOrder] = None,
             budget: Optional[int] = None) -> SyzygyMatrix:
    """Generating set of the syzygy module of ``gens``.

    The module spanned by ``(g_i, e_i)`` is computed with the first
    component eliminated; its basis elements without a first component
    restrict to a Groebner basis of the syzygies (hence a complete set).
    """
    gens = list(gens)
    vt, dom = _prep(gens)
    k = len(gens)
    one = Poly.const(vt, 1, dom)
    zero = Poly.zero(vt, dom)
    vecs = []
    for i, g in enumerate(gens):
        v = [g] + [zero] * k
        v[1 + i] = one
        vecs.append(v)
    order = order or MonomialOrder.block(vt)
    fld = _Field(dom)
    eng = _Engine(len(vt), order, fld, k + 1, module_order="elim0", budget=budget)
    dicts = []
    for v in vecs:
        d = {}
        for pos, f in enumerate(v):
            for m, c in f.terms.items():
                d[(pos, m)] = fld.from_poly(c)
        dicts.append(d)
    res = _buchberger(eng, dicts)
    cols = []
    for d in res:
        if any(pos == 0 for pos, _ in d):
            continue
        cols.append([_dict_to_poly(d, vt, fld, pos) for pos in range(1, k + 1)])
    return SyzygyMatrix(gens, cols)
