"""Multivariate polynomials with named variables and formal parameters.

A :class:`VarTable` lists the ring variables followed by the parameters
(``q_``, ``s_``, ``t_`` in the families).  Parameters are ordinary symbols that
sit in the smallest block of the default block order.  Exponent vectors are
dense tuples over ``VarTable.symbols``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exactalg import DvrContext, ExactAlgError, vp

Monomial = Tuple[int, ...]


class PolyError(ValueError):
    """Invalid polynomial operation or input."""


# ---------------------------------------------------------------- domains

@dataclass(frozen=True)
class Domain:
    """Coefficient domain: ``ZZ``, ``QQ`` or ``GF`` with a prime modulus."""

    kind: str
    p: int = 0

    def __post_init__(self):
        if self.kind not in ("ZZ", "QQ", "GF"):
            raise PolyError(f"unknown coefficient domain {self.kind!r}")
        if self.kind == "GF" and self.p < 2:
            raise PolyError("finite field needs a prime modulus")

    @property
    def is_field(self) -> bool:
        return self.kind != "ZZ"

    def convert(self, c):
        if self.kind == "ZZ":
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    raise PolyError(f"{c} is not an integer")
                return c.numerator
            return int(c)
        if self.kind == "QQ":
            return Fraction(c)
        if isinstance(c, Fraction):
            if c.denominator % self.p == 0:
                raise PolyError(f"coefficient {c} is not integral at {self.p}")
            return c.numerator * pow(c.denominator, -1, self.p) % self.p
        return int(c) % self.p

    def __str__(self):
        return f"GF({self.p})" if self.kind == "GF" else self.kind


ZZ = Domain("ZZ")
QQ = Domain("QQ")


def GF(p: int) -> Domain:
    return Domain("GF", p)


# ---------------------------------------------------------------- variables

@dataclass(frozen=True)
class VarTable:
    """Ordered ring variables followed by ordered parameters."""

    variables: Tuple[str, ...]
    params: Tuple[str, ...] = ()

    def __post_init__(self):
        names = self.variables + self.params
        if len(set(names)) != len(names):
            raise PolyError("symbol names must be unique")

    @property
    def symbols(self) -> Tuple[str, ...]:
        return self.variables + self.params

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def __len__(self):
        return len(self.variables) + len(self.params)

    def index(self, name: str) -> int:
        try:
            return self.symbols.index(name)
        except ValueError:
            raise PolyError(f"unknown symbol {name!r}") from None

    def is_param(self, name: str) -> bool:
        return name in self.params

    def extend(self, new_vars: Sequence[str] = (), front: bool = True) -> "VarTable":
        if front:
            return VarTable(tuple(new_vars) + self.variables, self.params)
        return VarTable(self.variables + tuple(new_vars), self.params)


# ---------------------------------------------------------------- orders

class MonomialOrder:
    """A monomial order given by blocks of symbol indices.

    Each block is compared with its own inner order (``lex`` or
    ``grevlex``); earlier blocks dominate later ones.  ``key(m)`` returns an
    integer tuple that sorts increasingly with the order.
    """

    def __init__(self, nsyms: int, blocks: Sequence[Tuple[Sequence[int], str]], name: str = ""):
        seen = sorted(i for b, _ in blocks for i in b)
        if seen != list(range(nsyms)):
            raise PolyError("order blocks must partition the symbols")
        for _, kind in blocks:
            if kind not in ("lex", "grevlex"):
                raise PolyError(f"unknown inner order {kind!r}")
        self.nsyms = nsyms
        self.blocks = tuple((tuple(b), k) for b, k in blocks)
        self.name = name or "block"
        self._cache: Dict[Monomial, Tuple[int, ...]] = {}

    @staticmethod
    def lex(n: int) -> "MonomialOrder":
        return MonomialOrder(n, [(range(n), "lex")], "lex")

    @staticmethod
    def grevlex(n: int) -> "MonomialOrder":
        return MonomialOrder(n, [(range(n), "grevlex")], "grevlex")

    @staticmethod
    def block(vt: VarTable, inner: str = "grevlex") -> "MonomialOrder":
        """Variables dominate parameters; each block uses ``inner``."""
        nv = vt.nvars
        blocks = [(range(nv), inner)]
        if vt.params:
            blocks.append((range(nv, len(vt)), inner))
        return MonomialOrder(len(vt), blocks, f"block-{inner}")

    @staticmethod
    def elimination(n: int, drop: Sequence[int], inner: str = "grevlex") -> "MonomialOrder":
        drop = sorted(set(drop))
        rest = [i for i in range(n) if i not in drop]
        blocks = [(drop, inner)]
        if rest:
            blocks.append((rest, inner))
        return MonomialOrder(n, blocks, "elimination")

    def key(self, m: Monomial) -> Tuple[int, ...]:
        k = self._cache.get(m)
        if k is None:
            parts: List[int] = []
            for idx, kind in self.blocks:
                if kind == "lex":
                    parts.extend(m[i] for i in idx)
                else:
                    parts.append(sum(m[i] for i in idx))
                    parts.extend(-m[i] for i in reversed(idx))
            k = tuple(parts)
            if len(self._cache) < 500000:
                self._cache[m] = k
        return k

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"MonomialOrder({self.name})"


# ---------------------------------------------------------------- polynomials

def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


class Poly:
    """Exact polynomial over ``domain`` in the symbols of ``vt``.

    ``terms`` maps exponent tuples to nonzero coefficients.  Instances are
    treated as immutable.
    """

    __slots__ = ("vt", "domain", "terms")

    def __init__(self, vt: VarTable, terms: Mapping[Monomial, object] = (), domain: Domain = QQ):
        self.vt = vt
        self.domain = domain
        clean = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for m, c in items:
            if len(m) != len(vt):
                raise PolyError("exponent vector has the wrong length")
            c = domain.convert(c)
            if c:
                clean[tuple(m)] = c
        self.terms: Dict[Monomial, object] = clean

    # -- constructors
    @staticmethod
    def zero(vt: VarTable, domain: Domain = QQ) -> "Poly":
        return Poly(vt, {}, domain)

    @staticmethod
    def const(vt: VarTable, c, domain: Domain = QQ) -> "Poly":
        return Poly(vt, {(0,) * len(vt): c}, domain)

    @staticmethod
    def symbol(vt: VarTable, name: str, domain: Domain = QQ) -> "Poly":
        e = [0] * len(vt)
        e[vt.index(name)] = 1
        return Poly(vt, {tuple(e): 1}, domain)

    @staticmethod
    def _raw(vt: VarTable, terms: Dict[Monomial, object], domain: Domain) -> "Poly":
        p = Poly.__new__(Poly)
        p.vt = vt
        p.domain = domain
        p.terms = terms
        return p

    # -- helpers
    def _check(self, other: "Poly"):
        if not isinstance(other, Poly):
            raise PolyError("operand is not a polynomial")
        if other.vt != self.vt:
            raise PolyError("polynomials over different symbol tables")
        if other.domain != self.domain:
            raise PolyError(f"domain mismatch: {self.domain} versus {other.domain}")

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.vt, other, self.domain)

    def _norm(self, c):
        if self.domain.kind == "GF":
            return c % self.domain.p
        return c

    # -- arithmetic
    def __add__(self, other) -> "Poly":
        other = self._lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = self._norm(out.get(m, 0) + c)
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly._raw(self.vt, out, self.domain)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.vt, {m: self._norm(-c) for m, c in self.terms.items()}, self.domain)

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return self._lift(other) - self

    def __mul__(self, other) -> "Poly":
        other = self._lift(other)
        out: Dict[Monomial, object] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        res = {}
        for m, c in out.items():
            c = self._norm(c)
            if c:
                res[m] = c
        return Poly._raw(self.vt, res, self.domain)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise PolyError("negative powers are not polynomials")
        result = Poly.const(self.vt, 1, self.domain)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.vt == other.vt and self.domain == other.domain and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(self.vt, other, self.domain)
        return NotImplemented

    def __hash__(self):
        return hash((self.vt, self.domain, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * len(self.vt), 0)

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def support_symbols(self) -> List[str]:
        used = set()
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used.add(i)
        return [self.vt.symbols[i] for i in sorted(used)]

    def leading(self, order: MonomialOrder) -> Tuple[Monomial, object]:
        if not self.terms:
            raise PolyError("zero polynomial has no leading term")
        m = max(self.terms, key=order.key)
        return m, self.terms[m]

    def sorted_terms(self, order: Optional[MonomialOrder] = None) -> List[Tuple[Monomial, object]]:
        order = order or MonomialOrder.block(self.vt)
        return sorted(self.terms.items(), key=lambda mc: order.key(mc[0]), reverse=True)

    def scale(self, c) -> "Poly":
        c = self.domain.convert(c)
        return Poly(self.vt, {m: x * c for m, x in self.terms.items()}, self.domain)

    def monic(self, order: MonomialOrder) -> "Poly":
        if not self.domain.is_field:
            raise PolyError("monic normalization needs a field")
        _, lc = self.leading(order)
        if self.domain.kind == "GF":
            return self.scale(pow(lc, -1, self.domain.p))
        return self.scale(Fraction(1) / lc)

    # -- calculus and evaluation
    def derivative(self, name: str) -> "Poly":
        i = self.vt.index(name)
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                mm = list(m)
                mm[i] -= 1
                out[tuple(mm)] = c * m[i]
        return Poly(self.vt, out, self.domain)

    def evaluate(self, values: Mapping[str, object]):
        """Exact value at a full assignment of the symbols that occur."""
        vals = []
        for i, name in enumerate(self.vt.symbols):
            vals.append(values.get(name))
        total = 0
        for m, c in self.terms.items():
            term = c
            for i, e in enumerate(m):
                if e:
                    if vals[i] is None:
                        raise PolyError(f"symbol {self.vt.symbols[i]!r} is unassigned")
                    term = term * vals[i] ** e
            total = total + term
        if self.domain.kind == "GF":
            return total % self.domain.p
        return total

    def substitute(self, subs: Mapping[str, "Poly"]) -> "Poly":
        """Replace symbols by polynomials over the same table and domain."""
        idx = {self.vt.index(k): v for k, v in subs.items()}
        for v in idx.values():
            self._check(v)
        result = Poly.zero(self.vt, self.domain)
        powcache: Dict[Tuple[int, int], Poly] = {}
        for m, c in self.terms.items():
            keep = list(m)
            term = None
            for i, e in enumerate(m):
                if e and i in idx:
                    keep[i] = 0
                    key = (i, e)
                    if key not in powcache:
                        powcache[key] = idx[i] ** e
                    term = powcache[key] if term is None else term * powcache[key]
            mono = Poly._raw(self.vt, {tuple(keep): c}, self.domain)
            result = result + (mono if term is None else mono * term)
        return result

    def change_domain(self, target: Domain) -> "Poly":
        """Coefficientwise image in ``target`` (Q or F_p, or Z when integral)."""
        out = {}
        for m, c in self.terms.items():
            if target.kind == "GF":
                if isinstance(c, Fraction) and c.denominator % target.p == 0:
                    raise PolyError(f"coefficient {c} is not integral modulo {target.p}")
            out[m] = target.convert(c)
        return Poly(self.vt, out, target)

    def to_vartable(self, vt: VarTable) -> "Poly":
        """Re-express over a table that contains all used symbols."""
        pos = [vt.index(name) for name in self.vt.symbols]
        out = {}
        for m, c in self.terms.items():
            e = [0] * len(vt)
            for i, x in enumerate(m):
                if x:
                    e[pos[i]] = x
            out[tuple(e)] = c
        return Poly(vt, out, self.domain)

    # -- display
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!s} over {self.domain})"


def format_monomial(vt: VarTable, m: Monomial) -> str:
    parts = []
    for name, e in zip(vt.symbols, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def format_poly(f: Poly, order: Optional[MonomialOrder] = None) -> str:
    if f.is_zero():
        return "0"
    out = []
    for m, c in f.sorted_terms(order):
        neg = c < 0 if f.domain.kind != "GF" else False
        a = -c if neg else c
        mono = format_monomial(f.vt, m)
        if mono == "1":
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_']*)|(\*\*|[-+*^()/]))")


class _Parser:
    def __init__(self, text: str, vt: VarTable, domain: Domain):
        self.text = text
        self.vt = vt
        self.domain = domain
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            mt = _TOKEN.match(text, pos)
            if not mt or mt.end() == pos:
                raise PolyError(f"unexpected character {text[pos]!r} at column {pos + 1}")
            if mt.group(1):
                self.tokens.append(("int", mt.group(1), mt.start(1)))
            elif mt.group(2):
                self.tokens.append(("name", mt.group(2), mt.start(2)))
            else:
                op = mt.group(3)
                self.tokens.append(("op", "^" if op == "**" else op, mt.start(3)))
            pos = mt.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        t = self.peek()
        if t is None:
            raise PolyError("unexpected end of expression")
        self.i += 1
        return t

    def parse(self) -> Poly:
        if not self.tokens:
            raise PolyError("empty expression")
        f = self.expr()
        t = self.peek()
        if t is not None:
            raise PolyError(f"unexpected token {t[1]!r} at column {t[2] + 1}")
        return f

    def expr(self) -> Poly:
        t = self.peek()
        sign = 1
        if t and t[0] == "op" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
        f = self.term()
        if sign < 0:
            f = -f
        while True:
            t = self.peek()
            if t and t[0] == "op" and t[1] in "+-":
                self.take()
                g = self.term()
                f = f + g if t[1] == "+" else f - g
            else:
                return f

    def term(self) -> Poly:
        f = self.power()
        while True:
            t = self.peek()
            if t and t[0] == "op" and t[1] == "*":
                self.take()
                f = f * self.power()
            elif t and t[0] == "op" and t[1] == "/":
                self.take()
                d = self.power()
                if not d.is_constant() or d.is_zero():
                    raise PolyError(f"division only by nonzero constants (column {t[2] + 1})")
                c = d.constant_term()
                if self.domain.kind == "GF":
                    f = f.scale(pow(c, -1, self.domain.p))
                else:
                    f = Poly(f.vt, {m: Fraction(x) / c for m, x in f.terms.items()}, self.domain)
            elif t and (t[0] in ("int", "name") or (t[0] == "op" and t[1] == "(")):
                f = f * self.power()  # implicit multiplication
            else:
                return f

    def power(self) -> Poly:
        base = self.atom()
        t = self.peek()
        if t and t[0] == "op" and t[1] == "^":
            self.take()
            e = self.take()
            if e[0] != "int":
                raise PolyError(f"exponent must be a nonnegative integer (column {e[2] + 1})")
            return base ** int(e[1])
        return base

    def atom(self) -> Poly:
        t = self.take()
        if t[0] == "int":
            return Poly.const(self.vt, int(t[1]), self.domain)
        if t[0] == "name":
            if t[1] not in self.vt.symbols:
                raise PolyError(f"unknown symbol {t[1]!r} at column {t[2] + 1}")
            return Poly.symbol(self.vt, t[1], self.domain)
        if t[1] == "(":
            f = self.expr()
            c = self.take()
            if c[1] != ")":
                raise PolyError(f"expected ')' at column {c[2] + 1}")
            return f
        if t[1] == "-":
            return -self.power()
        raise PolyError(f"unexpected token {t[1]!r} at column {t[2] + 1}")


def parse_poly(text: str, vt: VarTable, domain: Domain = QQ) -> Poly:
    """Parse ``+ - * ^`` expressions with integer literals and identifiers."""
    return _Parser(text, vt, domain).parse()


# ---------------------------------------------------------------- operations

def poly_arith(f: Poly, g: Poly, op: str) -> Poly:
    f._check(g)
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise PolyError(f"unknown operation {op!r}")


def jacobian(relations: Sequence[Poly], names: Sequence[str]) -> List[List[Poly]]:
    """Matrix of formal partial derivatives, one row per relation."""
    if not relations:
        return []
    vt = relations[0].vt
    for n in names:
        vt.index(n)
    return [[f.derivative(n) for n in names] for f in relations]


@dataclass(frozen=True)
class AugmentationPoint:
    """Integer values for every symbol, modelling lambda: R -> O."""

    values: Tuple[Tuple[str, int], ...]
    ctx: DvrContext

    @staticmethod
    def make(values: Mapping[str, int], p: int) -> "AugmentationPoint":
        return AugmentationPoint(tuple(sorted((k, int(v)) for k, v in values.items())), DvrContext(p))

    def as_dict(self) -> Dict[str, int]:
        return dict(self.values)

    @property
    def p(self) -> int:
        return self.ctx.p

    def param_values(self, vt: VarTable) -> Dict[str, int]:
        d = self.as_dict()
        return {k: d[k] for k in vt.params if k in d}


def evaluate(obj, pt):
    """Evaluate a polynomial or a matrix of polynomials at a point."""
    values = pt.as_dict() if isinstance(pt, AugmentationPoint) else dict(pt)
    if isinstance(obj, Poly):
        return obj.evaluate(values)
    return [[evaluate(x, values) for x in row] for row in obj]


def change_domain(f: Poly, target: Domain) -> Poly:
    return f.change_domain(target)


def specialize(f: Poly, values: Mapping[str, object], vt_out: Optional[VarTable] = None) -> Poly:
    """Substitute numbers for some symbols and drop them from the table."""
    vt_out = vt_out or VarTable(
        tuple(v for v in f.vt.variables if v not in values),
        tuple(v for v in f.vt.params if v not in values))
    keep = [i for i, n in enumerate(f.vt.symbols) if n not in values]
    fixed = [(i, values[n]) for i, n in enumerate(f.vt.symbols) if n in values]
    pos = [vt_out.index(f.vt.symbols[i]) for i in keep]
    out: Dict[Monomial, object] = {}
    for m, c in f.terms.items():
        val = c
        for i, v in fixed:
            if m[i]:
                val = val * v ** m[i]
        if not val:
            continue
        e = [0] * len(vt_out)
        for i, j in zip(keep, pos):
            e[j] = m[i]
        e = tuple(e)
        out[e] = out.get(e, 0) + val
    dom = f.domain
    if dom.kind == "ZZ" and any(isinstance(x, Fraction) and x.denominator != 1 for x in out.values()):
        dom = QQ
    return Poly(vt_out, out, dom)
