"""Exact arithmetic over Z, Q, F_p and the p-local DVR model.

The DVR O is modelled as Z localized at an odd prime p (ramification index 1).
Lengths of finite O-modules are p-adic valuations.  Matrices are plain lists of
rows holding Python ints or ``Fraction`` values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import List, Optional, Sequence, Tuple

Number = "int | Fraction"
Matrix = List[List]


class ExactAlgError(ValueError):
    """Raised for invalid input to an exact-arithmetic routine."""


class ContainmentError(ExactAlgError):
    """A lattice that was expected to be contained in another one is not."""

    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


# ---------------------------------------------------------------- scalars

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def vp(x, p: int) -> Optional[int]:
    """p-adic valuation of an int or Fraction; ``None`` stands for +infinity."""
    if x == 0:
        return None
    if isinstance(x, Fraction):
        return _vp_int(x.numerator, p) - _vp_int(x.denominator, p)
    return _vp_int(int(x), p)


def _vp_int(n: int, p: int) -> int:
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def prime_to_p_part(n: int, p: int) -> int:
    n = abs(n)
    while n and n % p == 0:
        n //= p
    return n


def min_valuation(values: Sequence, p: int) -> Optional[int]:
    """Valuation of the O-ideal generated by ``values`` (None if zero ideal)."""
    vals = [vp(x, p) for x in values if x != 0]
    return min(vals) if vals else None


@dataclass(frozen=True)
class FpElem:
    """Residue class modulo a prime, stored in [0, p)."""

    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, FpElem):
            if other.p != self.p:
                raise ExactAlgError("residues modulo different primes")
            return other.value
        return int(other)

    def __add__(self, other):
        return FpElem(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FpElem(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return FpElem(self._coerce(other) - self.value, self.p)

    def __mul__(self, other):
        return FpElem(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FpElem(-self.value, self.p)

    def inverse(self) -> "FpElem":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse modulo p")
        return FpElem(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * FpElem(self._coerce(other), self.p).inverse()

    def __eq__(self, other):
        if isinstance(other, FpElem):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __repr__(self):
        return f"{self.value} mod {self.p}"


@dataclass(frozen=True)
class DvrContext:
    """The DVR Z_(p) standing in for O, with e = 1."""

    p: int
    e: int = 1

    def __post_init__(self):
        if not is_prime(self.p) or self.p == 2:
            raise ExactAlgError(f"DVR context needs an odd prime, got {self.p}")
        if self.e != 1:
            raise ExactAlgError("only unramified O (e = 1) is supported")

    def v(self, x) -> Optional[int]:
        return vp(x, self.p)

    def ideal(self, values: Sequence) -> "OIdeal":
        return OIdeal(min_valuation(values, self.p))

    def is_integral(self, x) -> bool:
        return x == 0 or vp(x, self.p) >= 0


@dataclass(frozen=True)
class OIdeal:
    """The ideal (p^v) of O; ``valuation is None`` encodes the zero ideal."""

    valuation: Optional[int]

    @property
    def is_zero(self) -> bool:
        return self.valuation is None

    def length_of_quotient(self) -> int:
        if self.valuation is None:
            raise ExactAlgError("O modulo the zero ideal has infinite length")
        return self.valuation

    def __le__(self, other: "OIdeal") -> bool:
        # containment: (p^a) is inside (p^b) iff a >= b
        if self.valuation is None:
            return True
        if other.valuation is None:
            return False
        return self.valuation >= other.valuation

    def __str__(self):
        return "(0)" if self.valuation is None else f"(p^{self.valuation})"


# ---------------------------------------------------------------- matrices

def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(len(a))]


def transpose(m: Matrix) -> Matrix:
    return [list(r) for r in zip(*m)] if m else []


def det(m: Matrix):
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(r) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = num / prev if isinstance(num, Fraction) or isinstance(prev, Fraction) else num // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class SnfResult:
    """Smith form data: ``U * M * V == D`` with D diagonal."""

    diagonal: Tuple[int, ...]
    U: Tuple[Tuple[int, ...], ...]
    V: Tuple[Tuple[int, ...], ...]
    shape: Tuple[int, int]

    def diagonal_matrix(self) -> Matrix:
        r, c = self.shape
        d = [[0] * c for _ in range(r)]
        for i, x in enumerate(self.diagonal):
            d[i][i] = x
        return d

    @property
    def rank(self) -> int:
        return sum(1 for x in self.diagonal if x != 0)


def smith_normal_form(m: Sequence[Sequence[int]], check: bool = False) -> SnfResult:
    """Smith normal form over Z with unimodular transforms.

    Pivots are chosen of smallest absolute value.  The returned diagonal has
    ``min(rows, cols)`` nonnegative entries, each dividing the next.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [[int(x) for x in r] for r in m]
    U = identity(rows)
    V = identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, f):  # row_dst += f * row_src
        a[dst] = [x + f * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):  # col_dst += f * col_src
        for r in a:
            r[dst] += f * r[src]
        for r in V:
            r[dst] += f * r[src]

    n = min(rows, cols)
    for s in range(n):
        while True:
            best = None
            for i in range(s, rows):
                for j in range(s, cols):
                    x = a[i][j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
            if best is None:
                break
            _, i, j = best
            swap_rows(s, i)
            swap_cols(s, j)
            piv = a[s][s]
            done = True
            for i in range(s + 1, rows):
                if a[i][s]:
                    add_row(i, s, -(a[i][s] // piv))
                    if a[i][s]:
                        done = False
            for j in range(s + 1, cols):
                if a[s][j]:
                    add_col(j, s, -(a[s][j] // piv))
                    if a[s][j]:
                        done = False
            if not done:
                continue
            # divisibility: the pivot must divide the remaining block
            bad = None
            for i in range(s + 1, rows):
                for j in range(s + 1, cols):
                    if a[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(s, bad, 1)
        if a[s][s] < 0:
            a[s] = [-x for x in a[s]]
            U[s] = [-x for x in U[s]]
    diag = tuple(a[i][i] for i in range(n))
    res = SnfResult(diag, tuple(map(tuple, U)), tuple(map(tuple, V)), (rows, cols))
    if check:
        verify_snf(m, res)
    return res


def verify_snf(m, res: SnfResult) -> None:
    """Assert the defining identities of a Smith form result."""
    rows, cols = res.shape
    U = [list(r) for r in res.U]
    V = [list(r) for r in res.V]
    if rows and abs(det(U)) != 1:
        raise ExactAlgError("left transform is not unimodular")
    if cols and abs(det(V)) != 1:
        raise ExactAlgError("right transform is not unimodular")
    if rows and cols and mat_mul(mat_mul(U, [list(r) for r in m]), V) != res.diagonal_matrix():
        raise ExactAlgError("U*M*V is not the claimed diagonal")
    d = [x for x in res.diagonal]
    for x, y in zip(d, d[1:]):
        if (x == 0 and y != 0) or (x != 0 and y % x != 0):
            raise ExactAlgError("diagonal divisibility chain broken")


def gcd_of_minors(m: Sequence[Sequence[int]], i: int) -> int:
    """gcd of all i x i minors of an integer matrix (0 if all vanish)."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    if i < 1 or i > min(rows, cols):
        raise ExactAlgError(f"minor size {i} out of range for a {rows}x{cols} matrix")
    g = 0
    for rs in combinations(range(rows), i):
        for cs in combinations(range(cols), i):
            g = gcd(g, int(det([[m[r][c] for c in cs] for r in rs])))
            if g == 1:
                return 1
    return g


def elementary_divisor_valuations(m: Sequence[Sequence], p: int) -> List[Optional[int]]:
    """p-adic valuations of the Smith diagonal of a matrix over Z_(p).

    Entries may be p-integral fractions.  ``None`` marks a zero divisor
    (rank deficiency).  Output has ``min(rows, cols)`` entries, sorted.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [[Fraction(x) for x in r] for r in m]
    out: List[Optional[int]] = []
    r0 = 0
    active_cols = list(range(cols))
    while r0 < rows and active_cols:
        best = None
        for i in range(r0, rows):
            for j in active_cols:
                x = a[i][j]
                if x:
                    v = vp(x, p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        if v < 0:
            raise ExactAlgError("matrix entry is not p-integral")
        a[r0], a[i] = a[i], a[r0]
        piv = a[r0][j]
        for k in range(r0 + 1, rows):
            if a[k][j]:
                f = a[k][j] / piv
                a[k] = [x - f * y for x, y in zip(a[k], a[r0])]
        active_cols.remove(j)
        out.append(v)
        r0 += 1
    while len(out) < min(rows, cols):
        out.append(None)
    return sorted(out, key=lambda x: (x is None, x))


# ---------------------------------------------------------------- lattices

def _normalize_row(row: Sequence, p: int) -> List[Fraction]:
    """Scale a vector by a p-adic unit so its entries are small."""
    fr = [Fraction(x) for x in row]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    u = prime_to_p_part(den, p)
    fr = [x * u for x in fr]
    g = 0
    for x in fr:
        if x:
            g = gcd(g, x.numerator)
    g = prime_to_p_part(g, p)
    if g > 1:
        fr = [x / g for x in fr]
    return fr


def p_local_echelon(rows: Sequence[Sequence], p: int) -> List[List[Fraction]]:
    """A Z_(p)-basis (echelon form) of the module spanned by ``rows``."""
    work = [_normalize_row(r, p) for r in rows]
    work = [r for r in work if any(r)]
    basis: List[List[Fraction]] = []
    n = len(work[0]) if work else 0
    for j in range(n):
        best = None
        for idx, r in enumerate(work):
            if r[j]:
                v = vp(r[j], p)
                if best is None or v < best[0]:
                    best = (v, idx)
        if best is None:
            continue
        piv_row = work.pop(best[1])
        piv = piv_row[j]
        nxt = []
        for r in work:
            if r[j]:
                f = r[j] / piv
                r = [x - f * y for x, y in zip(r, piv_row)]
            if any(r):
                nxt.append(_normalize_row(r, p))
        work = nxt
        basis.append(piv_row)
    return basis


def solve_rational(a: Matrix, b: Matrix) -> Optional[Matrix]:
    """Solve X * a = b over Q (rows of b as combinations of rows of a)."""
    r = len(a)
    n = len(a[0]) if r else 0
    # Gaussian elimination on the transposed system a^T x^T = b^T
    aug = [[Fraction(a[i][j]) for i in range(r)] + [Fraction(row[j]) for row in b] for j in range(n)]
    nb = len(b)
    piv_cols = []
    row_i = 0
    for c in range(r):
        sel = None
        for k in range(row_i, n):
            if aug[k][c]:
                sel = k
                break
        if sel is None:
            continue
        aug[row_i], aug[sel] = aug[sel], aug[row_i]
        pv = aug[row_i][c]
        aug[row_i] = [x / pv for x in aug[row_i]]
        for k in range(n):
            if k != row_i and aug[k][c]:
                f = aug[k][c]
                aug[k] = [x - f * y for x, y in zip(aug[k], aug[row_i])]
        piv_cols.append(c)
        row_i += 1
    for k in range(row_i, n):
        if any(aug[k][r:]):
            return None
    x = [[Fraction(0)] * r for _ in range(nb)]
    for idx, c in enumerate(piv_cols):
        for t in range(nb):
            x[t][c] = aug[idx][r + t]
    return x


def rational_nullspace(m: Matrix, ncols: Optional[int] = None) -> List[List[Fraction]]:
    """Basis of {x : m x = 0} over Q (right kernel)."""
    rows = len(m)
    n = ncols if ncols is not None else (len(m[0]) if rows else 0)
    a = [[Fraction(x) for x in r] for r in m]
    piv_cols = []
    ri = 0
    for c in range(n):
        sel = None
        for k in range(ri, rows):
            if a[k][c]:
                sel = k
                break
        if sel is None:
            continue
        a[ri], a[sel] = a[sel], a[ri]
        pv = a[ri][c]
        a[ri] = [x / pv for x in a[ri]]
        for k in range(rows):
            if k != ri and a[k][c]:
                f = a[k][c]
                a[k] = [x - f * y for x, y in zip(a[k], a[ri])]
        piv_cols.append(c)
        ri += 1
        if ri == rows:
            break
    free = [c for c in range(n) if c not in set(piv_cols)]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * n
        v[fcol] = Fraction(1)
        for idx, pc in enumerate(piv_cols):
            v[pc] = -a[idx][fcol]
        basis.append(v)
    return basis


def rational_rank(m: Matrix) -> int:
    if not m:
        return 0
    return len(m[0]) - len(rational_nullspace(m))


def _mod_p_left_dependency(rows: List[List[int]], p: int) -> Optional[List[int]]:
    """A nonzero c (mod p) with sum c_i rows_i == 0 mod p, if one exists."""
    r = len(rows)
    if r == 0:
        return None
    n = len(rows[0])
    # row reduce [rows | I] mod p
    aug = [[x % p for x in rows[i]] + [1 if k == i else 0 for k in range(r)] for i in range(r)]
    ri = 0
    for c in range(n):
        sel = None
        for k in range(ri, r):
            if aug[k][c]:
                sel = k
                break
        if sel is None:
            continue
        aug[ri], aug[sel] = aug[sel], aug[ri]
        inv = pow(aug[ri][c], -1, p)
        aug[ri] = [(x * inv) % p for x in aug[ri]]
        for k in range(r):
            if k != ri and aug[k][c]:
                f = aug[k][c]
                aug[k] = [(x - f * y) % p for x, y in zip(aug[k], aug[ri])]
        ri += 1
    for k in range(ri, r):
        if not any(aug[k][:n]):
            return aug[k][n:]
    return None


def p_saturate(rows: Sequence[Sequence], p: int) -> List[List[Fraction]]:
    """Z_(p)-basis of (span_Q rows) intersected with Z_(p)^n."""
    basis = [_normalize_row(r, p) for r in p_local_echelon(rows, p)]
    # clear p-power denominators: the saturation only depends on the Q-span
    ints = []
    for r in basis:
        den = 1
        for x in r:
            den = den * x.denominator // gcd(den, x.denominator)
        v = [int(x * den) for x in r]
        g = 0
        for x in v:
            g = gcd(g, x)
        ints.append([x // g for x in v])
    while True:
        dep = _mod_p_left_dependency(ints, p)
        if dep is None:
            break
        k = next(i for i, c in enumerate(dep) if c)
        combo = [sum(dep[i] * ints[i][j] for i in range(len(ints))) for j in range(len(ints[0]))]
        new = [x // p for x in combo]
        g = 0
        for x in new:
            g = gcd(g, x)
        ints[k] = [x // g for x in new] if g else new
    return [[Fraction(x) for x in r] for r in ints]


def integral_kernel(m: Matrix, p: int, ncols: Optional[int] = None) -> List[List[Fraction]]:
    """Saturated Z_(p)-basis of the right kernel of a rational matrix."""
    ns = rational_nullspace(m, ncols)
    if not ns:
        return []
    return p_saturate(ns, p)


@dataclass(frozen=True)
class Lattice:
    """A finitely generated Z_(p)-submodule of Q^n given by spanning rows."""

    rows: Tuple[Tuple[Fraction, ...], ...]
    n: int

    @staticmethod
    def from_rows(rows: Sequence[Sequence], n: Optional[int] = None) -> "Lattice":
        rs = tuple(tuple(Fraction(x) for x in r) for r in rows)
        if n is None:
            if not rs:
                raise ExactAlgError("ambient dimension needed for an empty lattice")
            n = len(rs[0])
        for r in rs:
            if len(r) != n:
                raise ExactAlgError("lattice rows of inconsistent length")
        return Lattice(rs, n)

    def basis(self, p: int) -> List[List[Fraction]]:
        return p_local_echelon([list(r) for r in self.rows], p)

    def rank(self) -> int:
        return rational_rank([list(r) for r in self.rows]) if self.rows else 0

    def contains(self, v: Sequence, p: int) -> bool:
        b = self.basis(p)
        if not b:
            return not any(v)
        sol = solve_rational(b, [list(v)])
        if sol is None:
            return False
        return all(x == 0 or vp(x, p) >= 0 for x in sol[0])


def lattice_quotient_length(big: Lattice, small: Lattice, ctx: DvrContext) -> int:
    """O-length of big/small, for small contained in big of equal rank."""
    p = ctx.p
    if big.n != small.n:
        raise ExactAlgError("lattices live in different ambient spaces")
    bb = big.basis(p)
    sb = small.basis(p)
    if len(bb) != len(sb):
        raise ExactAlgError(f"rank mismatch: {len(bb)} versus {len(sb)}")
    if not bb:
        return 0
    t = solve_rational(bb, sb)
    if t is None:
        raise ContainmentError("small lattice is not in the span of the big one", None)
    for row, vec in zip(t, sb):
        if any(x != 0 and vp(x, p) < 0 for x in row):
            raise ContainmentError("small lattice is not contained in the big one", vec)
    d = det(t)
    return vp(d, p)
