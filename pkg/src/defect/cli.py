"""Command-line front end.

    defect family <st|un|phi-uni> --p P --q Q --s S --t T [--json] [--primes LIST] [--budget N]
    defect ring FILE [--cover IDX...] [--json] [--budget N]
    defect verify paper [--primes LIST] [--jobs N] [--budget N] [--only TEXT]
    defect gb FILE --order <lex|grevlex>

Exit codes: 0 pass, 1 check failure, 2 input error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .defectcore import (CICover, CoverError, DefectError, ModelError, check_ci_cover, find_theta,
                         wiles_defect)
from .exactalg import is_prime
from .families import (FamilyId, FamilyInstance, RegimeError, ci_cover, expected_defect)
from .groebner import BudgetExceeded, buchberger
from .idealkit import PositiveDimensional, RingPresentation, SubringMap, staircase_dimension, standard_monomials
from .polyring import GF, QQ, AugmentationPoint, MonomialOrder, PolyError, VarTable, format_poly, parse_poly

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class RingFileError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# ---------------------------------------------------------------- ring files

_SECTIONS = ("vars", "params", "relations", "cover", "augmentation", "prime", "s_sequence")


@dataclass
class RingFile:
    """Parsed ring file.  Covers are lists of polynomial texts in r1, r2, ... and the symbols."""

    vars: Tuple[str, ...]
    params: Tuple[str, ...] = ()
    relations: List[str] = field(default_factory=list)
    covers: List[List[str]] = field(default_factory=list)
    augmentation: Dict[str, int] = field(default_factory=dict)
    prime: Optional[int] = None
    s_sequence: List[str] = field(default_factory=list)
    lines: Dict[Tuple[str, int], int] = field(default_factory=dict)
    source: Tuple[str, ...] = ()

    @property
    def vt(self) -> VarTable:
        return VarTable(self.vars, self.params)

    def presentation(self) -> RingPresentation:
        vt = self.vt
        return RingPresentation(vt, [self._poly(t, ("relations", i), vt) for i, t in enumerate(self.relations)],
                                QQ, {}, "ring file")

    def point(self) -> AugmentationPoint:
        if self.prime is None:
            raise RingFileError("missing 'prime' section", 1)
        vals = {v: 0 for v in self.vars}
        vals.update(self.augmentation)
        return AugmentationPoint.make(vals, self.prime)

    def cover_polys(self, k: int):
        rvt = VarTable(self.vars + tuple(f"r{i + 1}" for i in range(len(self.relations))), self.params)
        rels = self.presentation().relations
        out = []
        for j, text in enumerate(self.covers[k]):
            f = self._poly(text, ("cover", k * 1000 + j), rvt)
            subs = {f"r{i + 1}": self._lift(r, rvt) for i, r in enumerate(rels)}
            g = f.substitute(subs)
            out.append(self._drop(g))
        return out

    def theta(self) -> Optional[SubringMap]:
        if not self.s_sequence:
            return None
        vt = self.vt
        return SubringMap([self._poly(t, ("s_sequence", i), vt) for i, t in enumerate(self.s_sequence)])

    def _poly(self, text, key, vt):
        try:
            return parse_poly(text, vt, QQ)
        except PolyError as exc:
            line = self.lines.get(key, 1)
            m = re.search(r"column (\d+)", str(exc))
            col = int(m.group(1)) if m else 1
            raw = self.source[line - 1] if line <= len(self.source) else ""
            offset = raw.find(text)
            if offset >= 0:
                col += offset
            message = re.sub(r"\s*(at column \d+|\(column \d+\))", "", str(exc))
            raise RingFileError(message, line, col) from None

    def _lift(self, f, rvt):
        from .polyring import Poly
        n_extra = len(rvt.variables) - len(self.vars)
        terms = {}
        for m, c in f.terms.items():
            nv = len(self.vars)
            terms[m[:nv] + (0,) * n_extra + m[nv:]] = c
        return Poly(rvt, terms, QQ)

    def _drop(self, g):
        from .polyring import Poly
        nv = len(self.vars)
        n_extra = len(g.vt.variables) - nv
        terms = {}
        for m, c in g.terms.items():
            if any(m[nv:nv + n_extra]):
                raise DefectError("cover expression still contains relation symbols")
            terms[m[:nv] + m[nv + n_extra:]] = c
        return Poly(self.vt, terms, QQ)


def parse_ring_file(text: str) -> RingFile:
    """Line-oriented format: ``section: value`` or a header followed by indented lines; ``#`` comments."""
    data: Dict[str, List[Tuple[int, str]]] = {}
    covers: List[List[Tuple[int, str]]] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = re.match(r"^([A-Za-z_]+)\s*:(.*)$", line)
        if m and not raw[0].isspace():
            name, rest = m.group(1), m.group(2).strip()
            if name not in _SECTIONS:
                raise RingFileError(f"unknown section {name!r}", lineno)
            current = name
            if name == "cover":
                covers.append([])
            else:
                data.setdefault(name, [])
            if rest:
                _add(data, covers, name, lineno, rest)
            continue
        if current is None:
            raise RingFileError("text before the first section", lineno)
        if not raw[0].isspace():
            raise RingFileError("continuation lines must be indented", lineno)
        _add(data, covers, current, lineno, line.strip())

    def items(name):
        return data.get(name, [])

    vars_ = tuple(w for _, t in items("vars") for w in t.replace(",", " ").split())
    if not vars_:
        raise RingFileError("missing 'vars' section", 1)
    params = tuple(w for _, t in items("params") for w in t.replace(",", " ").split())
    rf = RingFile(vars_, params, source=tuple(text.splitlines()))
    for i, (ln, t) in enumerate(items("relations")):
        rf.relations.append(t)
        rf.lines[("relations", i)] = ln
    if not rf.relations:
        raise RingFileError("missing 'relations' section", 1)
    for k, cov in enumerate(covers):
        texts = []
        for j, (ln, t) in enumerate(cov):
            for part in _split_cover(t):
                if re.fullmatch(r"\d+", part):
                    part = f"r{part}"
                texts.append(part)
                rf.lines[("cover", k * 1000 + len(texts) - 1)] = ln
        rf.covers.append(texts)
    for ln, t in items("augmentation"):
        for part in t.split(","):
            if not part.strip():
                continue
            mm = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_']*)\s*=\s*(-?\d+)\s*", part)
            if not mm:
                raise RingFileError(f"expected 'symbol = integer', got {part.strip()!r}", ln,
                                    raw_col(text, ln, part))
            name = mm.group(1)
            if name not in vars_ + params:
                raise RingFileError(f"undeclared symbol {name!r}", ln, raw_col(text, ln, part))
            rf.augmentation[name] = int(mm.group(2))
    for ln, t in items("prime"):
        if not re.fullmatch(r"\d+", t.strip()) or not is_prime(int(t)):
            raise RingFileError(f"prime must be a prime number, got {t.strip()!r}", ln)
        rf.prime = int(t)
    for i, (ln, t) in enumerate(items("s_sequence")):
        for part in t.split(";"):
            if part.strip():
                rf.lines[("s_sequence", len(rf.s_sequence))] = ln
                rf.s_sequence.append(part.strip())
    # referenced symbols must be declared
    rf.presentation()
    for k in range(len(rf.covers)):
        rf.cover_polys(k)
    rf.theta()
    return rf


def raw_col(text: str, lineno: int, part: str) -> int:
    line = text.splitlines()[lineno - 1]
    idx = line.find(part.strip())
    return idx + 1 if idx >= 0 else 1


def _add(data, covers, name, lineno, text):
    if name == "cover":
        covers[-1].append((lineno, text))
    else:
        data[name].append((lineno, text))


def _split_cover(text: str) -> List[str]:
    """Split on commas at parenthesis depth zero."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


# ---------------------------------------------------------------- reports

def _fiber_dims(cover: CICover, primes: Sequence[int]) -> Dict[str, Optional[int]]:
    """Dimensions of the specialized cover + S-sequence over Q and over each GF(l)."""
    theta = cover.theta
    gens = cover.specialized(list(cover.relations) + (theta.images if theta else []))
    skip = set(cover.parent.regime.get("skip_primes", ()))
    out: Dict[str, Optional[int]] = {"QQ": standard_monomials(gens).dim}
    for ell in primes:
        if ell in skip:
            continue
        try:
            out[f"GF({ell})"] = standard_monomials([g.change_domain(GF(ell)) for g in gens]).dim
        except (PositiveDimensional, PolyError):
            out[f"GF({ell})"] = None
    return out


def _print_table(rows: List[Tuple[str, object]]) -> None:
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k.ljust(width)}  {v}")


def _report_rows(rep) -> List[Tuple[str, object]]:
    return [
        ("cover", rep.provenance.get("cover", "")),
        ("v(lambda(Ann))", rep.lambda_ann),
        ("v(lambda(Fitt))", rep.lambda_fitt),
        ("c1", rep.c1),
        ("len Hom(I/I^2)", rep.hom_I_length),
        ("lattice index", rep.lattice_kernel_length),
        ("D1", rep.d1),
        ("delta", rep.delta),
    ]


def cmd_family(args) -> int:
    try:
        fam = FamilyId.parse(args.family)
        inst = FamilyInstance(fam, args.p, args.q, args.s, args.t)
        cover = ci_cover(fam, inst)
    except (RegimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    start = time.perf_counter()
    rep = wiles_defect(cover, budget=args.budget)
    fibers = _fiber_dims(cover, args.primes)
    exp = expected_defect(inst)
    closed = {"c1": exp.c1, "d1": exp.d1, "delta": str(exp.delta), "regime_ok": exp.regime_ok}
    matches = (rep.c1, rep.d1, rep.delta) == (exp.c1, exp.d1, exp.delta)
    payload = {
        "family": fam.short,
        "instance": {"p": inst.p, "q": inst.q, "s": inst.s, "t": inst.t, "n": inst.n},
        "report": rep.to_dict(),
        "fibers": fibers,
        "closed_form": closed,
        "closed_form_matches": matches,
        "engine": {"order": rep.provenance.get("order"), "primes": list(args.primes)},
    }
    if exp.note:
        payload["regime_note"] = exp.note
    if args.timing:
        payload["seconds"] = round(time.perf_counter() - start, 3)
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        rows = [("family", fam.short),
                ("instance", f"p={inst.p} q={inst.q} s={inst.s} t={inst.t} (n={inst.n})")]
        rows += _report_rows(rep)
        rows.append(("fibers", " ".join(f"{k}:{v}" for k, v in fibers.items())))
        rows.append(("closed form", f"c1={exp.c1} D1={exp.d1} delta={exp.delta}"
                     + ("" if exp.regime_ok else " (outside the regime of the closed form)")))
        rows.append(("matches", "yes" if matches else "no"))
        _print_table(rows)
    if not exp.regime_ok:
        return EXIT_OK
    return EXIT_OK if matches else EXIT_FAIL


def _discover_covers(pres: RingPresentation, point, theta, budget) -> List[List]:
    """Subsets of the relations of the right size that pass cover validation."""
    specialized = CICover(pres, pres.relations, point)
    gens = specialized.specialized(pres.relations)
    dim, _ = staircase_dimension(gens, budget=budget)
    k = pres.vt.nvars - dim
    found = []
    for idx in combinations(range(len(pres.relations)), k):
        cov = CICover(pres, [pres.relations[i] for i in idx], point, theta, label=f"r{','.join(str(i + 1) for i in idx)}")
        try:
            if cov.theta is None:
                cov = cov.with_theta(find_theta(cov, budget=budget))
            check_ci_cover(cov, budget=budget)
        except (CoverError, ModelError, DefectError, PositiveDimensional):
            continue
        found.append(cov)
        if len(found) >= 2:
            break
    return found


def cmd_ring(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            rf = parse_ring_file(fh.read())
        pres = rf.presentation()
        point = rf.point()
        theta = rf.theta()
    except (OSError, RingFileError, PolyError, DefectError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    covers: List[CICover] = []
    if args.cover:
        bad = [i for i in args.cover if not 1 <= i <= len(pres.relations)]
        if bad:
            print(f"error: relation index out of range: {bad[0]}", file=sys.stderr)
            return EXIT_INPUT
        covers.append(CICover(pres, [pres.relations[i - 1] for i in args.cover], point, theta,
                              label="r" + ",".join(str(i) for i in args.cover)))
    else:
        for k in range(len(rf.covers)):
            covers.append(CICover(pres, rf.cover_polys(k), point, theta, label=f"cover {k + 1}"))
    if not covers:
        covers = _discover_covers(pres, point, theta, args.budget)
        if not covers:
            print("error: no complete-intersection cover found among the relations", file=sys.stderr)
            return EXIT_INPUT
    reps = []
    try:
        for cov in covers:
            if cov.theta is None:
                cov = cov.with_theta(find_theta(cov, budget=args.budget))
            reps.append(wiles_defect(cov, budget=args.budget))
    except CoverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    agree = all(reps[0].same_invariants(r) for r in reps[1:])
    if args.json:
        print(json.dumps({"reports": [r.to_dict() for r in reps], "covers_agree": agree},
                         sort_keys=True, indent=2))
    else:
        for i, rep in enumerate(reps):
            if i:
                print()
            _print_table(_report_rows(rep))
        if len(reps) > 1:
            print()
            print(f"covers agree: {'yes' if agree else 'no'}")
    return EXIT_OK if agree else EXIT_FAIL


def cmd_gb(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            rf = parse_ring_file(fh.read())
        pres = rf.presentation()
    except (OSError, RingFileError, PolyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    n = len(pres.vt)
    order = MonomialOrder.lex(n) if args.order == "lex" else MonomialOrder.grevlex(n)
    G = buchberger(pres.relations, order, budget=args.budget)
    for g in G.generators:
        print(format_poly(g, order))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.target != "paper":
        print(f"error: unknown verification target {args.target!r}", file=sys.stderr)
        return EXIT_INPUT
    from .suite import run_suite
    results = run_suite(primes=tuple(args.primes), budget=args.budget, jobs=args.jobs, only=args.only)
    if not results:
        print(f"error: no check name contains {args.only!r}", file=sys.stderr)
        return EXIT_INPUT
    failed = skipped = 0
    for r in results:
        print(r.line())
        failed += r.status == "FAIL"
        skipped += r.status == "SKIP"
    print(f"{len(results)} checks: {len(results) - failed - skipped} passed, {failed} failed, {skipped} skipped")
    if failed:
        return EXIT_FAIL
    return EXIT_BUDGET if skipped else EXIT_OK


# ---------------------------------------------------------------- entry point

def _primes(text: str) -> Tuple[int, ...]:
    try:
        ps = tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of primes: {text!r}") from None
    bad = [x for x in ps if not is_prime(x)]
    if bad:
        raise argparse.ArgumentTypeError(f"{bad[0]} is not prime")
    return ps


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="defect", description="Wiles defect computations for presented local rings.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def budget_opt(p):
        p.add_argument("--budget", type=int, default=None,
                       help="Groebner work budget (default: DEFECT_BUDGET or the engine default)")

    f = sub.add_parser("family", help="defect invariants of a built-in family instance")
    f.add_argument("family", choices=["st", "un", "phi-uni"])
    for name in ("p", "q", "s", "t"):
        f.add_argument(f"--{name}", type=int, required=True)
    f.add_argument("--json", action="store_true")
    f.add_argument("--primes", type=_primes, default=(3, 5, 7, 11, 13))
    f.add_argument("--timing", action="store_true", help="include wall-clock seconds in the report")
    budget_opt(f)
    f.set_defaults(func=cmd_family)

    r = sub.add_parser("ring", help="defect invariants of a ring file")
    r.add_argument("file")
    r.add_argument("--cover", type=int, nargs="+", metavar="IDX", help="relation indices (1-based) forming the cover")
    r.add_argument("--json", action="store_true")
    budget_opt(r)
    r.set_defaults(func=cmd_ring)

    v = sub.add_parser("verify", help="run the regression suite")
    v.add_argument("target", choices=["paper"])
    v.add_argument("--primes", type=_primes, default=(3, 5, 7, 11, 13))
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--only", default=None, help="run only checks whose name contains this text")
    budget_opt(v)
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gb", help="reduced Groebner basis of the relations in a ring file")
    g.add_argument("file")
    g.add_argument("--order", choices=["lex", "grevlex"], required=True)
    budget_opt(g)
    g.set_defaults(func=cmd_gb)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(list(argv) if argv is not None else None)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (RegimeError, RingFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DefectError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
