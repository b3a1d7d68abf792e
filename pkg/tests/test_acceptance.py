"""Acceptance harness: runs every suite check once and reports one line per criterion."""
import re

import pytest

from defect.suite import run_suite

CRITERIA = {
    "1": "Steinberg closed forms",
    "2": "unipotent closed forms",
    "3": "phi-unipotent closed forms",
    "4": "generator identities over QQ and prime fibers",
    "5": "fiber ranks, bases and socles",
    "6": "symbolic values of lambda(Ann), lambda(Fitt) and Jacobian minors",
    "7": "Steinberg elementary divisors and lattice index",
    "8": "dimension-one property suite",
    "9": "engine properties",
}


def criterion_of(name):
    return re.match(r"\d+", name).group(0)


@pytest.fixture(scope="module")
def results():
    return run_suite()


def test_every_check_belongs_to_a_criterion(results):
    assert {criterion_of(r.name) for r in results} == set(CRITERIA)


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_criterion(results, criterion, capsys):
    mine = [r for r in results if criterion_of(r.name) == criterion]
    bad = [r for r in mine if r.status != "PASS"]
    verdict = "PASS" if not bad else "FAIL"
    with capsys.disabled():
        print(f"\ncriterion {criterion} ({CRITERIA[criterion]}): {verdict}, "
              f"{len(mine) - len(bad)}/{len(mine)} checks pass")
        for r in bad:
            print(f"    {r.line()}")
    assert mine
    assert not bad, "; ".join(r.line() for r in bad)
