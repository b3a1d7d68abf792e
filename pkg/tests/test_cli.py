import json
from pathlib import Path

import pytest

from defect.cli import main, parse_ring_file

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def family_json(capsys, fam, p, q, s, t):
    code, out, _ = run(capsys, "family", fam, "--p", p, "--q", q, "--s", s, "--t", t, "--json", "--primes", "3,7")
    return code, json.loads(out)


def table(out):
    rows = {}
    for line in out.splitlines():
        if line.strip():
            key, _, value = line.partition("  ")
            rows[key.strip()] = value.strip()
    return rows


def invariants(report):
    # the cover label and engine settings differ between the two entry points
    return {k: v for k, v in report.items() if k != "provenance"}


def test_family_steinberg_table(capsys):
    code, out, _ = run(capsys, "family", "st", "--p", 5, "--q", 11, "--s", 5, "--t", 5)
    assert code == 0
    rows = table(out)
    assert (rows["c1"], rows["D1"], rows["delta"]) == ("1", "3", "2")
    assert rows["matches"] == "yes"


def test_family_unipotent_json(capsys):
    code, data = family_json(capsys, "un", 5, 11, 5, 5)
    assert code == 0
    assert data["report"]["delta"] == "1"
    assert data["closed_form_matches"] is True
    assert data["fibers"] == {"QQ": 12, "GF(3)": 12, "GF(7)": 12}


def test_family_phi_uni_in_regime(capsys):
    # closed-form value at n = 1 with s = 0 and t = p^2
    code, data = family_json(capsys, "phi-uni", 5, 11, 0, 25)
    assert data["report"]["c1"] == 3
    assert data["report"]["delta"] == "3"
    assert code == 0


def test_family_phi_uni_out_of_regime_reports_without_failing(capsys):
    code, data = family_json(capsys, "phi-uni", 5, 11, 5, 5)
    assert code == 0
    assert data["closed_form"]["regime_ok"] is False
    assert "regime_note" in data


@pytest.mark.parametrize("args", [
    ("st", 5, 11, 5, 0),
    ("st", 4, 11, 5, 5),
    ("un", 5, 12, 5, 5),
    ("phi-uni", 5, 11, 3, 5),
])
def test_family_rejects_invalid_instances(capsys, args):
    fam, p, q, s, t = args
    code, out, err = run(capsys, "family", fam, "--p", p, "--q", q, "--s", s, "--t", t)
    assert code == 2
    assert err.startswith("error:")
    assert out == ""


def test_unknown_family_is_an_input_error(capsys):
    code, _, err = run(capsys, "family", "gl2", "--p", 5, "--q", 11, "--s", 5, "--t", 5)
    assert code == 2
    assert "error" in err


def test_bad_prime_list_is_an_input_error(capsys):
    code, _, err = run(capsys, "family", "st", "--p", 5, "--q", 11, "--s", 5, "--t", 5, "--primes", "3,4")
    assert code == 2
    assert "4 is not prime" in err


def test_family_output_is_deterministic(capsys):
    first = run(capsys, "family", "st", "--p", 7, "--q", 29, "--s", 7, "--t", 49, "--json")
    second = run(capsys, "family", "st", "--p", 7, "--q", 29, "--s", 7, "--t", 49, "--json")
    assert first == second


def test_ring_file_matches_family_report(capsys):
    code, out, _ = run(capsys, "ring", DATA / "steinberg_5_11_5_5.ring", "--json")
    assert code == 0
    ring = json.loads(out)["reports"][0]
    _, fam = family_json(capsys, "st", 5, 11, 5, 5)
    assert invariants(ring) == invariants(fam["report"])


def test_ring_cover_option_selects_relations(capsys):
    code, out, _ = run(capsys, "ring", DATA / "steinberg_5_11_5_5.ring", "--cover", 1, 2, 3, "--json")
    assert code == 0
    assert json.loads(out)["reports"][0]["delta"] == "2"


def test_ring_cover_index_out_of_range(capsys):
    code, _, err = run(capsys, "ring", DATA / "steinberg_5_11_5_5.ring", "--cover", 1, 2, 9)
    assert code == 2
    assert "out of range" in err


def test_complete_intersection_ring_has_no_defect(capsys):
    code, out, _ = run(capsys, "ring", DATA / "ci_curve.ring")
    assert code == 0
    assert table(out)["delta"] == "0"


def test_two_declared_covers_agree(capsys):
    code, out, _ = run(capsys, "ring", DATA / "steinberg_two_covers.ring", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["covers_agree"] is True
    assert [r["delta"] for r in data["reports"]] == ["2", "2"]


def test_undeclared_symbol_reports_line_and_column(capsys):
    code, _, err = run(capsys, "ring", DATA / "bad_symbol.ring")
    assert code == 2
    assert "line 3, column 9" in err
    assert "'w'" in err


def test_missing_ring_file(capsys, tmp_path):
    code, _, err = run(capsys, "ring", tmp_path / "absent.ring")
    assert code == 2
    assert err.startswith("error:")


def test_ring_file_sections_parse():
    rf = parse_ring_file((DATA / "steinberg_two_covers.ring").read_text())
    assert rf.vars == ("a", "b", "c", "alpha", "beta", "gamma")
    assert rf.covers == [["r1", "r2", "r3"], ["r1", "r2 + r6", "r3"]]
    assert rf.augmentation["q_"] == 10
    assert len(rf.s_sequence) == 3


def test_gb_orders_give_different_leading_terms(capsys):
    code, lex, _ = run(capsys, "gb", DATA / "ci_curve.ring", "--order", "lex")
    assert code == 0
    assert lex.strip() == "y^2 - 25*y"
    code, lex, _ = run(capsys, "gb", DATA / "steinberg_5_11_5_5.ring", "--order", "lex")
    code2, grevlex, _ = run(capsys, "gb", DATA / "steinberg_5_11_5_5.ring", "--order", "grevlex")
    assert code == code2 == 0
    assert lex != grevlex
    assert len(lex.splitlines()) >= 6


def test_verify_selected_checks_pass(capsys):
    code, out, _ = run(capsys, "verify", "paper", "--only", "9.", "--jobs", 2)
    assert code == 0
    lines = out.splitlines()
    assert all(line.startswith("PASS") for line in lines[:-1])
    assert lines[-1] == "3 checks: 3 passed, 0 failed, 0 skipped"


def test_verify_tiny_budget_skips_instead_of_failing(capsys):
    code, out, _ = run(capsys, "verify", "paper", "--only", "6.un.ann", "--budget", 5)
    assert code == 3
    assert out.startswith("SKIP")
    assert "budget exceeded, skipped" in out


def test_verify_budget_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DEFECT_BUDGET", "5")
    code, out, _ = run(capsys, "verify", "paper", "--only", "6.un.ann")
    assert code == 3
    assert "SKIP" in out


def test_verify_with_unmatched_filter_is_an_input_error(capsys):
    code, _, err = run(capsys, "verify", "paper", "--only", "no-such-check")
    assert code == 2
    assert "no check name contains" in err


def test_verify_out_of_regime_check_passes(capsys):
    code, out, _ = run(capsys, "verify", "paper", "--only", "3.phi-uni.out-of-regime")
    assert code == 0
    assert out.startswith("PASS")
