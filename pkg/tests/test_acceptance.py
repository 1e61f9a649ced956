"""Acceptance criteria, one test each.

Every check is an exact integer or cyclotomic comparison, so no numerical
tolerance appears.  Each test prints a single ``criterion N name: PASS|FAIL``
line, and a summary is printed when the module finishes.

The literal reading of criterion 7 is false (ill-defined maps and a parity
claim that fails once n0 < n).  It runs as a strict xfail: the test goes red
if the literal statement ever starts to hold, and the failing counts are
printed alongside.
"""
import pytest

from artifact import suites

RESULTS = {}


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    capman = request.config.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\nacceptance summary")
        for i, name in enumerate(suites.CRITERIA, 1):
            if name in RESULTS:
                print(f"  criterion {i:2d} {name}: {'PASS' if RESULTS[name] else 'FAIL'}")


def _run(capsys, name, **kw):
    rep = suites.run(name, **kw)
    RESULTS[name] = bool(rep["pass"])
    idx = suites.CRITERIA.index(name) + 1
    with capsys.disabled():
        print(f"\ncriterion {idx} {name}: {'PASS' if rep['pass'] else 'FAIL'}")
    return rep


def _failed(rep):
    return [c for c in rep["checks"] if not c["pass"]][:5]


def test_criterion_01_maximality(capsys):
    rep = _run(capsys, "maximality")
    assert rep["pass"], _failed(rep)


def test_criterion_02_dimensions(capsys):
    rep = _run(capsys, "dimensions")
    assert rep["pass"], _failed(rep)


def test_criterion_03_inner_products(capsys):
    rep = _run(capsys, "inner_products")
    assert rep["pass"], _failed(rep)


def test_criterion_04_very_regular(capsys):
    rep = _run(capsys, "very_regular")
    assert rep["pass"], _failed(rep)


def test_criterion_05_howe(capsys):
    rep = _run(capsys, "howe")
    assert rep["pass"], _failed(rep)


def test_criterion_06_index_closed_forms(capsys):
    rep = _run(capsys, "index_closed_forms")
    assert rep["pass"], _failed(rep)


@pytest.mark.xfail(strict=True, reason="literal statement fails for n0 < n; see decisions ledger")
def test_criterion_07_ij_lemma(capsys):
    rep = _run(capsys, "ij_lemma")
    with capsys.disabled():
        print("  " + ", ".join(f"{c['name']}={c['got']}" for c in rep["checks"]))
    assert rep["pass"], _failed(rep)


def test_criterion_07_holds_when_n0_equals_n():
    rep = suites.run("ij_lemma")
    restricted = rep["n0_equals_n"]
    assert restricted["cases"] > 0
    assert all(v == 0 for k, v in restricted.items() if k != "cases")


def test_criterion_08_det_contr(capsys):
    rep = _run(capsys, "det_contr")
    assert rep["pass"], _failed(rep)


def test_criterion_09_normal_form(capsys):
    rep = _run(capsys, "normal_form")
    assert rep["pass"], _failed(rep)


def test_criterion_10_lang_section(capsys):
    rep = _run(capsys, "lang_section")
    assert rep["pass"], _failed(rep)


def test_criterion_11_lti(capsys):
    rep = _run(capsys, "lti")
    assert rep["pass"], _failed(rep)


def test_criterion_12_twisted_ring(capsys):
    rep = _run(capsys, "twisted_ring")
    assert rep["pass"], _failed(rep)


def test_criterion_13_cxh(capsys):
    rep = _run(capsys, "cxh")
    assert rep["pass"], _failed(rep)
