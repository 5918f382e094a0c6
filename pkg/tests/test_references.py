import pytest

from rydberg_wkb.errors import ParameterError
from rydberg_wkb.references import (OBSERVABLES, TARGET_SOURCE, Tolerance, compare,
                                    default_refs_path, default_tolerance, load_references,
                                    parse_references, select, sources_declared)

HEADER = "# sources: a, b\nobservable,n,l,j,value,uncertainty,source\n"


@pytest.fixture(scope="module")
def refs():
    return load_references()


def test_bundled_table_complete(refs):
    target = select(refs, sources={TARGET_SOURCE})
    assert len(select(target, observables={"fine-splitting"}, ls={1})) == 7
    assert len(select(target, observables={"fine-splitting"}, ls={2})) == 7
    assert len(select(target, observables={"defect", "defect-difference"})) == 7
    assert {r.observable for r in refs} == set(OBSERVABLES)


def test_bundled_sources_closed_set(refs):
    declared = None
    for line in default_refs_path().read_text().splitlines():
        if line.startswith("# sources:"):
            declared = {s.strip() for s in line.split(":", 1)[1].split(",")}
    assert set(sources_declared(refs)) == declared


def test_known_cells(refs):
    (row,) = select(refs, observables={"fine-splitting"}, ls={2}, ns={8}, sources={TARGET_SOURCE})
    assert row.value == 36.42e3
    (row,) = select(refs, observables={"defect"}, ls={0}, sources={"exp_li_2003"})
    assert row.value == 3.1312419 and row.uncertainty == pytest.approx(1e-6)


def test_undeclared_source_rejected():
    with pytest.raises(ParameterError, match="'c' not declared"):
        parse_references(HEADER + "defect,57,0,0.5,3.1,,c\n")


def test_missing_sources_header():
    with pytest.raises(ParameterError, match="sources"):
        parse_references("observable,n,l,j,value,uncertainty,source\n")


@pytest.mark.parametrize("row,msg", [
    ("defect,57,0,0.5,,,a", "value missing"),
    ("defect,57,0,0.5,x,,a", "'value'"),
    ("energy,57,0,0.5,1,,a", "unknown observable"),
    ("defect,57,0,0.5,1,a", "expected 7 fields"),
])
def test_bad_rows(row, msg):
    with pytest.raises(ParameterError, match=msg):
        parse_references(HEADER + row + "\n")


def test_compare_statuses():
    recs = parse_references(HEADER + "defect,57,0,0.5,3.0,,a\ndefect,57,1,0.5,2.0,,b\n"
                            "defect,57,2,1.5,1.0,,a\n")
    report = compare({("defect", 57, 0, 0.5): 3.0005, ("defect", 57, 1, 0.5): 2.5},
                     recs, check_sources=("a",))
    assert [r.status for r in report.rows] == ["pass", "info", "unmatched"]
    assert report.ok and len(report.unmatched) == 1
    report = compare({("defect", 57, 0, 0.5): 3.01}, recs[:1], check_sources=("a",))
    assert not report.ok
    d = report.as_dicts()[0]
    assert d["abs_dev"] == pytest.approx(0.01) and d["tolerance"] == "abs 0.001"


def test_default_tolerances(refs):
    by = {(r.observable, r.n, r.l): default_tolerance(r) for r in select(refs, sources={TARGET_SOURCE})}
    assert by[("defect", 57, 0)] == Tolerance(1e-3, False)
    assert by[("defect-difference", 57, 1)] == Tolerance(5e-5, False)
    assert by[("defect-difference", 57, 2)] == Tolerance(2e-5, False)
    assert by[("fine-splitting", 30, 1)] == Tolerance(2e-3, True)
    assert by[("fine-splitting", 8, 2)] == Tolerance(5e-3, True)
