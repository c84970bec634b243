import json
from dataclasses import replace

import numpy as np
import pytest

from causumx import Params, QuerySpec, evaluate_query
from causumx.effect import CateEstimate
from causumx.patterns import parse_pattern
from causumx.render import format_effect, format_p, render_csv, render_json, render_text, render_view_csv
from causumx.report import NO_SOLUTION, SummaryReport
from causumx.tabular import Dataset
from causumx.treatmine import ExplanationCandidate, LatticeNode


def _report(selected=True):
    d = Dataset.from_columns({"Country": ["DE", "FR", "US"], "Continent": ["Europe", "Europe", "NA"],
                              "Salary": [70.0, 60.0, 120.0]})
    q = QuerySpec(("Country",), "Salary")
    view = evaluate_query(d, q)
    pos = LatticeNode(parse_pattern('Role = "Data scientist"'), CateEstimate(36012.0, 900.0, 2e-4, 40, 60, 100))
    neg = LatticeNode(parse_pattern("Education = None"), CateEstimate(-38950.0, 1200.0, 3e-5, 20, 80, 100))
    cand = ExplanationCandidate(parse_pattern("Continent = Europe"), np.array([0, 1]), pos, neg)
    if not selected:
        return SummaryReport(q, Params(), view, [], NO_SOLUTION)
    return SummaryReport(q, Params(k=3), view, [cand])


def test_effect_and_p_format():
    assert format_effect(36012.0) == "36K"
    assert format_effect(-38950.0) == "-39K"
    assert format_effect(2.5) == "2.5"
    assert format_effect(1234567.0) == "1.23M"
    assert format_p(2e-4) == "p < 1e-3"
    assert format_p(3e-5) == "p < 1e-4"
    assert format_p(0.004) == "p < 1e-2"
    assert format_p(0.0) == "p < 1e-16"
    assert format_p(0.03) == "p < 0.05"


def test_sentence_shape():
    text = render_text(_report())
    assert text == (
        "For Continent = Europe, the most substantial effect on high Salary (effect size of 36K, p < 1e-3) "
        'is observed for Role = "Data scientist". Conversely, Education = None has the greatest adverse '
        "impact (effect size: -39K, p < 1e-4).\n")
    assert render_text(_report()) == text


def test_missing_direction_omitted():
    r = _report()
    r.selected[0] = replace(r.selected[0], neg=None)
    assert "Conversely" not in render_text(r)
    r.selected[0] = replace(r.selected[0], neg=r.selected[0].pos, pos=None)
    assert render_text(r).startswith('For Continent = Europe, Role = "Data scientist" has the greatest adverse')


def test_empty_selection():
    r = _report(selected=False)
    assert render_text(r) == "No feasible explanation summary.\n"
    doc = json.loads(render_json(r))
    assert doc["explanations"] == [] and doc["status"] == "no_solution"
    assert doc["summary"]["coverage_ok"] is False


def test_json_round_trip():
    r = _report()
    text = render_json(r)
    assert text.endswith("\n") and text == render_json(r)
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    e = doc["explanations"][0]
    assert e["covered_groups"] == [["DE"], ["FR"]]
    assert e["positive"]["cate"] == pytest.approx(36012.0, abs=1e-9)
    assert e["negative"]["p_value"] == pytest.approx(3e-5, rel=1e-9)
    assert e["weight"] == pytest.approx(r.selected[0].weight, rel=1e-9)
    s = doc["summary"]
    assert s["covered_count"] == 2 and s["coverage_fraction"] == pytest.approx(2 / 3)
    assert s["size_ok"] and not s["coverage_ok"]
    assert doc["view"][2] == {"avg": 120.0, "count": 1, "key": ["US"]}


def test_csv_outputs():
    r = _report()
    lines = render_csv(r).splitlines()
    assert lines[0].startswith("grouping_pattern,covered_count,weight")
    assert lines[1].startswith("Continent = Europe,2,")
    view = render_view_csv(r).splitlines()
    assert view[0] == "Country,avg_Salary,count,covered"
    assert view[1:] == ["DE,70,1,1", "FR,60,1,1", "US,120,1,0"]
