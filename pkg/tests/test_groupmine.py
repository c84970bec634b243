import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causumx.groupmine import dedup_grouping, min_support, mine_grouping_patterns, mining_attributes
from causumx.oracle import naive_frequent_patterns
from causumx.patterns import covered_indices, parse_pattern, MaskCache
from causumx.tabular import Dataset, QuerySpec, evaluate_query, partition_attributes


def test_min_support():
    assert min_support(0.1, 1000) == 100
    assert min_support(0.0, 10) == 1
    assert min_support(0.25, 10) == 3


def test_tau_zero_single_attribute():
    d = Dataset.from_columns({"g": list("aabbcc"), "y": [1, 2, 3, 4, 5, 6]})
    q = QuerySpec(("g",), "y")
    pats = mine_grouping_patterns(d, q, {"g"}, 0.0)
    assert [p.text for p in pats] == ["g = a", "g = b", "g = c"]


def test_tau_one_nothing_constant():
    d = Dataset.from_columns({"g": list("ab"), "h": list("xy"), "y": [1, 2]})
    assert mine_grouping_patterns(d, QuerySpec(("g",), "y"), {"g", "h"}, 1.0) == []


def test_mining_attributes_exclude_group_by(so_like):
    q = QuerySpec(("Country",), "Salary")
    assert mining_attributes({"Country", "Continent"}, q) == ["Continent"]
    assert mining_attributes({"Country"}, q) == ["Country"]


def test_dedup_keeps_shortest(so_like):
    q = QuerySpec(("Country",), "Salary")
    view = evaluate_query(so_like, q)
    pats = [parse_pattern(t) for t in ("Continent = EU AND Country = DE", "Country = DE",
                                       "Continent = NA", "Country = US", "Country = XX")]
    out = dedup_grouping(pats, so_like, q, view)
    assert [p.text for p in out] == ["Continent = NA", "Country = DE"]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_dedup_classes_distinct(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 60))
    gid = rng.integers(0, 8, n)
    attrs = {f"a{i}": [f"v{(g * (i + 3)) % (i + 2)}" for g in gid] for i in range(3)}
    d = Dataset.from_columns({"g": [f"g{v}" for v in gid], **attrs, "y": list(rng.normal(size=n))})
    q = QuerySpec(("g",), "y")
    view = evaluate_query(d, q)
    grouping, _ = partition_attributes(d, q)
    pats = mine_grouping_patterns(d, q, grouping, float(rng.random() * 0.5))
    out = dedup_grouping(pats, d, q, view)
    m = MaskCache(d)
    covs = [tuple(covered_indices(p, view, m)) for p in out]
    assert len(set(covs)) == len(covs)
    for p in pats:
        cov = tuple(covered_indices(p, view, m))
        if cov:
            rep = out[covs.index(cov)]
            assert (len(rep), rep.text) <= (len(p), p.text)


def _random_table(rng):
    n_attrs = int(rng.integers(1, 9))
    n = int(rng.integers(1, 201))
    cols = {}
    for i in range(n_attrs):
        k = int(rng.integers(1, 4))
        vals = [f"x{v}" for v in rng.integers(0, k, n)]
        miss = rng.random(n) < 0.05
        cols[f"a{i}"] = [None if m else v for v, m in zip(vals, miss)]
    cols["a0"] = [v if v is not None else "x0" for v in cols["a0"]]
    cols["y"] = list(rng.normal(size=n))
    return Dataset.from_columns(cols, {a: "categorical" for a in cols if a != "y"}), n_attrs


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_apriori_matches_naive(seed):
    rng = np.random.default_rng(seed)
    d, n_attrs = _random_table(rng)
    attrs = [f"a{i}" for i in range(n_attrs)]
    tau = float(rng.choice([0.0, rng.random() * 0.6]))
    q = QuerySpec(("a0",), "y")
    mined = set(mine_grouping_patterns(d, q, attrs + ["a0"], tau))
    expect = naive_frequent_patterns(d, mining_attributes(attrs, q), tau)
    assert mined == expect


def test_where_restricts_support():
    d = Dataset.from_columns({"g": list("aaab"), "h": list("xxyy"), "f": list("1100"), "y": [1, 2, 3, 4]})
    q = QuerySpec(("g",), "y", parse_pattern("f = 1"))
    pats = mine_grouping_patterns(d, q, {"g", "h"}, 0.5)
    assert [p.text for p in pats] == ["h = x"]
    assert pats == sorted(naive_frequent_patterns(d, ["h"], 0.5, q.where))
