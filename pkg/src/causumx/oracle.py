"""Exhaustive reference implementations and evaluation metrics.

These are deliberately simple and slow; they exist to check the pruned
search against ground truth on small instances.
"""
from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import replace
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from .config import Params
from .dag import CausalDag
from .effect import Estimator, Skip
from .errors import Infeasible, SizeError
from .groupmine import dedup_grouping, equality_predicates, min_support, mining_attributes
from .lpsolve import build_ilp, solve_ilp_exact
from .patterns import MaskCache, Pattern, SimplePredicate, covered_indices, numeric_cuts
from .report import NO_SOLUTION, OK, SummaryReport
from .tabular import evaluate_query, partition_attributes
from .treatmine import ExplanationCandidate, LatticeNode, TreatmentSearch, _rank_key

MAX_PATTERNS = 4096


def _options(d, attr, bins, base):
    col = d.column(attr)
    if col.kind == "categorical":
        return [SimplePredicate(attr, "=", v) for v in col.levels]
    out = []
    for c in numeric_cuts(col.values[base], bins):
        out += [SimplePredicate(attr, "<=", c), SimplePredicate(attr, ">", c)]
    return out


def all_patterns(option_lists: Sequence[Sequence[SimplePredicate]]) -> list[Pattern]:
    """Every non-empty conjunction with at most one predicate per attribute."""
    out = []
    for combo in product(*[[None] + list(opts) for opts in option_lists]):
        preds = [p for p in combo if p is not None]
        if preds:
            out.append(Pattern(preds))
    return sorted(out, key=lambda p: (len(p), p.text))


def _count(option_lists) -> int:
    return math.prod(len(o) + 1 for o in option_lists) - 1


def brute_force_candidates(d, q, g: CausalDag, params: Params, grouping_candidates=None,
                           view=None, masks=None):
    """All deduplicated grouping patterns with their exhaustive best treatments."""
    view = view or evaluate_query(d, q)
    masks = masks or MaskCache(d)
    grouping, treatments = partition_attributes(d, q, grouping_candidates)
    base = q.where_mask(d)
    g_opts = [equality_predicates(d, a, base) for a in mining_attributes(grouping, q)]
    full = replace(params, sample_size=max(params.sample_size, d.row_count))
    est = Estimator(d, q, g, full, masks)
    search = TreatmentSearch(est, treatments)
    t_opts = [_options(d, a, params.bins, est.base) for a in search.attrs]
    if _count(g_opts) > MAX_PATTERNS or _count(t_opts) > MAX_PATTERNS:
        raise SizeError(f"brute force would enumerate {_count(g_opts)} grouping x "
                        f"{_count(t_opts)} treatment patterns (bound {MAX_PATTERNS} each)")
    groupings = dedup_grouping(all_patterns(g_opts), d, q, view, masks)
    treatments_all = all_patterns(t_opts)
    cands = []
    for pg in groupings:
        eps = 0.01 * est.outcome_std(pg)
        pos = neg = None
        for pt in treatments_all:
            res = est.estimate(pg, pt)
            if isinstance(res, Skip) or res.p_value >= params.alpha or abs(res.cate) < eps or res.cate == 0:
                continue
            node = LatticeNode(pt, res)
            if res.cate > 0 and (pos is None or _rank_key(node) < _rank_key(pos)):
                pos = node
            if res.cate < 0 and (neg is None or _rank_key(node) < _rank_key(neg)):
                neg = node
        if pos is not None or neg is not None:
            cands.append(ExplanationCandidate(pg, covered_indices(pg, view, masks), pos, neg))
    return view, cands


def brute_force_summarize(d, q, g: CausalDag, params: Params, grouping_candidates=None) -> SummaryReport:
    t0 = time.perf_counter()
    view, cands = brute_force_candidates(d, q, g, params, grouping_candidates)
    t1 = time.perf_counter()
    try:
        sel = solve_ilp_exact(build_ilp(cands, view, params.k, params.theta))
        selected, status = [cands[j] for j in sel], OK
    except Infeasible:
        selected, status = [], NO_SOLUTION
    return SummaryReport(q, params, view, selected, status, "bruteforce", len(cands),
                         {"candidates": t1 - t0, "select": time.perf_counter() - t1})


def naive_frequent_patterns(d, attrs: Iterable[str], tau: float, where: Pattern | None = None) -> set[Pattern]:
    """Count every conjunction each row satisfies, then threshold."""
    attrs = sorted(attrs)
    if len(attrs) > 8 or d.row_count > 200:
        raise SizeError("naive enumeration is limited to 8 attributes and 200 rows")
    counts: Counter = Counter()
    n = 0
    for i in range(d.row_count):
        row = d.row(i)
        if where is not None and not where.matches(row):
            continue
        n += 1
        items = [(a, row[a]) for a in attrs if row[a] is not None]
        for r in range(1, len(items) + 1):
            for sub in combinations(items, r):
                counts[sub] += 1
    need = min_support(tau, n)
    return {Pattern(SimplePredicate(a, "=", v) for a, v in sub)
            for sub, c in counts.items() if c >= need}


def precision_recall(found: Iterable[int], truth: Iterable[int]) -> tuple[float, float]:
    found, truth = set(found), set(truth)
    hit = len(found & truth)
    precision = hit / len(found) if found else 1.0
    recall = hit / len(truth) if truth else 1.0
    return precision, recall


def kendall_tau(rank_a: Sequence, rank_b: Sequence) -> float:
    if len(set(rank_a)) != len(rank_a) or len(set(rank_b)) != len(rank_b):
        raise ValueError("rankings must not contain repeated items")
    if set(rank_a) != set(rank_b):
        raise ValueError("rankings must cover the same items")
    n = len(rank_a)
    if n < 2:
        return 1.0
    pos_b = {x: i for i, x in enumerate(rank_b)}
    s = 0
    for i in range(n):
        for j in range(i + 1, n):
            s += 1 if pos_b[rank_a[i]] < pos_b[rank_a[j]] else -1
    return s / (n * (n - 1) / 2)


def covered_rows(view, group_indices) -> np.ndarray:
    """Input rows whose group is among ``group_indices``."""
    hit = np.zeros(view.m + 1, dtype=bool)
    hit[np.asarray(list(group_indices), dtype=np.int64)] = True
    return np.flatnonzero(hit[view.row_group])  # row_group == -1 maps to the sentinel slot


def treated_rows(d, view, pg: Pattern, pt: Pattern, masks: MaskCache | None = None) -> np.ndarray:
    masks = masks or MaskCache(d)
    return np.flatnonzero((view.row_group >= 0) & masks.pattern(pg) & masks.pattern(pt))
