"""Frequent grouping patterns (Apriori) and removal of redundant ones."""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .patterns import MaskCache, Pattern, SimplePredicate, covered_indices


def mining_attributes(grouping_attrs: Iterable[str], q) -> list[str]:
    """FD attributes other than the group-by; the group-by itself if none."""
    extra = sorted(set(grouping_attrs) - set(q.group_by))
    return extra if extra else sorted(q.group_by)


def equality_predicates(d, attr: str, base: np.ndarray | None = None) -> list[SimplePredicate]:
    """One ``attr = v`` per value present in the column (restricted to ``base``)."""
    col = d.column(attr)
    if col.kind == "categorical":
        return [SimplePredicate(attr, "=", v) for v in col.levels]
    vals = col.values if base is None else col.values[base]
    return [SimplePredicate(attr, "=", float(v)) for v in np.unique(vals[~np.isnan(vals)])]


def min_support(tau: float, n_rows: int) -> int:
    # a pattern must occur at least once, even at tau = 0
    return max(1, math.ceil(tau * n_rows - 1e-9))


def mine_grouping_patterns(d, q, grouping_attrs: Iterable[str], tau: float,
                           masks: MaskCache | None = None) -> list[Pattern]:
    """Level-wise Apriori over equality predicates on the mining attributes.

    Support is counted over the rows that pass the query's WHERE clause.
    """
    masks = masks or MaskCache(d)
    base = q.where_mask(d)
    threshold = min_support(tau, int(base.sum()))
    level: dict[tuple, np.ndarray] = {}
    for a in mining_attributes(grouping_attrs, q):
        for pred in equality_predicates(d, a, base):
            m = base & masks.predicate(pred)
            if m.sum() >= threshold:
                level[(pred,)] = m
    found = list(level)
    while level:
        keys = sorted(level, key=lambda t: [p.sort_key for p in t])
        nxt: dict[tuple, np.ndarray] = {}
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                if a[:-1] != b[:-1]:
                    break
                if a[-1].attr == b[-1].attr:
                    continue
                cand = a + (b[-1],)
                if any(cand[:j] + cand[j + 1:] not in level for j in range(len(cand) - 2)):
                    continue
                m = level[a] & masks.predicate(b[-1])
                if m.sum() >= threshold:
                    nxt[cand] = m
        found.extend(nxt)
        level = nxt
    return sorted((Pattern(t) for t in found), key=lambda p: (len(p), p.text))


def dedup_grouping(patterns: Iterable[Pattern], d, q, view,
                   masks: MaskCache | None = None) -> list[Pattern]:
    """Keep one pattern per distinct covered-group set: the shortest, then
    the first in text order.  Patterns that cover no group are dropped."""
    masks = masks or MaskCache(d)
    best: dict[bytes, Pattern] = {}
    for p in patterns:
        cov = covered_indices(p, view, masks)
        if len(cov) == 0:
            continue
        key = np.packbits(np.isin(np.arange(view.m), cov)).tobytes()
        cur = best.get(key)
        if cur is None or (len(p), p.text) < (len(cur), cur.text):
            best[key] = p
    return sorted(best.values(), key=lambda p: (len(p), p.text))
