"""Greedy lattice search for the treatment patterns with extreme CATE.

For a grouping pattern and a sign, single-predicate treatments are scored
first; the next level only combines survivors whose every parent survived,
and the search stops at the first level that does not improve on the best
effect seen so far.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import Params
from .dag import CausalDag, causal_ancestors
from .effect import CateEstimate, Estimator, Skip
from .patterns import MaskCache, Pattern, SimplePredicate, covered_indices, numeric_cuts

POS, NEG = 1, -1


@dataclass(frozen=True)
class LatticeNode:
    pattern: Pattern
    estimate: CateEstimate

    @property
    def level(self) -> int:
        return len(self.pattern)


@dataclass(frozen=True, eq=False)
class ExplanationCandidate:
    pg: Pattern
    covered: np.ndarray  # group indices in view order
    pos: LatticeNode | None
    neg: LatticeNode | None

    @property
    def weight(self) -> float:
        w = 0.0
        if self.pos is not None:
            w += abs(self.pos.estimate.cate)
        if self.neg is not None:
            w += abs(self.neg.estimate.cate)
        return w

    def covered_keys(self, view) -> list[tuple]:
        return [view.groups[i].key for i in self.covered]


def _rank_key(node: LatticeNode):
    return (-abs(node.estimate.cate), len(node.pattern), node.pattern.text)


class TreatmentSearch:
    """Binds an :class:`Estimator` to the treatment attributes it may use."""

    def __init__(self, estimator: Estimator, treatment_attrs: Iterable[str]):
        self.est = estimator
        d, q = estimator.d, estimator.q
        ancestors = causal_ancestors(estimator.g, q.avg_attr)
        self.attrs = sorted(a for a in treatment_attrs if a in ancestors)
        self._level1: list[Pattern] | None = None

    @property
    def params(self) -> Params:
        return self.est.params

    def gen_level1(self) -> list[Pattern]:
        if self._level1 is None:
            d = self.est.d
            out = []
            for a in self.attrs:
                col = d.column(a)
                if col.kind == "categorical":
                    out.extend(Pattern([SimplePredicate(a, "=", v)]) for v in col.levels)
                else:
                    for c in numeric_cuts(col.values[self.est.base], self.params.bins):
                        out.append(Pattern([SimplePredicate(a, "<=", c)]))
                        out.append(Pattern([SimplePredicate(a, ">", c)]))
            self._level1 = out
        return list(self._level1)

    def filter_candidates(self, cands: Sequence[Pattern], pg: Pattern, sigma: int) -> list[LatticeNode]:
        eps = 0.01 * self.est.outcome_std(pg)
        alpha = self.params.alpha
        nodes = []
        for pt in cands:
            res = self.est.estimate(pg, pt)
            if isinstance(res, Skip):
                continue
            if np.sign(res.cate) != sigma or res.p_value >= alpha or abs(res.cate) < eps:
                continue
            nodes.append(LatticeNode(pt, res))
        nodes.sort(key=_rank_key)
        if len(nodes) > 2:
            nodes = nodes[:math.ceil(len(nodes) / 2)]
        return nodes

    def get_top_treatment(self, pg: Pattern, sigma: int) -> LatticeNode | None:
        level = self.filter_candidates(self.gen_level1(), pg, sigma)
        if not level:
            return None
        best = level[0]
        while True:
            cands = gen_next_level(level)
            if not cands:
                break
            level = self.filter_candidates(cands, pg, sigma)
            if not level:
                break
            top = level[0]
            if abs(top.estimate.cate) > abs(best.estimate.cate):
                best = top
            else:
                break
        return best

    def candidate(self, pg: Pattern, view) -> ExplanationCandidate:
        return ExplanationCandidate(pg, covered_indices(pg, view, self.est.masks),
                                    self.get_top_treatment(pg, POS),
                                    self.get_top_treatment(pg, NEG))


def gen_next_level(nodes: Iterable[LatticeNode | Pattern]) -> list[Pattern]:
    """Length-(l+1) patterns all of whose length-l sub-patterns are in ``nodes``."""
    pats = [n.pattern if isinstance(n, LatticeNode) else n for n in nodes]
    present = set(pats)
    ordered = sorted(pats, key=lambda p: [x.sort_key for x in p.predicates])
    out = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if a.predicates[:-1] != b.predicates[:-1]:
                break
            last_a, last_b = a.predicates[-1], b.predicates[-1]
            if last_a.attr == last_b.attr:
                continue
            cand = Pattern(a.predicates + (last_b,))
            if len(set(cand.attributes)) != len(cand):
                continue
            if all(s in present for s in cand.sub_patterns()):
                out.append(cand)
    return out


def gen_level1(d, q, pg, g: CausalDag, params: Params, treatment_attrs) -> list[Pattern]:
    return TreatmentSearch(Estimator(d, q, g, params), treatment_attrs).gen_level1()


def get_top_treatment(d, q, pg, g: CausalDag, sigma: int, params: Params, treatment_attrs):
    return TreatmentSearch(Estimator(d, q, g, params), treatment_attrs).get_top_treatment(pg, sigma)


def build_candidates(search: TreatmentSearch, grouping_patterns: Sequence[Pattern], view,
                     threads: int = 1) -> list[ExplanationCandidate]:
    """Search both directions for every grouping pattern; drop weightless ones.

    Output order follows ``grouping_patterns`` regardless of ``threads``.
    """
    if threads > 1 and len(grouping_patterns) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cands = list(pool.map(lambda pg: search.candidate(pg, view), grouping_patterns))
    else:
        cands = [search.candidate(pg, view) for pg in grouping_patterns]
    return [c for c in cands if c.pos is not None or c.neg is not None]
