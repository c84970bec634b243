"""Selection of at most k explanation patterns under a coverage constraint.

The 0-1 program maximizes total weight subject to ``sum g <= k``,
``t_i <= sum_{j covers i} g_j`` and ``sum t >= theta * m``.  Its LP
relaxation is solved with :mod:`causumx.simplex`, then rounded by drawing k
patterns independently with probabilities ``g_j / k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import Infeasible, SizeError
from .simplex import linprog

MAX_SUBSETS = 5_000_000


@dataclass(frozen=True, eq=False)
class IlpInstance:
    m: int
    weights: np.ndarray
    coverage: np.ndarray  # bool, shape (l, m)
    k: int
    theta: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        cov = np.asarray(self.coverage, dtype=bool).reshape(len(w), self.m)
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "coverage", cov)

    @classmethod
    def from_sets(cls, m: int, weights, sets: Sequence, k: int, theta: float) -> "IlpInstance":
        cov = np.zeros((len(sets), m), dtype=bool)
        for j, s in enumerate(sets):
            idx = list(s)
            if idx and (max(idx) >= m or min(idx) < 0):
                raise ValueError(f"coverage index out of range for candidate {j}")
            cov[j, idx] = True
        return cls(m, np.asarray(weights, dtype=float), cov, k, theta)

    @property
    def l(self) -> int:
        return len(self.weights)

    @property
    def required(self) -> float:
        return self.theta * self.m

    def coverage_sets(self) -> list[frozenset]:
        return [frozenset(np.flatnonzero(r).tolist()) for r in self.coverage]

    def covered_count(self, selection: Sequence[int]) -> int:
        if len(selection) == 0:
            return 0
        return int(self.coverage[list(selection)].any(axis=0).sum())

    def weight_of(self, selection: Sequence[int]) -> float:
        return math.fsum(self.weights[j] for j in selection)

    def is_feasible(self, selection: Sequence[int]) -> bool:
        return (len(set(selection)) <= self.k
                and self.covered_count(selection) >= self.required - 1e-9)


@dataclass(frozen=True, eq=False)
class FractionalSolution:
    g: np.ndarray
    t: np.ndarray
    objective: float


def build_ilp(cands, view, k: int, theta: float) -> IlpInstance:
    if not cands:
        raise Infeasible("no explanation candidates to select from")
    cov = np.zeros((len(cands), view.m), dtype=bool)
    for j, c in enumerate(cands):
        cov[j, c.covered] = True
    return IlpInstance(view.m, np.array([c.weight for c in cands]), cov, k, theta)


def solve_lp_relaxation(ilp: IlpInstance) -> FractionalSolution:
    """Optimal fractional solution; raises :class:`Infeasible` if none exists.

    Groups with identical covering sets are merged into one class variable
    weighted by its size, which leaves the optimum unchanged and keeps the
    LP small when there are many groups.
    """
    l, m = ilp.l, ilp.m
    if m == 0:
        return FractionalSolution(np.zeros(l), np.zeros(0), 0.0) if l == 0 else _lp_no_groups(ilp)
    if l == 0:
        if ilp.required > 1e-9:
            raise Infeasible("no candidates")
        return FractionalSolution(np.zeros(0), np.zeros(m), 0.0)
    classes, inverse, counts = np.unique(ilp.coverage.T, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    E = len(classes)
    nvar = l + E
    c = np.concatenate([-ilp.weights, np.zeros(E)])
    rows, rhs = [], []
    size = np.zeros(nvar)
    size[:l] = 1.0
    rows.append(size)
    rhs.append(float(ilp.k))
    for e in range(E):
        r = np.zeros(nvar)
        r[l + e] = 1.0
        r[:l] = -classes[e].astype(float)
        rows.append(r)
        rhs.append(0.0)
    cover = np.zeros(nvar)
    cover[l:] = -counts.astype(float)
    rows.append(cover)
    rhs.append(-ilp.required)
    res = linprog(c, np.array(rows), np.array(rhs), upper=np.ones(nvar))
    if res.status != "optimal":
        raise Infeasible("LP relaxation is infeasible")
    x = np.clip(res.x, 0.0, 1.0)
    g = x[:l]
    t = x[l:][inverse]
    return FractionalSolution(g, t, float(ilp.weights @ g))


def _lp_no_groups(ilp):
    # no groups: only the size constraint binds; take the k heaviest fully
    order = sorted(range(ilp.l), key=lambda j: (-ilp.weights[j], j))[: ilp.k]
    g = np.zeros(ilp.l)
    g[order] = 1.0
    return FractionalSolution(g, np.zeros(0), float(ilp.weights @ g))


def round_indices(g: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    """k independent draws with P(j) = g_j / k; leftover mass means no pick."""
    p = np.clip(np.asarray(g, dtype=float), 0.0, None) / k
    p[p < 1e-12] = 0.0
    total = p.sum()
    if total > 1.0:
        p = p / total
    cdf = np.cumsum(p)
    draws = np.searchsorted(cdf, rng.random(k), side="right")
    return sorted({int(j) for j in draws if j < len(p)})


def randomized_rounding(frac: FractionalSolution, cands: Sequence, k: int, seed: int) -> list:
    idx = round_indices(frac.g, k, np.random.default_rng(seed))
    return [cands[j] for j in idx]


def greedy_select(ilp: IlpInstance, tie_keys: Sequence | None = None) -> list[int]:
    """Heaviest coverage-gaining pick while coverage is short, heaviest pick after."""
    keys = list(tie_keys) if tie_keys is not None else list(range(ilp.l))
    chosen: list[int] = []
    covered = np.zeros(ilp.m, dtype=bool)
    remaining = set(range(ilp.l))
    while len(chosen) < ilp.k and remaining:
        pool = sorted(remaining, key=lambda j: (-ilp.weights[j], keys[j]))
        pick = pool[0]
        if covered.sum() < ilp.required - 1e-9:
            gaining = [j for j in pool if np.any(ilp.coverage[j] & ~covered)]
            if gaining:
                pick = gaining[0]
        chosen.append(pick)
        remaining.discard(pick)
        covered |= ilp.coverage[pick]
    return sorted(chosen)


def solve_ilp_exact(ilp: IlpInstance) -> list[int]:
    """Exhaustive search over subsets of size <= k.

    Returns the lexicographically first maximum-weight feasible index set;
    raises :class:`Infeasible` when no subset reaches the coverage bound.
    """
    kk = min(ilp.k, ilp.l)
    n_subsets = sum(math.comb(ilp.l, s) for s in range(kk + 1))
    if n_subsets > MAX_SUBSETS:
        raise SizeError(f"{n_subsets} subsets exceed the enumeration bound {MAX_SUBSETS}")
    need = ilp.required - 1e-9
    masks = [int.from_bytes(np.packbits(r, bitorder="little").tobytes(), "little") for r in ilp.coverage]
    w = [float(x) for x in ilp.weights]
    scale = max([1.0] + w)
    best_w, best_set = -1.0, None
    # suffix sums of the largest remaining weights bound each branch
    top_after = []
    for i in range(ilp.l + 1):
        rest = sorted(w[i:], reverse=True)
        top_after.append([0.0] + list(np.cumsum(rest)))

    def bound(i, slots):
        tail = top_after[i]
        return tail[min(slots, len(tail) - 1)]

    stack = [(0, (), 0, 0.0)]
    while stack:
        start, chosen, cov, weight = stack.pop()
        if cov.bit_count() >= need:
            if weight > best_w + 1e-12 * scale or (abs(weight - best_w) <= 1e-12 * scale
                                                   and best_set is not None and chosen < best_set):
                best_w, best_set = weight, chosen
        if len(chosen) == kk:
            continue
        if best_set is not None and weight + bound(start, kk - len(chosen)) < best_w - 1e-12 * scale:
            continue
        for j in range(ilp.l - 1, start - 1, -1):
            stack.append((j + 1, chosen + (j,), cov | masks[j], weight + w[j]))
    if best_set is None:
        raise Infeasible("no subset of at most k candidates reaches the coverage threshold")
    return list(best_set)
