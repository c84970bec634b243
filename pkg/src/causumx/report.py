from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import Params
from .tabular import AggregateView, QuerySpec
from .treatmine import ExplanationCandidate

OK = "ok"
NO_SOLUTION = "no_solution"


@dataclass(eq=False)
class SummaryReport:
    query: QuerySpec
    params: Params
    view: AggregateView
    selected: list[ExplanationCandidate]
    status: str = OK
    algorithm: str = "causumx"
    n_candidates: int = 0
    timings: dict = field(default_factory=dict)

    @property
    def covered_mask(self) -> np.ndarray:
        mask = np.zeros(self.view.m, dtype=bool)
        for c in self.selected:
            mask[c.covered] = True
        return mask

    @property
    def covered_count(self) -> int:
        return int(self.covered_mask.sum())

    @property
    def coverage_fraction(self) -> float:
        return self.covered_count / self.view.m if self.view.m else 0.0

    @property
    def total_weight(self) -> float:
        return math.fsum(c.weight for c in self.selected)

    @property
    def size_ok(self) -> bool:
        return len(self.selected) <= self.params.k

    @property
    def coverage_ok(self) -> bool:
        need = math.ceil(self.params.theta * self.view.m - 1e-9)
        return self.status == OK and self.covered_count >= need

    @property
    def feasible(self) -> bool:
        return self.size_ok and self.coverage_ok
