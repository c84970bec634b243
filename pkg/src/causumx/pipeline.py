"""End-to-end orchestration: load, mine, estimate, select."""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .config import Params, derive_seed
from .dag import CausalDag, load_dot
from .effect import Estimator
from .errors import ConfigError, Infeasible
from .groupmine import dedup_grouping, mine_grouping_patterns
from .lpsolve import build_ilp, greedy_select, round_indices, solve_lp_relaxation
from .oracle import brute_force_summarize
from .patterns import MaskCache, parse_pattern
from .report import NO_SOLUTION, OK, SummaryReport
from .tabular import CATEGORICAL, QuerySpec, evaluate_query, load_csv, partition_attributes
from .treatmine import TreatmentSearch, build_candidates

ALGORITHMS = ("causumx", "bruteforce", "greedy")


@dataclass
class RunConfig:
    data: str
    dag: str
    group_by: list[str]
    avg: str
    where: str | None = None
    params: Params = field(default_factory=Params)
    algorithm: str = "causumx"
    output: str = "text"
    categorical: list[str] = field(default_factory=list)
    grouping_attrs: list[str] | None = None
    report_dir: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.output not in ("text", "json"):
            raise ConfigError("output must be 'text' or 'json'")
        if not self.group_by:
            raise ConfigError("at least one group-by attribute is required")


@contextmanager
def phase(name: str, timings: dict):
    t0 = time.perf_counter()
    try:
        yield
    except Exception as e:
        if not hasattr(e, "phase"):
            e.phase = name
        raise
    finally:
        timings[name] = time.perf_counter() - t0


def summarize(d, q: QuerySpec, g: CausalDag, params: Params, algorithm: str = "causumx",
              grouping_candidates=None) -> SummaryReport:
    """Explain the view ``q(d)`` with at most ``params.k`` explanation patterns."""
    timings: dict = {}
    with phase("query", timings):
        q.validate(d)
        d = d.take(q.where_mask(d))
        view = evaluate_query(d, q)
    if algorithm == "bruteforce":
        with phase("bruteforce", timings):
            report = brute_force_summarize(d, q, g, params, grouping_candidates)
        report.timings.update(timings)
        return report
    masks = MaskCache(d)
    with phase("grouping", timings):
        grouping, treatments = partition_attributes(d, q, grouping_candidates)
        patterns = mine_grouping_patterns(d, q, grouping, params.tau, masks)
        patterns = dedup_grouping(patterns, d, q, view, masks)
    with phase("treatments", timings):
        search = TreatmentSearch(Estimator(d, q, g, params, masks), treatments)
        cands = build_candidates(search, patterns, view, params.threads)
    with phase("select", timings):
        try:
            ilp = build_ilp(cands, view, params.k, params.theta)
            if algorithm == "greedy":
                idx = greedy_select(ilp, [(len(c.pg), c.pg.text) for c in cands])
            else:
                frac = solve_lp_relaxation(ilp)
                rng = np.random.default_rng(derive_seed(params.seed, "rounding"))
                idx = round_indices(frac.g, params.k, rng)
            selected, status = [cands[j] for j in idx], OK
        except Infeasible:
            selected, status = [], NO_SOLUTION
    return SummaryReport(q, params, view, selected, status, algorithm, len(cands), timings)


def load_inputs(cfg: RunConfig):
    timings: dict = {}
    with phase("load", timings):
        forced = list(cfg.group_by) + list(cfg.categorical) + list(cfg.grouping_attrs or [])
        kinds = {a: CATEGORICAL for a in forced}
        d = load_csv(cfg.data, kinds)
        g = load_dot(cfg.dag)
        where = parse_pattern(cfg.where, d) if cfg.where else None
        q = QuerySpec(tuple(cfg.group_by), cfg.avg, where)
    return d, q, g, timings


def run_pipeline(cfg: RunConfig) -> SummaryReport:
    d, q, g, timings = load_inputs(cfg)
    report = summarize(d, q, g, cfg.params, cfg.algorithm, cfg.grouping_attrs)
    report.timings = {**timings, **report.timings}
    return report
