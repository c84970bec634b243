"""Causal explanation summaries for group-by-average aggregate views."""
from .config import Params
from .dag import CausalDag, adjustment_set, causal_ancestors, load_dot, parse_dot
from .effect import CateEstimate, Estimator, Skip, estimate_cate
from .errors import (CausumxError, ConfigError, ContractError, CycleError, DataError,
                     EmptyViewError, Infeasible, ParseError, SchemaError, SizeError)
from .groupmine import dedup_grouping, mine_grouping_patterns
from .lpsolve import (IlpInstance, build_ilp, greedy_select, randomized_rounding,
                      solve_ilp_exact, solve_lp_relaxation)
from .oracle import brute_force_summarize
from .patterns import Pattern, SimplePredicate, parse_pattern
from .pipeline import RunConfig, run_pipeline, summarize
from .render import render_json, render_text
from .report import SummaryReport
from .synthgen import generate_synthetic, synthetic_dag, synthetic_query
from .tabular import AggregateView, Dataset, QuerySpec, evaluate_query, load_csv
from .treatmine import ExplanationCandidate, TreatmentSearch

__version__ = "0.1.0"
