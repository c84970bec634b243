"""Treatment assignment and CATE estimation by confounder-adjusted OLS.

The CATE of a treatment pattern within a grouping pattern's rows is the
coefficient of the binary treatment indicator in a regression of the
outcome on ``[1, T, confounders]``, where the confounders are the DAG
parents of the treatment attributes.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular
from scipy.special import betainc

from .config import Params, derive_seed
from .dag import CausalDag, adjustment_set
from .errors import EstimationError
from .patterns import MaskCache, Pattern


@dataclass(frozen=True)
class CateEstimate:
    cate: float
    std_error: float
    p_value: float
    n_treated: int
    n_control: int
    n_used: int


@dataclass(frozen=True)
class Skip:
    reason: str  # "overlap", "collinear", "empty-subpopulation" or "dof"

    def __bool__(self):
        return False


def assign_treatment(rows, pt: Pattern) -> np.ndarray:
    return pt.mask(rows).astype(np.int8)


def sample_rows(rows, max_n: int, seed: int):
    """Uniform sample without replacement of at most ``max_n`` rows.

    ``rows`` may be a :class:`Dataset` or an array of row indices.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    n = rows.row_count if hasattr(rows, "row_count") else len(rows)
    if n <= max_n:
        return rows
    pick = np.sort(np.random.default_rng(seed).choice(n, size=max_n, replace=False))
    return rows.take(pick) if hasattr(rows, "row_count") else np.asarray(rows)[pick]


def t_two_sided(t: float, df: float) -> float:
    """Two-sided Student-t tail probability via the regularized incomplete beta."""
    if np.isnan(t):
        return 1.0
    if np.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def independent_columns(X: np.ndarray, rtol: float | None = None) -> np.ndarray:
    """Indices of a maximal linearly independent column subset (pivoted QR)."""
    if X.shape[1] == 0:
        return np.arange(0)
    _, R, piv = qr(X, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if rtol is None:
        rtol = max(X.shape) * np.finfo(float).eps * 16
    rank = int(np.sum(d > rtol * d[0])) if d[0] > 0 else 0
    return np.sort(piv[:rank])


def fit_effect(y: np.ndarray, t: np.ndarray, others: np.ndarray):
    """OLS of ``y`` on ``[others, t]``; returns a CateEstimate or a Skip.

    ``others`` must already contain the intercept column.  Collinear
    columns of ``others`` are dropped; a treatment collinear with what
    remains is a Skip.
    """
    n = len(y)
    t = t.astype(np.float64)
    keep = independent_columns(others)
    base = others[:, keep]
    if base.shape[1]:
        Q, _ = np.linalg.qr(base)
        resid_t = t - Q @ (Q.T @ t)
    else:
        resid_t = t
    if np.linalg.norm(resid_t) <= 1e-8 * max(np.linalg.norm(t), 1.0):
        return Skip("collinear")
    X = np.column_stack([base, t])
    p = X.shape[1]
    df = n - p
    if df < 1:
        return Skip("dof")
    Q, R = np.linalg.qr(X)
    beta = solve_triangular(R, Q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / df
    se = float(np.sqrt(sigma2) / abs(R[-1, -1]))
    b = float(beta[-1])
    if not (np.isfinite(b) and np.isfinite(se)):
        raise EstimationError("non-finite regression output")
    scale = max(float(np.max(np.abs(y))) if n else 0.0, 1.0)
    if se <= 1e-12 * scale:
        pval = 1.0 if abs(b) <= 1e-12 * scale else 0.0
        se = 0.0
    else:
        pval = t_two_sided(b / se, df)
    n1 = int(t.sum())
    return CateEstimate(b, se, pval, n1, n - n1, n)


def ols(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least-squares coefficients for a full-column-rank design."""
    Q, R = np.linalg.qr(X)
    return solve_triangular(R, Q.T @ y)


class Estimator:
    """CATE estimation bound to one dataset, query, DAG and parameter set.

    Results are memoized per ``(pg, pt)`` so a lattice search never pays
    for the same pair twice.  Safe to share between worker threads.
    """

    def __init__(self, d, q, g: CausalDag, params: Params, masks: MaskCache | None = None):
        self.d, self.q, self.params = d, q, params
        self.g = g.with_nodes(d.schema)
        self.masks = masks or MaskCache(d)
        y = d.column(q.avg_attr).values
        self.y = y
        self.base = q.where_mask(d) & ~np.isnan(y)
        self._memo: dict = {}
        self._z_cache: dict = {}
        self._lock = threading.Lock()
        self.calls = 0

    def rows(self, pg: Pattern) -> np.ndarray:
        return np.flatnonzero(self.base & self.masks.pattern(pg))

    def outcome_std(self, pg: Pattern) -> float:
        v = self.y[self.rows(pg)]
        return float(v.std()) if len(v) else 0.0

    def confounders(self, pt: Pattern) -> list[str]:
        key = pt.attributes
        z = self._z_cache.get(key)
        if z is None:
            z = adjustment_set(self.g, key, self.q.avg_attr) if key else []
            self._z_cache[key] = z
        return z

    def _design(self, rows: np.ndarray, z: list[str]):
        ok = np.ones(len(rows), dtype=bool)
        for a in z:
            ok &= ~self.d.column(a).missing[rows]
        rows = rows[ok]
        cols = [np.ones(len(rows))]
        for a in z:
            col = self.d.column(a)
            if col.kind == "categorical":
                codes = col.codes[rows]
                present = np.unique(codes)
                # smallest code is the lexicographically smallest level: reference
                for c in present[1:]:
                    cols.append((codes == c).astype(np.float64))
            else:
                cols.append(col.values[rows])
        return rows, np.column_stack(cols)

    def estimate(self, pg: Pattern, pt: Pattern):
        key = (pg, pt)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        res = self._estimate(pg, pt)
        with self._lock:
            self._memo.setdefault(key, res)
            self.calls += 1
        return res

    def _estimate(self, pg: Pattern, pt: Pattern):
        rows = self.rows(pg)
        if len(rows) == 0:
            return Skip("empty-subpopulation")
        seed = derive_seed(self.params.seed, pg.text, pt.text)
        rows = sample_rows(rows, self.params.sample_size, seed)
        rows, others = self._design(rows, self.confounders(pt))
        t = self.masks.pattern(pt)[rows]
        n1 = int(t.sum())
        if n1 < self.params.min_arm or len(rows) - n1 < self.params.min_arm:
            return Skip("overlap")
        return fit_effect(self.y[rows], t, others)


def estimate_cate(d, q, pg: Pattern, pt: Pattern, g: CausalDag, params: Params):
    return Estimator(d, q, g, params).estimate(pg, pt)
