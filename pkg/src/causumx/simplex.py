"""Two-phase bounded-variable primal simplex (dense tableau, Bland's rule).

Solves ``min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  0 <= x <= upper``.
Upper bounds are handled implicitly: a nonbasic variable sits at either
bound and may flip without a pivot.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CausumxError

TOL = 1e-9


class SolverError(CausumxError):
    pass


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None
    iterations: int


class _Tableau:
    def __init__(self, T, xB, basis, upper, at_upper):
        self.T = T
        self.xB = xB
        self.basis = basis
        self.upper = upper
        self.at_upper = at_upper

    def values(self):
        x = np.where(self.at_upper, self.upper, 0.0)
        x[self.basis] = self.xB
        return x

    def run(self, c, max_iter):
        m, n = self.T.shape
        fixed = self.upper <= TOL
        for it in range(max_iter):
            d = c - c[self.basis] @ self.T
            is_basic = np.zeros(n, dtype=bool)
            is_basic[self.basis] = True
            up = ~is_basic & ~fixed & ~self.at_upper & (d < -TOL)
            down = ~is_basic & ~fixed & self.at_upper & (d > TOL)
            cand = np.flatnonzero(up | down)
            if len(cand) == 0:
                return "optimal", it
            j = int(cand[0])
            direction = 1.0 if up[j] else -1.0
            col = self.T[:, j] * direction
            best, leave, leave_to_upper = self.upper[j], -1, False
            ub_b = self.upper[self.basis]
            for i in range(m):
                a = col[i]
                if a > TOL:
                    r = self.xB[i] / a
                    to_upper = False
                elif a < -TOL and np.isfinite(ub_b[i]):
                    r = (ub_b[i] - self.xB[i]) / -a
                    to_upper = True
                else:
                    continue
                r = max(r, 0.0)
                if r < best - TOL or (leave >= 0 and abs(r - best) <= TOL
                                      and self.basis[i] < self.basis[leave]):
                    best, leave, leave_to_upper = r, i, to_upper
            if not np.isfinite(best):
                return "unbounded", it
            self.xB -= col * best
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue
            entering_value = (self.upper[j] if self.at_upper[j] else 0.0) + direction * best
            old = self.basis[leave]
            self.at_upper[old] = leave_to_upper
            piv = self.T[leave, j]
            self.T[leave] /= piv
            others = np.arange(m) != leave
            self.T[others] -= np.outer(self.T[others, j], self.T[leave])
            self.basis[leave] = j
            self.xB[leave] = entering_value
            self.at_upper[j] = False
            np.clip(self.xB, 0.0, None, out=self.xB)
        raise SolverError(f"simplex did not converge in {max_iter} iterations")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, upper=None,
            max_iter: int = 50_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = len(c)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if np.any(upper < 0):
        return LPResult("infeasible", None, None, 0)

    m_ub, m_eq = len(b_ub), len(b_eq)
    m = m_ub + m_eq
    # columns: structural | slacks (one per <= row) | artificials (one per row)
    A = np.zeros((m, n + m_ub + m))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:n + m_ub] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b = np.abs(b)

    basis = np.empty(m, dtype=np.int64)
    art_cols = []
    for i in range(m):
        if i < m_ub and not neg[i]:
            basis[i] = n + i  # slack starts basic
        else:
            col = n + m_ub + i
            A[i, col] = 1.0
            basis[i] = col
            art_cols.append(col)
    total = A.shape[1]
    ub = np.concatenate([upper, np.full(m_ub, np.inf), np.zeros(m)])
    ub[art_cols] = np.inf
    tab = _Tableau(A, b.copy(), basis, ub, np.zeros(total, dtype=bool))

    iters = 0
    if art_cols:
        c1 = np.zeros(total)
        c1[art_cols] = 1.0
        status, it = tab.run(c1, max_iter)
        iters += it
        infeas = float(tab.values()[art_cols].sum())
        if infeas > 1e-7 * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LPResult("infeasible", None, None, iters)
        tab.upper = tab.upper.copy()
        tab.upper[art_cols] = 0.0
        tab.xB[np.isin(tab.basis, art_cols)] = 0.0

    c2 = np.zeros(total)
    c2[:n] = c
    status, it = tab.run(c2, max_iter)
    iters += it
    if status == "unbounded":
        return LPResult("unbounded", None, None, iters)
    x = tab.values()[:n]
    return LPResult("optimal", x, float(c @ x), iters)
