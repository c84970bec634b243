"""Text, JSON and delimited renderings of a :class:`SummaryReport`."""
from __future__ import annotations

import csv
import io
import json
import math

from .report import NO_SOLUTION, SummaryReport


def format_effect(x: float) -> str:
    """Three significant digits with K/M/B suffixes (``36000 -> '36K'``)."""
    r = float(f"{x:.3g}")
    a = abs(r)
    for scale, suffix in ((1e9, "B"), (1e6, "M"), (1e3, "K")):
        if a >= scale:
            return f"{r / scale:.3g}{suffix}"
    return f"{r:.3g}"


def format_p(p: float) -> str:
    if p >= 0.01:
        return "p < 0.05" if p < 0.05 else f"p = {p:.2g}"
    e = 2
    while e < 16 and 10.0 ** -(e + 1) > p:
        e += 1
    return f"p < 1e-{e}"


def _paragraph(c, outcome: str) -> str:
    parts = []
    if c.pos is not None:
        est = c.pos.estimate
        parts.append(
            f"For {c.pg}, the most substantial effect on high {outcome} "
            f"(effect size of {format_effect(est.cate)}, {format_p(est.p_value)}) "
            f"is observed for {c.pos.pattern}.")
    if c.neg is not None:
        est = c.neg.estimate
        if parts:
            parts.append(
                f"Conversely, {c.neg.pattern} has the greatest adverse impact "
                f"(effect size: {format_effect(est.cate)}, {format_p(est.p_value)}).")
        else:
            parts.append(
                f"For {c.pg}, {c.neg.pattern} has the greatest adverse impact on {outcome} "
                f"(effect size: {format_effect(est.cate)}, {format_p(est.p_value)}).")
    return " ".join(parts)


def render_text(r: SummaryReport) -> str:
    if r.status == NO_SOLUTION or not r.selected:
        return "No feasible explanation summary.\n"
    return "\n\n".join(_paragraph(c, r.query.avg_attr) for c in r.selected) + "\n"


def _num(x: float):
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _effect(node):
    if node is None:
        return None
    e = node.estimate
    return {"pattern": node.pattern.text, "cate": _num(e.cate), "std_error": _num(e.std_error),
            "p_value": _num(e.p_value), "n_treated": e.n_treated, "n_control": e.n_control}


def report_document(r: SummaryReport) -> dict:
    q, p = r.query, r.params
    return {
        "status": r.status,
        "algorithm": r.algorithm,
        "query": {"group_by": list(q.group_by), "avg": q.avg_attr,
                  "where": q.where.text if q.where is not None else None},
        "params": {"k": p.k, "theta": _num(p.theta), "tau": _num(p.tau), "seed": p.seed},
        "view": [{"key": list(g.key), "avg": _num(g.avg), "count": g.count} for g in r.view.groups],
        "explanations": [
            {"grouping_pattern": c.pg.text,
             "covered_groups": [list(k) for k in c.covered_keys(r.view)],
             "positive": _effect(c.pos),
             "negative": _effect(c.neg),
             "weight": _num(c.weight)}
            for c in r.selected
        ],
        "summary": {"covered_count": r.covered_count,
                    "coverage_fraction": _num(r.coverage_fraction),
                    "total_weight": _num(r.total_weight),
                    "size_ok": r.size_ok, "coverage_ok": r.coverage_ok},
    }


def render_json(r: SummaryReport) -> str:
    return json.dumps(report_document(r), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


EXPLANATION_FIELDS = ("grouping_pattern", "covered_count", "weight",
                      "positive_pattern", "positive_cate", "positive_p_value",
                      "negative_pattern", "negative_cate", "negative_p_value")


def render_csv(r: SummaryReport) -> str:
    """One delimited row per selected explanation."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EXPLANATION_FIELDS)
    for c in r.selected:
        row = [c.pg.text, len(c.covered), f"{c.weight:.12g}"]
        for node in (c.pos, c.neg):
            if node is None:
                row += ["", "", ""]
            else:
                row += [node.pattern.text, f"{node.estimate.cate:.12g}", f"{node.estimate.p_value:.12g}"]
        w.writerow(row)
    return buf.getvalue()


def render_view_csv(r: SummaryReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(r.query.group_by) + [f"avg_{r.query.avg_attr}", "count", "covered"])
    covered = r.covered_mask
    for i, g in enumerate(r.view.groups):
        w.writerow(list(g.key) + [f"{g.avg:.12g}", g.count, int(covered[i])])
    return buf.getvalue()
