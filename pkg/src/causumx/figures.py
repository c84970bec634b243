"""Matplotlib figures for a summary report, written next to the CSV output."""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .render import format_effect  # noqa: E402

POS_COLOR = "#2b8cbe"
NEG_COLOR = "#e34a33"


def _wrap(text, width=38):
    words, lines, cur = text.split(" "), [], ""
    for w in words:
        if cur and len(cur) + 1 + len(w) > width:
            lines.append(cur)
            cur = w
        else:
            cur = f"{cur} {w}".strip()
    lines.append(cur)
    return "\n".join(lines)


def plot_effects(report, path):
    """Horizontal bars of the positive and negative CATE per explanation."""
    sel = report.selected
    fig, ax = plt.subplots(figsize=(8, 1.2 + 0.9 * max(len(sel), 1)))
    if not sel:
        ax.text(0.5, 0.5, "No feasible explanation summary", ha="center", va="center")
        ax.set_axis_off()
    else:
        y = np.arange(len(sel))
        pos = [c.pos.estimate.cate if c.pos else 0.0 for c in sel]
        neg = [c.neg.estimate.cate if c.neg else 0.0 for c in sel]
        ax.barh(y, pos, color=POS_COLOR, label="positive treatment")
        ax.barh(y, neg, color=NEG_COLOR, label="negative treatment")
        for yi, c in zip(y, sel):
            if c.pos:
                ax.annotate(format_effect(c.pos.estimate.cate), (c.pos.estimate.cate, yi),
                            xytext=(3, 0), textcoords="offset points", va="center", fontsize=8)
            if c.neg:
                ax.annotate(format_effect(c.neg.estimate.cate), (c.neg.estimate.cate, yi),
                            xytext=(-3, 0), textcoords="offset points", va="center",
                            ha="right", fontsize=8)
        ax.set_yticks(y)
        ax.set_yticklabels([_wrap(str(c.pg)) for c in sel], fontsize=8)
        ax.invert_yaxis()
        ax.axvline(0, color="black", lw=0.8)
        ax.set_xlabel(f"CATE on {report.query.avg_attr}")
        ax.legend(loc="lower right", fontsize=8, frameon=False)
        lim = max(map(abs, pos + neg)) * 1.3 or 1.0
        ax.set_xlim(-lim, lim)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_view(report, path):
    """Group averages of the aggregate view, covered groups highlighted."""
    view = report.view
    avg = np.array([g.avg for g in view.groups])
    covered = report.covered_mask
    fig, ax = plt.subplots(figsize=(8, 3.5))
    x = np.arange(view.m)
    if view.m <= 60:
        ax.bar(x, avg, color=np.where(covered, POS_COLOR, "#bbbbbb"))
        ax.set_xticks(x)
        ax.set_xticklabels([", ".join(g.key) for g in view.groups], rotation=90, fontsize=7)
    else:
        ax.scatter(x[~covered], avg[~covered], s=4, color="#bbbbbb", label="not covered")
        ax.scatter(x[covered], avg[covered], s=4, color=POS_COLOR, label="covered")
        ax.legend(fontsize=8, frameon=False, markerscale=3)
        ax.set_xlabel("group (view order)")
    ax.set_ylabel(f"AVG({report.query.avg_attr})")
    ax.set_title(f"{report.covered_count} of {view.m} groups covered", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_figures(report, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, "effects.png"), os.path.join(out_dir, "view.png")]
    plot_effects(report, paths[0])
    plot_view(report, paths[1])
    return paths
