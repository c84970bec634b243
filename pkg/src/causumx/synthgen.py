"""Synthetic tables with a known best explanation.

Schema ``G, G1..Gi, T1..Tj, O``: ``G`` is the row number (one group per
row), ``Gp`` buckets ``G`` into ``2p`` equal-width buckets, every ``Tq`` is
uniform on 1..5, and ``O = T1 - T2 + T3 - ...``.  The strongest positive
treatments therefore set odd ``T`` high and even ``T`` low.
"""
from __future__ import annotations

import os

import numpy as np

from .dag import CausalDag
from .tabular import Column, Dataset, QuerySpec, categorical_column, write_csv


def _labels(ints: np.ndarray, name: str) -> Column:
    # categorical column whose levels are the decimal strings of ``ints``
    return categorical_column(name, [str(int(v)) for v in ints])


def grouping_names(i: int) -> list[str]:
    return [f"G{p}" for p in range(1, i + 1)]


def treatment_names(j: int) -> list[str]:
    return [f"T{q}" for q in range(1, j + 1)]


def generate_synthetic(n: int, i: int, j: int, seed: int = 0) -> Dataset:
    if n < 1 or i < 0 or j < 1:
        raise ValueError("need n >= 1, i >= 0, j >= 1")
    rng = np.random.default_rng(seed)
    r = np.arange(1, n + 1)
    cols = [_labels(r, "G")]
    for p in range(1, i + 1):
        cols.append(_labels(-((-r * 2 * p) // n), f"G{p}"))  # ceil(r*2p/n)
    T = rng.integers(1, 6, size=(n, j))
    for q in range(j):
        cols.append(_labels(T[:, q], f"T{q + 1}"))
    signs = np.where(np.arange(j) % 2 == 0, 1, -1)
    cols.append(Column("O", "numeric", values=(T @ signs).astype(np.float64)))
    return Dataset(cols)


def synthetic_dag(j: int) -> CausalDag:
    return CausalDag(["O"], [(t, "O") for t in treatment_names(j)])


def synthetic_query() -> QuerySpec:
    return QuerySpec(("G",), "O")


def write_synthetic(out_dir, n: int, i: int, j: int, seed: int = 0) -> tuple[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    data_path = os.path.join(out_dir, "synthetic.csv")
    dag_path = os.path.join(out_dir, "synthetic.dot")
    write_csv(generate_synthetic(n, i, j, seed), data_path)
    with open(dag_path, "w", encoding="utf-8") as fh:
        fh.write(synthetic_dag(j).to_dot("synthetic"))
    return data_path, dag_path
