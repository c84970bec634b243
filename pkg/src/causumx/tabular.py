"""Columnar data model, CSV I/O and the group-by-average query.

Categorical columns are stored as integer codes into a sorted tuple of
levels (``-1`` marks a missing cell); numeric columns are ``float64`` with
``NaN`` for missing cells.  Because levels are sorted, code order equals
lexicographic value order, which keeps group ordering deterministic.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyViewError, ParseError, SchemaError
from .patterns import Pattern

CATEGORICAL = "categorical"
NUMERIC = "numeric"

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def is_decimal(text: str) -> bool:
    return bool(_DECIMAL.match(text))


@dataclass(frozen=True, eq=False)
class Column:
    name: str
    kind: str
    codes: np.ndarray | None = None  # categorical only
    levels: tuple = ()
    values: np.ndarray | None = None  # numeric only

    def __len__(self):
        arr = self.codes if self.kind == CATEGORICAL else self.values
        return len(arr)

    @property
    def missing(self) -> np.ndarray:
        if self.kind == CATEGORICAL:
            return self.codes < 0
        return np.isnan(self.values)

    def cell(self, i: int):
        if self.kind == CATEGORICAL:
            c = self.codes[i]
            return None if c < 0 else self.levels[c]
        v = self.values[i]
        return None if np.isnan(v) else float(v)

    def factorize(self) -> np.ndarray:
        """Integer codes for any kind; missing cells get ``-1``."""
        if self.kind == CATEGORICAL:
            return self.codes
        out = np.full(len(self.values), -1, dtype=np.int64)
        ok = ~np.isnan(self.values)
        if ok.any():
            _, inv = np.unique(self.values[ok], return_inverse=True)
            out[ok] = inv
        return out

    def take(self, idx: np.ndarray) -> "Column":
        if self.kind == NUMERIC:
            return Column(self.name, NUMERIC, values=self.values[idx])
        sub = self.codes[idx]
        present = np.unique(sub[sub >= 0])
        remap = np.full(len(self.levels) + 1, -1, dtype=np.int32)
        remap[present] = np.arange(len(present), dtype=np.int32)
        codes = np.where(sub >= 0, remap[sub], -1).astype(np.int32)
        return Column(self.name, CATEGORICAL, codes=codes,
                      levels=tuple(self.levels[i] for i in present))

    def equals(self, other: "Column") -> bool:
        if self.kind != other.kind or self.name != other.name:
            return False
        if self.kind == CATEGORICAL:
            return self.levels == other.levels and np.array_equal(self.codes, other.codes)
        return np.array_equal(self.values, other.values, equal_nan=True)


def categorical_column(name: str, cells: Sequence) -> Column:
    levels = sorted({c for c in cells if c is not None})
    index = {v: i for i, v in enumerate(levels)}
    codes = np.fromiter((index[c] if c is not None else -1 for c in cells),
                        dtype=np.int32, count=len(cells))
    return Column(name, CATEGORICAL, codes=codes, levels=tuple(levels))


def numeric_column(name: str, cells: Sequence) -> Column:
    vals = np.array([np.nan if c is None else float(c) for c in cells], dtype=np.float64)
    return Column(name, NUMERIC, values=vals)


class Dataset:
    """Immutable columnar table.

    Build one with :meth:`from_columns` or :func:`load_csv`.
    """

    def __init__(self, columns: Sequence[Column]):
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate attribute names in {names}")
        lengths = {len(c) for c in columns}
        if len(lengths) > 1:
            raise SchemaError(f"columns have different lengths: {sorted(lengths)}")
        self.schema: tuple[str, ...] = tuple(names)
        self._columns = {c.name: c for c in columns}
        self.row_count: int = lengths.pop() if lengths else 0

    @classmethod
    def from_columns(cls, data: Mapping[str, Sequence], kinds: Mapping[str, str] | None = None):
        """Build from raw cell lists; ``None`` or ``""`` is a missing cell.

        Kinds are inferred exactly as in :func:`load_csv` unless given.
        """
        kinds = dict(kinds or {})
        cols = []
        for name, raw in data.items():
            cells = [None if (c is None or c == "") else c for c in raw]
            kind = kinds.get(name) or _infer_kind(cells)
            if kind == NUMERIC:
                cols.append(numeric_column(name, cells))
            elif kind == CATEGORICAL:
                cols.append(categorical_column(name, [None if c is None else _as_label(c) for c in cells]))
            else:
                raise SchemaError(f"unknown kind {kind!r} for {name}")
        return cls(cols)

    def column(self, name: str) -> Column:
        try:
            return self._columns[name]
        except KeyError:
            raise SchemaError(f"unknown attribute {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._columns

    def kind(self, name: str) -> str:
        return self.column(name).kind

    @property
    def kinds(self) -> dict[str, str]:
        return {n: self._columns[n].kind for n in self.schema}

    @property
    def active_domains(self) -> dict[str, frozenset]:
        out = {}
        for n in self.schema:
            col = self._columns[n]
            if col.kind == CATEGORICAL:
                out[n] = frozenset(col.levels)
            else:
                v = col.values[~np.isnan(col.values)]
                out[n] = frozenset(float(x) for x in np.unique(v))
        return out

    def row(self, i: int) -> dict:
        return {n: self._columns[n].cell(i) for n in self.schema}

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        return Dataset([self._columns[n].take(idx) for n in self.schema])

    def equals(self, other: "Dataset") -> bool:
        return (self.schema == other.schema
                and self.row_count == other.row_count
                and all(self._columns[n].equals(other._columns[n]) for n in self.schema))

    def __repr__(self):
        return f"Dataset(rows={self.row_count}, schema={list(self.schema)})"


def _as_label(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def _infer_kind(cells: Iterable) -> str:
    for c in cells:
        if c is None:
            continue
        if isinstance(c, (int, float)) and not isinstance(c, bool):
            continue
        if isinstance(c, str) and is_decimal(c):
            continue
        return CATEGORICAL
    return NUMERIC


def load_csv(path, kind_overrides: Mapping[str, str] | None = None) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file: header row required", line=1) from None
        dupes = sorted({h for h in header if header.count(h) > 1})
        if dupes:
            raise SchemaError(f"duplicate header names: {dupes}")
        cells: list[list] = [[] for _ in header]
        for rowno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=rowno)
            for j, c in enumerate(row):
                cells[j].append(c if c != "" else None)
    overrides = dict(kind_overrides or {})
    unknown = set(overrides) - set(header)
    if unknown:
        raise SchemaError(f"kind overrides for unknown attributes: {sorted(unknown)}")
    return Dataset.from_columns(dict(zip(header, cells)), overrides)


def _format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def write_csv(d: Dataset, path) -> None:
    cols = [d.column(n) for n in d.schema]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(d.schema)
        for i in range(d.row_count):
            out = []
            for c in cols:
                v = c.cell(i)
                if v is None:
                    out.append("")
                elif c.kind == NUMERIC:
                    out.append(_format_number(v))
                else:
                    out.append(v)
            w.writerow(out)


@dataclass(frozen=True)
class QuerySpec:
    """``SELECT group_by, AVG(avg_attr) FROM D WHERE where GROUP BY group_by``."""

    group_by: tuple[str, ...]
    avg_attr: str
    where: Pattern | None = None

    def __post_init__(self):
        object.__setattr__(self, "group_by", tuple(self.group_by))

    def validate(self, d: Dataset) -> None:
        if not self.group_by:
            raise SchemaError("group_by must be non-empty")
        for a in self.group_by:
            if d.kind(a) != CATEGORICAL:
                raise SchemaError(f"group-by attribute {a!r} must be categorical")
        if d.kind(self.avg_attr) != NUMERIC:
            raise SchemaError(f"aggregated attribute {self.avg_attr!r} must be numeric")
        if self.avg_attr in self.group_by:
            raise SchemaError("group_by must not contain the aggregated attribute")
        if self.where is not None:
            for a in self.where.attributes:
                d.column(a)

    def where_mask(self, d: Dataset) -> np.ndarray:
        if self.where is None:
            return np.ones(d.row_count, dtype=bool)
        return self.where.mask(d)


@dataclass(frozen=True)
class GroupRow:
    key: tuple
    avg: float
    count: int


@dataclass(frozen=True, eq=False)
class AggregateView:
    groups: tuple[GroupRow, ...]
    # group index for each input row, -1 for rows outside the view
    row_group: np.ndarray = field(repr=False)
    # one representative input row per group
    rep_rows: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.groups)

    @property
    def keys(self) -> list[tuple]:
        return [g.key for g in self.groups]

    def __eq__(self, other):
        return isinstance(other, AggregateView) and self.groups == other.groups


def evaluate_query(d: Dataset, q: QuerySpec) -> AggregateView:
    q.validate(d)
    y = d.column(q.avg_attr).values
    keep = q.where_mask(d) & ~np.isnan(y)
    codes = [d.column(a).codes for a in q.group_by]
    for c in codes:
        keep &= c >= 0
    rows = np.flatnonzero(keep)
    if len(rows) == 0:
        raise EmptyViewError("no rows survive the WHERE clause and missing-value filter")
    stacked = np.stack([c[rows] for c in codes], axis=1)
    uniq, first, inv = np.unique(stacked, axis=0, return_index=True, return_inverse=True)
    inv = inv.reshape(-1)
    counts = np.bincount(inv)
    sums = np.bincount(inv, weights=y[rows])
    levels = [d.column(a).levels for a in q.group_by]
    groups = tuple(
        GroupRow(tuple(levels[j][uniq[g, j]] for j in range(len(levels))),
                 float(sums[g] / counts[g]), int(counts[g]))
        for g in range(len(uniq))
    )
    row_group = np.full(d.row_count, -1, dtype=np.int64)
    row_group[rows] = inv
    return AggregateView(groups, row_group, rows[first])


def _group_ids(d: Dataset, attrs: Sequence[str]) -> np.ndarray:
    if not attrs:
        return np.zeros(d.row_count, dtype=np.int64)
    stacked = np.stack([d.column(a).factorize() for a in attrs], axis=1)
    _, inv = np.unique(stacked, axis=0, return_inverse=True)
    return inv.reshape(-1)


def check_fd(d: Dataset, gb: Sequence[str], w: str) -> bool:
    """True iff rows agreeing on ``gb`` agree on ``w`` (missing is a value)."""
    if w in gb:
        d.column(w)
        return True
    gid = _group_ids(d, gb)
    wc = d.column(w).factorize()
    if d.row_count == 0:
        return True
    pairs = np.unique(np.stack([gid, wc], axis=1), axis=0)
    return len(pairs) == len(np.unique(gid))


def partition_attributes(d: Dataset, q: QuerySpec,
                         candidates: Iterable[str] | None = None) -> tuple[set, set]:
    """Split ``schema \\ {avg}`` into grouping and treatment attributes.

    ``candidates`` optionally limits which non-group-by attributes may be
    used for grouping; without it every categorical attribute with an FD
    from the group-by attributes qualifies.
    """
    allowed = None if candidates is None else set(candidates)
    grouping = set(q.group_by)
    for w in d.schema:
        if w == q.avg_attr or w in grouping:
            continue
        if allowed is not None and w not in allowed:
            continue
        if d.kind(w) == CATEGORICAL and check_fd(d, q.group_by, w):
            grouping.add(w)
    treatments = {a for a in d.schema if a != q.avg_attr and a not in grouping}
    return grouping, treatments
