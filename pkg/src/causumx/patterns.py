"""Conjunctive patterns over attributes and the groups they cover."""
from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .errors import ContractError, ParseError, SchemaError

OPS = ("=", "<", ">", "<=", ">=")
_OP_ALIASES = {"≤": "<=", "≥": ">=", "==": "="}
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def format_value(v) -> str:
    if isinstance(v, str):
        if v == "" or any(ch.isspace() or ch in '"<>=≤≥\\' for ch in v):
            return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return v
    v = float(v)
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


@dataclass(frozen=True)
class SimplePredicate:
    attr: str
    op: str
    value: str | float

    def __post_init__(self):
        op = _OP_ALIASES.get(self.op, self.op)
        if op not in OPS:
            raise ValueError(f"unsupported operator {self.op!r}")
        object.__setattr__(self, "op", op)
        if not isinstance(self.value, str):
            object.__setattr__(self, "value", float(self.value))
        if isinstance(self.value, str) and op != "=":
            raise ValueError(f"ordering operator {op} needs a numeric value")

    @property
    def sort_key(self):
        return (self.attr, self.op, isinstance(self.value, str), self.value)

    def holds(self, v) -> bool:
        if v is None:
            return False
        if isinstance(v, float) and np.isnan(v):
            return False
        if self.op == "=":
            if isinstance(self.value, str):
                return isinstance(v, str) and v == self.value
            return not isinstance(v, str) and float(v) == self.value
        if isinstance(v, str):
            return False
        v = float(v)
        return {"<": v < self.value, ">": v > self.value,
                "<=": v <= self.value, ">=": v >= self.value}[self.op]

    def mask(self, d) -> np.ndarray:
        col = d.column(self.attr)
        if col.kind == "categorical":
            if self.op != "=":
                raise SchemaError(f"ordering predicate on categorical attribute {self.attr!r}")
            if not isinstance(self.value, str):
                return np.zeros(d.row_count, dtype=bool)
            try:
                code = col.levels.index(self.value)
            except ValueError:
                return np.zeros(d.row_count, dtype=bool)
            return col.codes == code
        if isinstance(self.value, str):
            return np.zeros(d.row_count, dtype=bool)
        x = col.values
        with np.errstate(invalid="ignore"):
            if self.op == "=":
                return x == self.value
            if self.op == "<":
                return x < self.value
            if self.op == ">":
                return x > self.value
            if self.op == "<=":
                return x <= self.value
            return x >= self.value

    def __str__(self):
        return f"{format_value(self.attr)} {self.op} {format_value(self.value)}"


class Pattern:
    """A conjunction of simple predicates; the empty pattern is a tautology.

    Predicates are kept in canonical ``(attr, op, value)`` order, so equal
    predicate sets compare and hash equal.
    """

    __slots__ = ("predicates", "_hash")

    def __init__(self, predicates: Iterable[SimplePredicate] = ()):
        preds = sorted(set(predicates), key=lambda p: p.sort_key)
        seen = {}
        for p in preds:
            key = (p.attr, p.op)
            if key in seen:
                raise ContractError(
                    f"conflicting predicates {seen[key]} and {p} in one pattern")
            seen[key] = p
        self.predicates: tuple[SimplePredicate, ...] = tuple(preds)
        self._hash = hash(self.predicates)

    @classmethod
    def of(cls, *triples) -> "Pattern":
        return cls(SimplePredicate(*t) for t in triples)

    def __len__(self):
        return len(self.predicates)

    def __iter__(self):
        return iter(self.predicates)

    def __eq__(self, other):
        return isinstance(other, Pattern) and self.predicates == other.predicates

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return (len(self), self.text) < (len(other), other.text)

    def __repr__(self):
        return f"Pattern({self.text!r})"

    @property
    def text(self) -> str:
        return " AND ".join(str(p) for p in self.predicates)

    def __str__(self):
        return self.text or "(all)"

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(p.attr for p in self.predicates))

    def extend(self, pred: SimplePredicate) -> "Pattern":
        return Pattern(self.predicates + (pred,))

    def sub_patterns(self) -> list["Pattern"]:
        """All patterns obtained by dropping exactly one predicate."""
        n = len(self.predicates)
        return [Pattern(c) for c in combinations(self.predicates, n - 1)] if n else []

    def matches(self, row: Mapping) -> bool:
        for p in self.predicates:
            if p.attr not in row:
                raise SchemaError(f"unknown attribute {p.attr!r}")
            if not p.holds(row[p.attr]):
                return False
        return True

    def mask(self, d, cache: "MaskCache | None" = None) -> np.ndarray:
        if cache is not None:
            return cache.pattern(self)
        out = np.ones(d.row_count, dtype=bool)
        for p in self.predicates:
            out &= p.mask(d)
        return out


def matches(p: Pattern, row: Mapping) -> bool:
    return p.matches(row)


class MaskCache:
    """Memoized boolean row masks for predicates over one dataset."""

    def __init__(self, d):
        self.d = d
        self._preds: dict = {}
        self._lock = threading.Lock()

    def predicate(self, p: SimplePredicate) -> np.ndarray:
        m = self._preds.get(p)
        if m is None:
            m = p.mask(self.d)
            with self._lock:
                self._preds.setdefault(p, m)
        return m

    def pattern(self, pat: Pattern) -> np.ndarray:
        out = np.ones(self.d.row_count, dtype=bool)
        for p in pat.predicates:
            out &= self.predicate(p)
        return out


def _split_conjuncts(text: str) -> list[str]:
    parts, buf, i, quoted = [], [], 0, False
    while i < len(text):
        ch = text[i]
        if ch == "\\" and quoted and i + 1 < len(text):
            buf.append(text[i:i + 2])
            i += 2
            continue
        if ch == '"':
            quoted = not quoted
        elif not quoted:
            m = re.match(r"\s+AND\s+", text[i:])
            if m:
                parts.append("".join(buf))
                buf = []
                i += m.end()
                continue
        buf.append(ch)
        i += 1
    if quoted:
        raise ParseError(f"unterminated quote in {text!r}")
    parts.append("".join(buf))
    return parts


def parse_pattern(text: str, d=None) -> Pattern:
    """Parse ``attr op value [AND attr op value ...]``.

    Values are coerced by the attribute kind when a dataset is given;
    otherwise unquoted numerals become floats.
    """
    text = text.strip()
    if not text:
        return Pattern()
    if re.search(r"(^AND\s)|(\sAND$)", text):
        raise ParseError(f"dangling AND in {text!r}")
    preds = []
    for chunk in _split_conjuncts(text):
        m = re.match(r'^\s*("(?:[^"\\]|\\.)*"|[^\s<>=≤≥]+)\s*(<=|>=|==|=|<|>|≤|≥)\s*(.+?)\s*$', chunk)
        if not m:
            raise ParseError(f"cannot parse predicate {chunk!r}")
        attr, op, raw = m.groups()
        if attr.startswith('"'):
            attr = attr[1:-1].replace('\\"', '"').replace("\\\\", "\\")
        quoted = raw.startswith('"') and raw.endswith('"') and len(raw) >= 2
        val = raw[1:-1].replace('\\"', '"').replace("\\\\", "\\") if quoted else raw
        if not quoted and re.search(r'["<>=≤≥]', raw):
            raise ParseError(f"value must be quoted in {chunk!r}")
        if d is not None:
            kind = d.kind(attr)
            value = val if kind == "categorical" else _to_float(val, chunk)
        else:
            value = val if quoted or not _NUMBER.match(val) else float(val)
        try:
            preds.append(SimplePredicate(attr, op, value))
        except ValueError as e:
            raise ParseError(str(e)) from None
    return Pattern(preds)


def _to_float(val: str, chunk: str) -> float:
    if not _NUMBER.match(val):
        raise ParseError(f"numeric value expected in {chunk!r}")
    return float(val)


def numeric_cuts(values: np.ndarray, bins: int) -> list[float]:
    """Equal-frequency cut points for a numeric column (missing ignored)."""
    x = values[~np.isnan(values)]
    if len(x) == 0 or bins < 2:
        return []
    qs = np.quantile(x, np.arange(1, bins) / bins, method="linear")
    top = x.max()
    # 12 significant digits keep pattern text short and exactly re-parsable
    cuts = {float(f"{c:.12g}") for c in qs}
    return sorted(c for c in cuts if c < top)


def covered_indices(pg: Pattern, view, cache: MaskCache) -> np.ndarray:
    """Indices (in view order) of the groups whose representative row satisfies ``pg``."""
    return np.flatnonzero(cache.pattern(pg)[view.rep_rows])


def covered_groups(pg: Pattern, d, q, view, grouping_attrs: Iterable[str] | None = None) -> frozenset:
    if grouping_attrs is not None:
        bad = [a for a in pg.attributes if a not in set(grouping_attrs)]
    else:
        from .tabular import check_fd
        bad = [a for a in pg.attributes if not check_fd(d, q.group_by, a)]
    if bad:
        raise ContractError(f"grouping pattern uses attributes without an FD from the group-by: {bad}")
    mask = pg.mask(d)
    return frozenset(view.groups[i].key for i in np.flatnonzero(mask[view.rep_rows]))
