"""Causal DAG over attribute names, a DOT-subset reader/writer, and the
adjustment-set and ancestor queries used during effect estimation."""
from __future__ import annotations

import re
from typing import Iterable

from .errors import CycleError, ParseError, SchemaError

_TOKEN = re.compile(r'\s*(?:(->)|("(?:[^"\\]|\\.)*")|([A-Za-z0-9_.]+)|([{};\[\]=,]))')


class CausalDag:
    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[tuple[str, str]] = ()):
        self.nodes = frozenset(nodes) | {n for e in edges for n in e}
        self.edges = frozenset((str(a), str(b)) for a, b in edges)
        self._parents: dict[str, set[str]] = {n: set() for n in self.nodes}
        self._children: dict[str, set[str]] = {n: set() for n in self.nodes}
        for a, b in self.edges:
            self._parents[b].add(a)
            self._children[a].add(b)
        cycle = self._find_cycle()
        if cycle:
            raise CycleError(cycle)

    def __eq__(self, other):
        return isinstance(other, CausalDag) and self.nodes == other.nodes and self.edges == other.edges

    def __repr__(self):
        return f"CausalDag(nodes={len(self.nodes)}, edges={len(self.edges)})"

    def with_nodes(self, names: Iterable[str]) -> "CausalDag":
        """Same graph with extra isolated nodes."""
        return CausalDag(self.nodes | set(names), self.edges)

    def parents(self, node: str) -> set[str]:
        self._check(node)
        return set(self._parents[node])

    def _check(self, node):
        if node not in self.nodes:
            raise SchemaError(f"unknown DAG node {node!r}")

    def _find_cycle(self):
        state = {}
        for root in sorted(self.nodes):
            if root in state:
                continue
            stack = [(root, iter(sorted(self._children[root])))]
            path = [root]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                    path.pop()
                elif state.get(nxt) == 1:
                    return path[path.index(nxt):] + [nxt]
                elif nxt not in state:
                    state[nxt] = 1
                    path.append(nxt)
                    stack.append((nxt, iter(sorted(self._children[nxt]))))
        return None

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {_quote(name)} {{"]
        connected = {n for e in self.edges for n in e}
        for n in sorted(self.nodes - connected):
            lines.append(f"  {_quote(n)};")
        for a, b in sorted(self.edges):
            lines.append(f"  {_quote(a)} -> {_quote(b)};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _quote(name: str) -> str:
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = re.sub(r"//.*$|#.*$", "", raw) if '"' not in raw else raw
        pos = 0
        while pos < len(line):
            if line[pos:].strip() == "":
                break
            m = _TOKEN.match(line, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {line[pos:].strip()[:1]!r}", line=lineno)
            arrow, quoted, ident, punct = m.groups()
            if quoted is not None:
                yield lineno, "id", quoted[1:-1].replace('\\"', '"').replace("\\\\", "\\")
            elif ident is not None:
                yield lineno, "id", ident
            else:
                yield lineno, arrow or punct, arrow or punct
            pos = m.end()


def parse_dot(text: str) -> CausalDag:
    """Read ``digraph name? { A -> B; C; ... }``.

    Chains (``A -> B -> C``) and trailing ``[...]`` attribute lists are
    accepted; attributes are ignored.
    """
    toks = list(_tokens(text))
    i = 0

    def expect(kind):
        nonlocal i
        if i >= len(toks):
            last = toks[-1][0] if toks else 1
            raise ParseError(f"unexpected end of input, expected {kind!r}", line=last)
        line, k, v = toks[i]
        if k != kind:
            raise ParseError(f"expected {kind!r}, got {v!r}", line=line)
        i += 1
        return v

    if i < len(toks) and toks[i][2] == "strict":
        i += 1
    head = expect("id")
    if head != "digraph":
        raise ParseError(f"expected 'digraph', got {head!r}", line=toks[0][0])
    if i < len(toks) and toks[i][1] == "id":
        i += 1
    expect("{")
    nodes, edges = set(), set()
    while True:
        if i >= len(toks):
            raise ParseError("missing closing '}'", line=toks[-1][0])
        if toks[i][1] == "}":
            i += 1
            break
        if toks[i][1] == ";":
            i += 1
            continue
        chain = [expect("id")]
        while i < len(toks) and toks[i][1] == "->":
            i += 1
            chain.append(expect("id"))
        if i < len(toks) and toks[i][1] == "[":
            while i < len(toks) and toks[i][1] != "]":
                i += 1
            expect("]")
        if len(chain) == 1 and chain[0] in ("graph", "node", "edge"):
            continue
        if i < len(toks) and toks[i][1] == "=":
            # graph-level attribute such as rankdir=LR
            i += 1
            expect("id")
            continue
        nodes.update(chain)
        edges.update(zip(chain, chain[1:]))
    if i != len(toks):
        raise ParseError(f"trailing content {toks[i][2]!r}", line=toks[i][0])
    return CausalDag(nodes, edges)


def load_dot(path) -> CausalDag:
    with open(path, encoding="utf-8") as fh:
        return parse_dot(fh.read())


def adjustment_set(g: CausalDag, treatment_attrs: Iterable[str], outcome: str) -> list[str]:
    """Union of the treatment attributes' parents, minus treatments and outcome."""
    treatments = set(treatment_attrs)
    if not treatments:
        raise SchemaError("adjustment_set needs at least one treatment attribute")
    g._check(outcome)
    z = set()
    for t in treatments:
        z |= g.parents(t)
    return sorted(z - treatments - {outcome})


def causal_ancestors(g: CausalDag, node: str) -> set[str]:
    g._check(node)
    seen, stack = set(), [node]
    while stack:
        for p in g._parents[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    seen.discard(node)
    return seen
