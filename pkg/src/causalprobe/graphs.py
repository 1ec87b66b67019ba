"""Causal graph value type shared by every module.

A graph stores one :class:`EdgeState` per unordered node pair. States are
expressed relative to node order: for nodes ``a`` before ``b``, ``FORWARD``
means ``a -> b``.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, InputError, StructuralError

MAX_SYMMETRIC_EXTENSIONS = 20


class EdgeState(enum.IntEnum):
    ABSENT = 0
    FORWARD = 1
    BACKWARD = 2
    SYMMETRIC = 3

    def flipped(self) -> "EdgeState":
        if self is EdgeState.FORWARD:
            return EdgeState.BACKWARD
        if self is EdgeState.BACKWARD:
            return EdgeState.FORWARD
        return self

    @property
    def symbol(self) -> str:
        return {0: "  ", 1: "->", 2: "<-", 3: "<->"}[int(self)]


def _pair_index(n: int, i: int, j: int) -> int:
    # position of (i, j), i < j, in itertools.combinations(range(n), 2)
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class CausalGraph:
    nodes: tuple[str, ...]
    states: tuple[EdgeState, ...]

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise InputError(f"duplicate node labels in {nodes}")
        n = len(nodes)
        states = tuple(EdgeState(s) for s in self.states)
        if len(states) != n * (n - 1) // 2:
            raise InputError(f"expected {n * (n - 1) // 2} pair states, got {len(states)}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "states", states)

    # construction ----------------------------------------------------------

    @classmethod
    def empty(cls, nodes: Sequence[str]) -> "CausalGraph":
        n = len(nodes)
        return cls(tuple(nodes), (EdgeState.ABSENT,) * (n * (n - 1) // 2))

    @classmethod
    def from_edges(cls, nodes: Sequence[str], directed: Iterable[tuple[str, str]] = (),
                   symmetric: Iterable[tuple[str, str]] = ()) -> "CausalGraph":
        g = cls.empty(nodes)
        states = list(g.states)
        for a, b in directed:
            i, j = g.index(a), g.index(b)
            if i == j:
                raise InputError(f"self-loop on {a!r}")
            lo, hi = min(i, j), max(i, j)
            new = EdgeState.FORWARD if i < j else EdgeState.BACKWARD
            k = _pair_index(len(g.nodes), lo, hi)
            if states[k] not in (EdgeState.ABSENT, new):
                raise InputError(f"conflicting states for pair ({a!r}, {b!r})")
            states[k] = new
        for a, b in symmetric:
            i, j = g.index(a), g.index(b)
            if i == j:
                raise InputError(f"self-loop on {a!r}")
            k = _pair_index(len(g.nodes), min(i, j), max(i, j))
            if states[k] not in (EdgeState.ABSENT, EdgeState.SYMMETRIC):
                raise InputError(f"conflicting states for pair ({a!r}, {b!r})")
            states[k] = EdgeState.SYMMETRIC
        return cls(g.nodes, tuple(states))

    @classmethod
    def from_adjacency(cls, nodes: Sequence[str], adj) -> "CausalGraph":
        """Build from a boolean matrix where ``adj[i, j]`` means ``i -> j``.

        Mutual entries become a symmetric edge.
        """
        adj = np.asarray(adj, dtype=bool)
        n = len(nodes)
        if adj.shape != (n, n):
            raise InputError(f"adjacency shape {adj.shape} does not match {n} nodes")
        if adj.diagonal().any():
            raise InputError("adjacency has self-loops")
        states = []
        for i, j in itertools.combinations(range(n), 2):
            f, b = adj[i, j], adj[j, i]
            states.append(EdgeState.SYMMETRIC if f and b else EdgeState.FORWARD if f
                          else EdgeState.BACKWARD if b else EdgeState.ABSENT)
        return cls(tuple(nodes), tuple(states))

    # queries ---------------------------------------------------------------

    def index(self, node: str) -> int:
        try:
            return self.nodes.index(node)
        except ValueError:
            raise InputError(f"unknown node {node!r}") from None

    def state(self, a: str, b: str) -> EdgeState:
        """State of the pair viewed in the order (a, b)."""
        i, j = self.index(a), self.index(b)
        if i == j:
            raise InputError("no state for a self-pair")
        s = self.states[_pair_index(len(self.nodes), min(i, j), max(i, j))]
        return s if i < j else s.flipped()

    def pairs(self):
        """Yield ``(a, b, state)`` for every unordered pair in node order."""
        for (i, j), s in zip(itertools.combinations(range(len(self.nodes)), 2), self.states):
            yield self.nodes[i], self.nodes[j], s

    def with_state(self, a: str, b: str, state: EdgeState) -> "CausalGraph":
        i, j = self.index(a), self.index(b)
        if i == j:
            raise InputError("no state for a self-pair")
        state = EdgeState(state)
        if i > j:
            i, j, state = j, i, state.flipped()
        states = list(self.states)
        states[_pair_index(len(self.nodes), i, j)] = state
        return CausalGraph(self.nodes, tuple(states))

    def directed_edges(self) -> list[tuple[str, str]]:
        out = []
        for a, b, s in self.pairs():
            if s is EdgeState.FORWARD:
                out.append((a, b))
            elif s is EdgeState.BACKWARD:
                out.append((b, a))
        return out

    def symmetric_edges(self) -> list[tuple[str, str]]:
        return [(a, b) for a, b, s in self.pairs() if s is EdgeState.SYMMETRIC]

    def count(self, state: EdgeState) -> int:
        return sum(1 for s in self.states if s is state)

    def adjacency(self) -> np.ndarray:
        """Boolean matrix, ``A[i, j]`` true iff ``i -> j`` (symmetric sets both)."""
        n = len(self.nodes)
        adj = np.zeros((n, n), dtype=np.bool_)
        for (i, j), s in zip(itertools.combinations(range(n), 2), self.states):
            if s in (EdgeState.FORWARD, EdgeState.SYMMETRIC):
                adj[i, j] = True
            if s in (EdgeState.BACKWARD, EdgeState.SYMMETRIC):
                adj[j, i] = True
        return adj

    def directed_adjacency(self) -> np.ndarray:
        """Like :meth:`adjacency` but ignoring symmetric edges."""
        n = len(self.nodes)
        adj = np.zeros((n, n), dtype=np.bool_)
        for (i, j), s in zip(itertools.combinations(range(n), 2), self.states):
            if s is EdgeState.FORWARD:
                adj[i, j] = True
            elif s is EdgeState.BACKWARD:
                adj[j, i] = True
        return adj

    def parents(self, node: str) -> tuple[str, ...]:
        j = self.index(node)
        adj = self.directed_adjacency()
        return tuple(self.nodes[i] for i in np.flatnonzero(adj[:, j]))

    def find_cycle(self) -> list[str] | None:
        """A directed cycle among FORWARD/BACKWARD edges, or None."""
        return _find_cycle(self.nodes, self.directed_adjacency())

    def is_dag(self) -> bool:
        return self.count(EdgeState.SYMMETRIC) == 0 and self.find_cycle() is None

    def topological_order(self) -> list[str]:
        if self.count(EdgeState.SYMMETRIC):
            raise StructuralError("graph has symmetric edges")
        order = _topological(self.directed_adjacency())
        if order is None:
            cycle = self.find_cycle()
            raise StructuralError(f"cycle {' -> '.join(cycle)}", cycle=cycle)
        return [self.nodes[i] for i in order]

    def relabel(self, mapping: dict[str, str]) -> "CausalGraph":
        nodes = tuple(mapping.get(v, v) for v in self.nodes)
        return CausalGraph(nodes, self.states)

    def reorder(self, nodes: Sequence[str]) -> "CausalGraph":
        """Same graph expressed over a permutation of its node labels."""
        if sorted(nodes) != sorted(self.nodes):
            raise InputError("reorder needs a permutation of the node labels")
        g = CausalGraph.empty(nodes)
        states = []
        for a, b, _ in g.pairs():
            states.append(self.state(a, b))
        return CausalGraph(tuple(nodes), tuple(states))

    def to_dot(self, name: str = "G") -> str:
        lines = [f'digraph "{_dot_escape(name)}" {{']
        for v in self.nodes:
            lines.append(f'  "{_dot_escape(v)}";')
        for a, b, s in self.pairs():
            if s is EdgeState.FORWARD:
                lines.append(f'  "{_dot_escape(a)}" -> "{_dot_escape(b)}";')
            elif s is EdgeState.BACKWARD:
                lines.append(f'  "{_dot_escape(b)}" -> "{_dot_escape(a)}";')
            elif s is EdgeState.SYMMETRIC:
                lines.append(f'  "{_dot_escape(a)}" -> "{_dot_escape(b)}" [dir=both];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_record(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "directed": [list(e) for e in self.directed_edges()],
            "symmetric": [list(e) for e in self.symmetric_edges()],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CausalGraph":
        return cls.from_edges(rec["nodes"], [tuple(e) for e in rec.get("directed", [])],
                              [tuple(e) for e in rec.get("symmetric", [])])


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _topological(adj: np.ndarray) -> list[int] | None:
    n = adj.shape[0]
    indeg = adj.sum(axis=0).astype(int)
    ready = [i for i in range(n) if indeg[i] == 0]
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in np.flatnonzero(adj[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(int(w))
    return order if len(order) == n else None


def _find_cycle(labels: Sequence[str], adj: np.ndarray) -> list[str] | None:
    n = adj.shape[0]
    color = [0] * n
    stack: list[int] = []

    def visit(v):
        color[v] = 1
        stack.append(v)
        for w in np.flatnonzero(adj[v]):
            w = int(w)
            if color[w] == 1:
                return stack[stack.index(w):] + [w]
            if color[w] == 0:
                found = visit(w)
                if found:
                    return found
        stack.pop()
        color[v] = 2
        return None

    for v in range(n):
        if color[v] == 0:
            cyc = visit(v)
            if cyc:
                return [labels[i] for i in cyc]
    return None


def orientation_extensions(g: CausalGraph, acyclic_only: bool = True) -> list[CausalGraph]:
    """All ways of orienting the symmetric edges of ``g``.

    Each symmetric pair becomes FORWARD or BACKWARD; with ``acyclic_only``
    the cyclic results are dropped. Order follows ``itertools.product`` over
    symmetric pairs in node order, FORWARD before BACKWARD.
    """
    sym = [k for k, s in enumerate(g.states) if s is EdgeState.SYMMETRIC]
    if len(sym) > MAX_SYMMETRIC_EXTENSIONS:
        raise CapacityError(
            f"{len(sym)} symmetric edges exceed the cap of {MAX_SYMMETRIC_EXTENSIONS}")
    if not sym:
        return [g] if (not acyclic_only or g.find_cycle() is None) else []
    out = []
    for choice in itertools.product((EdgeState.FORWARD, EdgeState.BACKWARD), repeat=len(sym)):
        states = list(g.states)
        for k, s in zip(sym, choice):
            states[k] = s
        ext = CausalGraph(g.nodes, tuple(states))
        if acyclic_only and ext.find_cycle() is not None:
            continue
        out.append(ext)
    return out


def descendants_mask(adj: np.ndarray, i: int) -> np.ndarray:
    """Nodes reachable from ``i`` by a directed path, ``i`` included."""
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[i] = True
    stack = [i]
    while stack:
        v = stack.pop()
        for w in np.flatnonzero(adj[v]):
            if not seen[w]:
                seen[w] = True
                stack.append(int(w))
    return seen
