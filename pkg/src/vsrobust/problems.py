"""Nominal combinatorial oracles for the three supported problem classes:
cardinality-constrained selection, shortest s-t path, and minimum spanning
tree.  Also provides feasibility checks and exhaustive enumerators used as
exact testing oracles at desk scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import _kernels
from .exceptions import CapacityError, InfeasibleError, UsageError
from .model import as_costs, as_solution

SHORTEST_PATH = "shortest_path"
SPANNING_TREE = "spanning_tree"


@dataclass
class SelectionInstance:
    """Choose exactly p of n items at minimum total cost."""

    n: int
    p: int
    nominal: np.ndarray

    def __post_init__(self):
        self.nominal = as_costs(self.nominal)
        if self.nominal.shape[0] != self.n:
            raise UsageError("cost vector length must equal n")
        if not (1 <= self.p <= self.n):
            raise UsageError(f"need 1 <= p <= n, got p={self.p}, n={self.n}")

    @property
    def ground_size(self) -> int:
        return self.n


@dataclass
class GraphInstance:
    """Arc-indexed graph problem: shortest s-t path (directed) or minimum
    spanning tree (undirected).  Parallel arcs are permitted and keep their
    own indices.  Treat instances as immutable once constructed."""

    num_nodes: int
    tails: np.ndarray
    heads: np.ndarray
    nominal: np.ndarray
    kind: str
    s: Optional[int] = None
    t: Optional[int] = None
    _csr: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.tails = np.asarray(self.tails, dtype=np.int64)
        self.heads = np.asarray(self.heads, dtype=np.int64)
        self.nominal = as_costs(self.nominal)
        m = self.tails.shape[0]
        if self.heads.shape[0] != m or self.nominal.shape[0] != m:
            raise UsageError("tails, heads and costs must have equal length")
        if m and (self.tails.min() < 0 or self.heads.min() < 0
                  or max(self.tails.max(), self.heads.max()) >= self.num_nodes):
            raise UsageError("arc endpoint out of range")
        if self.kind == SHORTEST_PATH:
            if self.s is None or self.t is None:
                raise UsageError("shortest-path instance needs s and t")
            if self.s == self.t:
                raise UsageError("s and t must differ")
        elif self.kind != SPANNING_TREE:
            raise UsageError(f"unknown graph kind {self.kind!r}")

    @property
    def num_arcs(self) -> int:
        return self.tails.shape[0]

    @property
    def ground_size(self) -> int:
        return self.num_arcs

    def csr(self):
        """Out-arc adjacency in CSR layout, cached; arc ids ascend per node."""
        if self._csr is None:
            order = np.lexsort((np.arange(self.num_arcs), self.tails))
            counts = np.bincount(self.tails, minlength=self.num_nodes)
            indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            self._csr = (indptr, self.heads[order], order.astype(np.int64))
        return self._csr


Instance = SelectionInstance | GraphInstance


def solve_nominal(instance: Instance, costs: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimize costs over the feasible set; returns (solution, value).

    Tie-breaking is deterministic: selection and spanning tree use a stable
    (cost, index) sort; shortest path prefers the lexicographically smallest
    (predecessor node, arc) at equal distance.
    """
    costs = np.asarray(costs, dtype=np.float64)
    if costs.shape[0] != instance.ground_size:
        raise UsageError("cost vector length does not match instance")
    if np.any(costs < 0):
        raise UsageError("nominal oracles require non-negative costs")
    if isinstance(instance, SelectionInstance):
        chosen = np.argsort(costs, kind="stable")[: instance.p]
        x = np.zeros(instance.n, dtype=np.int8)
        x[chosen] = 1
        return x, float(costs[chosen].sum())
    if instance.kind == SHORTEST_PATH:
        return _solve_path(instance, costs)
    return _solve_tree(instance, costs)


def _solve_path(g: GraphInstance, costs: np.ndarray) -> tuple[np.ndarray, float]:
    indptr, csr_heads, csr_arcs = g.csr()
    dist, pred_node, pred_arc = _kernels.dijkstra(
        g.num_nodes, indptr, csr_heads, csr_arcs, costs, g.s)
    if not np.isfinite(dist[g.t]):
        raise InfeasibleError(f"no path from {g.s} to {g.t}")
    x = np.zeros(g.num_arcs, dtype=np.int8)
    v = g.t
    while v != g.s:
        x[pred_arc[v]] = 1
        v = pred_node[v]
    return x, float(dist[g.t])


def _solve_tree(g: GraphInstance, costs: np.ndarray) -> tuple[np.ndarray, float]:
    order = np.argsort(costs, kind="stable")
    selected, count = _kernels.kruskal_select(g.num_nodes, g.tails, g.heads, order)
    if count != g.num_nodes - 1:
        raise InfeasibleError("graph is not connected")
    x = selected.astype(np.int8)
    return x, float(costs[selected].sum())


def is_feasible(instance: Instance, x: np.ndarray) -> bool:
    """True iff x encodes a p-subset / simple s-t path / spanning tree."""
    x = as_solution(x)
    if x.shape[0] != instance.ground_size:
        raise UsageError("solution length does not match instance")
    if isinstance(instance, SelectionInstance):
        return int(x.sum()) == instance.p
    if instance.kind == SHORTEST_PATH:
        return _is_simple_path(instance, x)
    return _is_spanning_tree(instance, x)


def _is_simple_path(g: GraphInstance, x: np.ndarray) -> bool:
    chosen = np.flatnonzero(x)
    if chosen.size == 0:
        return False
    out_arc = {}
    in_deg = np.zeros(g.num_nodes, dtype=np.int64)
    for a in chosen:
        u = int(g.tails[a])
        if u in out_arc:
            return False  # branching
        out_arc[u] = int(a)
        in_deg[g.heads[a]] += 1
        if in_deg[g.heads[a]] > 1:
            return False
    # walk from s; a simple path consumes every chosen arc exactly once
    seen = {g.s}
    v = g.s
    used = 0
    while v != g.t:
        if v not in out_arc:
            return False
        a = out_arc[v]
        v = int(g.heads[a])
        used += 1
        if v in seen:
            return False  # revisit => cycle
        seen.add(v)
    return used == chosen.size


def _is_spanning_tree(g: GraphInstance, x: np.ndarray) -> bool:
    chosen = np.flatnonzero(x)
    if chosen.size != g.num_nodes - 1:
        return False
    parent = list(range(g.num_nodes))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in chosen:
        ra, rb = find(int(g.tails[e])), find(int(g.heads[e]))
        if ra == rb:
            return False  # cycle
        parent[ra] = rb
    return True  # n-1 acyclic edges span by counting


def enumerate_solutions(instance: Instance, limit: int = 10**6) -> list[np.ndarray]:
    """Complete, deterministically ordered list of feasible solutions.

    This is the exact oracle used by the tests and the enumeration backend;
    raises CapacityError as soon as the feasible set exceeds ``limit``.
    """
    out: list[np.ndarray] = []
    for x in _iter_solutions(instance):
        if len(out) >= limit:
            raise CapacityError(
                f"feasible set exceeds limit {limit}; shrink the instance")
        out.append(x)
    return out


def _iter_solutions(instance: Instance) -> Iterator[np.ndarray]:
    if isinstance(instance, SelectionInstance):
        for combo in itertools.combinations(range(instance.n), instance.p):
            x = np.zeros(instance.n, dtype=np.int8)
            x[list(combo)] = 1
            yield x
    elif instance.kind == SHORTEST_PATH:
        yield from _iter_paths(instance)
    else:
        yield from _iter_trees(instance)


def _iter_paths(g: GraphInstance) -> Iterator[np.ndarray]:
    """All simple s-t paths by DFS, expanding arcs in ascending index."""
    indptr, csr_heads, csr_arcs = g.csr()
    x = np.zeros(g.num_arcs, dtype=np.int8)
    on_path = np.zeros(g.num_nodes, dtype=bool)
    on_path[g.s] = True

    def rec(v) -> Iterator[np.ndarray]:
        if v == g.t:
            yield x.copy()
            return
        for k in range(indptr[v], indptr[v + 1]):
            w = int(csr_heads[k])
            if on_path[w]:
                continue
            a = int(csr_arcs[k])
            on_path[w] = True
            x[a] = 1
            yield from rec(w)
            x[a] = 0
            on_path[w] = False

    yield from rec(g.s)


def _iter_trees(g: GraphInstance) -> Iterator[np.ndarray]:
    """All spanning trees via include/exclude recursion on edge index with
    connectivity pruning (contraction/deletion in disguise).  ``k`` counts
    the components of the chosen forest; a tree is complete at k == 1."""
    n, m = g.num_nodes, g.num_arcs
    if n == 1:
        yield np.zeros(m, dtype=np.int8)
        return

    def rec(i, parent, k, chosen) -> Iterator[np.ndarray]:
        if k == 1:
            x = np.zeros(m, dtype=np.int8)
            x[chosen] = 1
            yield x
            return
        if i == m or (k - 1) > (m - i):
            return  # too few edges left to connect
        ra, rb = _find(parent, int(g.tails[i])), _find(parent, int(g.heads[i]))
        if ra != rb:
            child = list(parent)
            child[ra] = rb
            yield from rec(i + 1, child, k - 1, chosen + [i])
        yield from rec(i + 1, parent, k, chosen)

    yield from rec(0, list(range(n)), n, [])


def _find(parent, a):
    while parent[a] != a:
        a = parent[a]
    return a
