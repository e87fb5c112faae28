"""Hot inner-loop kernels for the nominal solvers.

The row-generation and evaluation loops call the shortest-path and spanning
tree oracles thousands of times with freshly scaled cost vectors, so these
loops are JIT-compiled with numba.  Setting the environment variable
``VSR_NO_NUMBA=1`` (or running without numba installed) selects the plain
Python implementations instead; both paths implement byte-identical
tie-breaking, and ``benchmarks/bench_kernels.py`` compares their speed.

Shortest path uses dense label-setting (O(V^2 + E)): the experiment graphs
have at most ~1.1k nodes, where the dense scan beats a heap and makes the
deterministic tie rules (smallest node id first, lexicographically smallest
predecessor) trivial to state.
"""

from __future__ import annotations

import os

import numpy as np

_INF = np.inf

USE_NUMBA = os.environ.get("VSR_NO_NUMBA", "").strip() not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - exercised via env flag instead
        USE_NUMBA = False

__all__ = ["USE_NUMBA", "dijkstra", "kruskal_select",
           "dijkstra_py", "kruskal_select_py"]


def dijkstra_py(n, indptr, csr_heads, csr_arcs, costs, source):
    """Label-setting shortest paths from ``source``.

    ``indptr``/``csr_heads``/``csr_arcs`` describe the out-arcs of each node
    in CSR layout (``csr_arcs`` holds original arc indices into ``costs``).
    Returns (dist, pred_node, pred_arc).  Ties on distance finalize the
    smallest node id first; among equal-length paths the predecessor with
    the smallest (node, arc) pair wins.
    """
    dist = np.full(n, _INF)
    pred_node = np.full(n, -1, dtype=np.int64)
    pred_arc = np.full(n, -1, dtype=np.int64)
    visited = np.zeros(n, dtype=np.bool_)
    dist[source] = 0.0
    for _ in range(n):
        u = -1
        best = _INF
        for v in range(n):
            if not visited[v] and dist[v] < best:
                best = dist[v]
                u = v
        if u < 0:
            break
        visited[u] = True
        for k in range(indptr[u], indptr[u + 1]):
            v = csr_heads[k]
            a = csr_arcs[k]
            nd = dist[u] + costs[a]
            if nd < dist[v]:
                dist[v] = nd
                pred_node[v] = u
                pred_arc[v] = a
            elif nd == dist[v] and (
                u < pred_node[v]
                or (u == pred_node[v] and a < pred_arc[v])
            ):
                pred_node[v] = u
                pred_arc[v] = a
    return dist, pred_node, pred_arc


def kruskal_select_py(n, tails, heads, order):
    """Union-find edge selection in the given cost order.

    Returns (selected mask over arcs, number selected).  ``order`` is the
    stable (cost, index) sort of the arcs.
    """
    parent = np.arange(n, dtype=np.int64)
    selected = np.zeros(tails.shape[0], dtype=np.bool_)
    count = 0
    for idx in order:
        a = tails[idx]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = heads[idx]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            parent[a] = b
            selected[idx] = True
            count += 1
            if count == n - 1:
                break
    return selected, count


if USE_NUMBA:
    dijkstra = njit(cache=True)(dijkstra_py)
    kruskal_select = njit(cache=True)(kruskal_select_py)
else:
    dijkstra = dijkstra_py
    kruskal_select = kruskal_select_py
