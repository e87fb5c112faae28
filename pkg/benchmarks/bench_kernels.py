"""Benchmark the JIT kernels against the pure-Python fallbacks.

Run:  python benchmarks/bench_kernels.py [--repeats 50]

The same workload is timed through both code paths (results are asserted to
be identical); the package picks the JIT path automatically unless
``VSR_NO_NUMBA=1`` is set.
"""

import argparse
import time

import numpy as np

from vsrobust import _kernels, gen_layered
from vsrobust.problems import GraphInstance, SPANNING_TREE
from vsrobust.instances import SplitMix64


def _bench(label, fn, repeats):
    fn()  # warm-up (JIT compile)
    t0 = time.perf_counter()
    for _ in range(repeats):
        out = fn()
    dt = (time.perf_counter() - t0) / repeats
    print(f"  {label:<22s} {dt * 1e3:9.3f} ms/call")
    return dt, out


def bench_dijkstra(repeats):
    g = gen_layered(20, 15, "A", seed=1)
    indptr, heads, arcs = g.csr()
    costs = g.nominal
    print(f"dijkstra on layered graph: {g.num_nodes} nodes, {g.num_arcs} arcs")
    t_jit, out_jit = _bench(
        "numba @njit", lambda: _kernels.dijkstra(
            g.num_nodes, indptr, heads, arcs, costs, g.s), repeats)
    t_py, out_py = _bench(
        "pure python", lambda: _kernels.dijkstra_py(
            g.num_nodes, indptr, heads, arcs, costs, g.s), max(1, repeats // 20))
    assert all(np.array_equal(a, b) for a, b in zip(out_jit, out_py))
    print(f"  speedup: {t_py / t_jit:.1f}x")


def bench_kruskal(repeats):
    rng = SplitMix64(2)
    n = 400
    tails, heads = [], []
    for v in range(1, n):
        tails.append(rng.randint(0, v - 1))
        heads.append(v)
    for _ in range(3 * n):
        u, v = rng.randint(0, n - 1), rng.randint(0, n - 1)
        if u != v:
            tails.append(min(u, v))
            heads.append(max(u, v))
    costs = np.array([float(rng.randint(1, 100)) for _ in tails])
    g = GraphInstance(num_nodes=n, tails=np.array(tails),
                      heads=np.array(heads), nominal=costs,
                      kind=SPANNING_TREE)
    order = np.argsort(costs, kind="stable")
    print(f"kruskal on random graph: {n} nodes, {g.num_arcs} edges")
    t_jit, out_jit = _bench(
        "numba @njit", lambda: _kernels.kruskal_select(
            n, g.tails, g.heads, order), repeats)
    t_py, out_py = _bench(
        "pure python", lambda: _kernels.kruskal_select_py(
            n, g.tails, g.heads, order), max(1, repeats // 20))
    assert np.array_equal(out_jit[0], out_py[0]) and out_jit[1] == out_py[1]
    print(f"  speedup: {t_py / t_jit:.1f}x")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()
    print(f"numba path enabled: {_kernels.USE_NUMBA}")
    bench_dijkstra(args.repeats)
    bench_kruskal(args.repeats)


if __name__ == "__main__":
    main()
