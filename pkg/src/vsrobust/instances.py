"""Reproducible instance generation and JSON (de)serialization.

The generators draw from an explicit splitmix64 stream so instances are
bit-reproducible across platforms and implementations.  The recurrence is:

    state += 0x9E3779B97F4A7C15                     (mod 2^64)
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9        (mod 2^64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB        (mod 2^64)
    output = z ^ (z >> 31)

Integers in [lo, hi] are ``lo + output % (hi - lo + 1)`` and unit floats are
``output / 2^64``; every generator documents its draw order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import DomainError, ParseError, UsageError
from .problems import GraphInstance, SHORTEST_PATH, SPANNING_TREE, SelectionInstance

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Minimal deterministic RNG used by every generator."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] via modulo (documented contract)."""
        lo, hi = int(lo), int(hi)
        return lo + self.next_u64() % (hi - lo + 1)

    def unit(self) -> float:
        return self.next_u64() / 2.0**64


@dataclass(frozen=True)
class GeneratorConfig:
    """Echo of the generator parameters stored in instance files."""

    kind: str
    params: dict
    seed: int


def _cost_draw(rng: SplitMix64, cost_type: str) -> int:
    if cost_type == "A":
        return rng.randint(1, 100)
    if cost_type == "B":
        # low or high band, equally likely, then uniform within the band
        if rng.next_u64() % 2 == 0:
            return rng.randint(1, 30)
        return rng.randint(70, 100)
    raise UsageError(f"unknown cost type {cost_type!r}")


def gen_layered(N: int, k: int, cost_type: str = "A", seed: int = 0) -> GraphInstance:
    """Complete layered digraph: source, N+1 layers of width k, sink.

    Node ids: source 0, node (layer, pos) = 1 + layer*k + pos, sink last.
    Arc order: source fan-out, then layer-to-layer blocks (tail-major), then
    sink fan-in; costs are drawn once per arc in that order.
    Sizes are (N+1)k + 2 nodes and N k^2 + 2k arcs.
    """
    if N < 1 or k < 1:
        raise UsageError("layered generator needs N >= 1 and k >= 1")
    rng = SplitMix64(seed)
    node = lambda layer, pos: 1 + layer * k + pos
    t = 1 + (N + 1) * k
    tails, heads = [], []
    for i in range(k):
        tails.append(0)
        heads.append(node(0, i))
    for layer in range(N):
        for i in range(k):
            for j in range(k):
                tails.append(node(layer, i))
                heads.append(node(layer + 1, j))
    for i in range(k):
        tails.append(node(N, i))
        heads.append(t)
    costs = np.array([_cost_draw(rng, cost_type) for _ in tails], dtype=np.float64)
    inst = GraphInstance(num_nodes=t + 1, tails=np.array(tails),
                         heads=np.array(heads), nominal=costs,
                         kind=SHORTEST_PATH, s=0, t=t)
    return inst


def _sample_gap(rng: SplitMix64, max_gap: int) -> int:
    """Truncated geometric gap: P(g) ~ (3/4) (1/4)^(g-1), g in [1, max_gap]."""
    u = rng.unit()
    norm = 1.0 - 0.25**max_gap
    for g in range(1, max_gap + 1):
        if (1.0 - 0.25**g) / norm > u:
            return g
    return max_gap


def gen_twopath(L: int, d: float, seed: int = 0) -> GraphInstance:
    """Two disjoint s-t paths of L inner nodes each, plus forward diagonals.

    Node ids: s = 0, first path 1..L, second path L+1..2L, t = 2L+1.  Arc
    order: first path (L+1 arcs), second path, then round(d*L) diagonals
    (round half up).  Per diagonal the draws are: source path bit, source
    index i in [1, L-1], gap g (truncated geometric), then (j - i) cost
    draws summed so expected cost matches a path of the same span; a
    duplicate head/tail pair is re-sampled up to 100 times, then kept.
    """
    if L < 2:
        raise UsageError("two-path generator needs L >= 2")
    if not (0.0 <= d <= 1.0):
        raise UsageError("diagonal density d must lie in [0, 1]")
    rng = SplitMix64(seed)
    a = lambda i: i          # 1..L
    b = lambda i: L + i      # L+1..2L
    t = 2 * L + 1
    tails, heads, costs = [], [], []

    def add(u, v, c):
        tails.append(u)
        heads.append(v)
        costs.append(c)

    chain = [0] + [a(i) for i in range(1, L + 1)] + [t]
    for u, v in zip(chain[:-1], chain[1:]):
        add(u, v, rng.randint(1, 100))
    chain = [0] + [b(i) for i in range(1, L + 1)] + [t]
    for u, v in zip(chain[:-1], chain[1:]):
        add(u, v, rng.randint(1, 100))

    n_diag = math.floor(d * L + 0.5)
    used = set()
    for _ in range(n_diag):
        for _attempt in range(100):
            src_on_first = rng.next_u64() % 2 == 0
            i = rng.randint(1, L - 1)
            g = _sample_gap(rng, L - i)
            j = i + g
            u, v = (a(i), b(j)) if src_on_first else (b(i), a(j))
            if (u, v) not in used:
                break
        used.add((u, v))
        cost = sum(rng.randint(1, 100) for _ in range(j - i))
        add(u, v, cost)

    return GraphInstance(num_nodes=t + 1, tails=np.array(tails),
                         heads=np.array(heads),
                         nominal=np.array(costs, dtype=np.float64),
                         kind=SHORTEST_PATH, s=0, t=t)


def transform_bicriteria(graph: GraphInstance, a: np.ndarray, b: np.ndarray
                         ) -> tuple[GraphInstance, np.ndarray]:
    """Rewrite a bicriteria shortest-path instance so that one distinguished
    solution's regret profile sweeps every extreme efficient path.

    Each arc e = (i, j) becomes a three-arc chain with nominal costs
    ``a_e - b_e/2``, ``b_e/2`` and 0; heavy linking arcs of cost
    ``M = 1 + 2 sum(a + b)`` chain the middle pieces together, and the
    distinguished solution x follows exactly those links and middles.
    Requires a > 0, b >= 0 and 2a >= b coordinate-wise.
    """
    if graph.kind != SHORTEST_PATH:
        raise DomainError("transformation applies to shortest-path instances")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m = graph.num_arcs
    if a.shape != (m,) or b.shape != (m,):
        raise UsageError("cost vectors must have one entry per arc")
    if np.any(a <= 0):
        raise DomainError("transformation requires a > 0")
    if np.any(b < 0):
        raise DomainError("transformation requires b >= 0")
    if np.any(2 * a < b):
        raise DomainError("transformation requires 2a >= b")
    V = graph.num_nodes
    M = 1.0 + 2.0 * float(np.sum(a + b))
    tails, heads, costs = [], [], []
    for e in range(m):
        i_mid, j_mid = V + 2 * e, V + 2 * e + 1
        tails += [int(graph.tails[e]), i_mid, j_mid]
        heads += [i_mid, j_mid, int(graph.heads[e])]
        costs += [a[e] - b[e] / 2.0, b[e] / 2.0, 0.0]
    # heavy links: s -> mid(e_0), then mid-exit(e_k) -> mid(e_k+1), then -> t
    tails += [graph.s] + [V + 2 * e + 1 for e in range(m)]
    heads += [V + 2 * e for e in range(m)] + [graph.t]
    costs += [M] * (m + 1)
    inst = GraphInstance(num_nodes=V + 2 * m, tails=np.array(tails),
                         heads=np.array(heads),
                         nominal=np.array(costs, dtype=np.float64),
                         kind=SHORTEST_PATH, s=graph.s, t=graph.t)
    x = np.zeros(inst.num_arcs, dtype=np.int8)
    x[[3 * e + 1 for e in range(m)]] = 1   # middle pieces
    x[3 * m:] = 1                          # linking arcs
    return inst, x


def link_arc_indices(num_original_arcs: int) -> np.ndarray:
    """Indices of the heavy linking arcs in a transformed instance."""
    m = num_original_arcs
    return np.arange(3 * m, 4 * m + 1)


def save(instance, path, seed: Optional[int] = None,
         generator: Optional[GeneratorConfig] = None) -> None:
    """Write an instance as versioned JSON; integer costs stay integers."""
    with open(path, "w") as fh:
        json.dump(to_dict(instance, seed=seed, generator=generator), fh,
                  sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def to_dict(instance, seed=None, generator=None) -> dict:
    doc: dict = {"format": 1}
    if seed is not None:
        doc["seed"] = int(seed)
    if generator is not None:
        doc["generator"] = {"kind": generator.kind, "seed": generator.seed,
                            **generator.params}
    if isinstance(instance, SelectionInstance):
        doc.update(kind="selection", n=instance.n, p=instance.p,
                   costs=[_num(c) for c in instance.nominal])
        return doc
    doc.update(kind=instance.kind, nodes=instance.num_nodes,
               arcs=[{"tail": int(u), "head": int(v), "cost": _num(c)}
                     for u, v, c in zip(instance.tails, instance.heads,
                                        instance.nominal)])
    if instance.kind == SHORTEST_PATH:
        doc.update(s=int(instance.s), t=int(instance.t))
    return doc


def _num(c: float):
    return int(c) if float(c).is_integer() else float(c)


def load(path):
    """Read an instance written by :func:`save`; raises ParseError with the
    offending field on malformed input."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
    return from_dict(doc, source=str(path))


def from_dict(doc: dict, source: str = "<dict>"):
    def need(key):
        if key not in doc:
            raise ParseError(f"{source}: missing field {key!r}")
        return doc[key]

    kind = need("kind")
    if kind == "selection":
        return SelectionInstance(n=int(need("n")), p=int(need("p")),
                                 nominal=np.array(need("costs"), dtype=np.float64))
    if kind not in (SHORTEST_PATH, SPANNING_TREE):
        raise ParseError(f"{source}: unknown kind {kind!r}")
    arcs = need("arcs")
    if not isinstance(arcs, list):
        raise ParseError(f"{source}: field 'arcs' must be a list")
    tails, heads, costs = [], [], []
    for idx, arc in enumerate(arcs):
        for fieldname in ("tail", "head", "cost"):
            if fieldname not in arc:
                raise ParseError(
                    f"{source}: arc {idx} missing field {fieldname!r}")
        tails.append(int(arc["tail"]))
        heads.append(int(arc["head"]))
        costs.append(float(arc["cost"]))
    kwargs = {}
    if kind == SHORTEST_PATH:
        kwargs = {"s": int(need("s")), "t": int(need("t"))}
    return GraphInstance(num_nodes=int(need("nodes")), tails=np.array(tails),
                         heads=np.array(heads),
                         nominal=np.array(costs, dtype=np.float64),
                         kind=kind, **kwargs)


def same_instance(a, b) -> bool:
    """Structural equality (dataclass __eq__ is unusable with arrays)."""
    if type(a) is not type(b):
        return False
    if isinstance(a, SelectionInstance):
        return a.n == b.n and a.p == b.p and np.array_equal(a.nominal, b.nominal)
    return (a.num_nodes == b.num_nodes and a.kind == b.kind
            and a.s == b.s and a.t == b.t
            and np.array_equal(a.tails, b.tails)
            and np.array_equal(a.heads, b.heads)
            and np.array_equal(a.nominal, b.nominal))
