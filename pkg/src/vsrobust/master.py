"""Exact compromise min-max-regret solver.

The master problem approximates the weighted regret integral on a finite
set of size segments.  Each segment carries its exact weight mass and is
evaluated at its weight centroid, which keeps the master a true relaxation
for any piecewise-linear weight density (for a constant density the centroid
is the segment midpoint).  The outer loop alternates master solves with the
exact evaluator until the bounds close.

Three interchangeable backends solve the master: exhaustive enumeration
(exact at desk scale, no dependencies), the bundled MILP solver from scipy
(HiGHS), and an adapter that emits CPLEX-LP files and shells out to any
external solver via ``VSR_SOLVER_CMD``.
"""

from __future__ import annotations

import bisect
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, milp

from .exceptions import (BackendError, CapacityError, DomainError,
                         InfeasibleError, StallError, UsageError)
from .model import EPS_LAMBDA, WeightFunction, solution_key
from .problems import (GraphInstance, Instance, SHORTEST_PATH, SPANNING_TREE,
                       SelectionInstance, enumerate_solutions, solve_nominal)
from .regret import compute_val, regret_at

GENERAL = "general"
DUAL_SP = "dual_sp"

DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class Segment:
    """One piece of the size axis: [lo, hi] with weight mass and the point
    at which regret cuts are evaluated (the weight centroid)."""

    lo: float
    hi: float
    weight: float
    point: float


def build_segments(lambda_set: Sequence[float], w: WeightFunction) -> list[Segment]:
    """Partition the weight domain along the sorted changepoint set.

    Zero-mass segments are dropped; the remaining weights sum to the total
    mass of ``w``.
    """
    dom = w.domain
    cuts = [dom.lo]
    for lam in sorted(lambda_set):
        if lam <= cuts[-1] + EPS_LAMBDA or lam >= dom.hi - EPS_LAMBDA:
            continue
        cuts.append(float(lam))
    cuts.append(dom.hi)
    segments = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        m0, m1 = w.moments(a, b)
        if m0 <= 0.0:
            continue
        segments.append(Segment(lo=a, hi=b, weight=m0, point=m1 / m0))
    return segments


# ---------------------------------------------------------------------------
# model container


@dataclass
class VariableSpec:
    name: str
    kind: str  # 'B' binary or 'C' continuous
    lb: float
    ub: float


@dataclass
class MilpModel:
    """Sparse linear model: minimize obj @ v subject to rows, with metadata
    mapping variables back to the combinatorial instance."""

    variables: list = field(default_factory=list)
    obj: np.ndarray = None
    row_coeffs: list = field(default_factory=list)  # list of {var: coef}
    row_senses: list = field(default_factory=list)  # '<=', '>=', '='
    row_rhs: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def add_var(self, name, kind, lb, ub) -> int:
        self.variables.append(VariableSpec(name, kind, lb, ub))
        return len(self.variables) - 1

    def add_row(self, coeffs: dict, sense: str, rhs: float):
        if sense not in ("<=", ">=", "="):
            raise UsageError(f"bad constraint sense {sense!r}")
        for coef in coeffs.values():
            if not np.isfinite(coef):
                raise UsageError("constraint coefficients must be finite")
        self.row_coeffs.append(dict(coeffs))
        self.row_senses.append(sense)
        self.row_rhs.append(float(rhs))

    def constraint_matrix(self):
        rows, cols, vals = [], [], []
        for r, coeffs in enumerate(self.row_coeffs):
            for c, v in coeffs.items():
                rows.append(r)
                cols.append(c)
                vals.append(v)
        a = sp.coo_matrix((vals, (rows, cols)),
                          shape=(len(self.row_coeffs), self.num_vars))
        lb = np.empty(len(self.row_coeffs))
        ub = np.empty(len(self.row_coeffs))
        for r, (sense, rhs) in enumerate(zip(self.row_senses, self.row_rhs)):
            if sense == "<=":
                lb[r], ub[r] = -np.inf, rhs
            elif sense == ">=":
                lb[r], ub[r] = rhs, np.inf
            else:
                lb[r], ub[r] = rhs, rhs
        return a.tocsr(), lb, ub

    def check_assignment(self, values: np.ndarray, tol: float = 1e-6) -> bool:
        """Feasibility of a full variable assignment within tolerance."""
        a, lb, ub = self.constraint_matrix()
        act = a @ values
        if np.any(act < lb - tol) or np.any(act > ub + tol):
            return False
        for j, v in enumerate(self.variables):
            if values[j] < v.lb - tol or values[j] > v.ub + tol:
                return False
        return True


@dataclass(frozen=True)
class BackendResult:
    status: str  # 'optimal' | 'infeasible' | 'error'
    assignment: Optional[np.ndarray]
    objective: Optional[float]
    message: str = ""


@dataclass
class IterationRecord:
    k: int
    lb: float
    ub: float
    lambda_count: int
    wall_time: float


@dataclass
class MasterState:
    """Accumulated changepoints, cut pool and bound log of the outer loop."""

    lambda_set: list = field(default_factory=list)
    pool: list = field(default_factory=list)
    iterations: list = field(default_factory=list)

    @property
    def lower_bounds(self):
        return [r.lb for r in self.iterations]

    @property
    def upper_bounds(self):
        return [r.ub for r in self.iterations]


# ---------------------------------------------------------------------------
# formulation builders


def _feasibility_rows(model: MilpModel, instance: Instance):
    """Encode membership of x in the feasible set (linear part).

    Spanning trees additionally need exponentially many cycle bans; those
    are added lazily by MILP backends (``meta['lazy_cycles']``)."""
    if isinstance(instance, SelectionInstance):
        model.add_row({i: 1.0 for i in range(instance.n)}, "=", float(instance.p))
        return
    if instance.kind == SHORTEST_PATH:
        m = instance.num_arcs
        for v in range(instance.num_nodes):
            coeffs = {}
            for a in range(m):
                if instance.tails[a] == v:
                    coeffs[a] = coeffs.get(a, 0.0) + 1.0
                if instance.heads[a] == v:
                    coeffs[a] = coeffs.get(a, 0.0) - 1.0
            coeffs = {a: c for a, c in coeffs.items() if c != 0.0}
            rhs = 1.0 if v == instance.s else (-1.0 if v == instance.t else 0.0)
            if coeffs or rhs:
                model.add_row(coeffs, "=", rhs)
        return
    model.add_row({i: 1.0 for i in range(instance.num_arcs)}, "=",
                  float(instance.num_nodes - 1))
    model.meta["lazy_cycles"] = True


def _general_from_segments(instance: Instance, segments: Sequence[Segment],
                           pool: Sequence[np.ndarray]) -> MilpModel:
    if not segments:
        raise UsageError("master model needs at least one segment")
    if not pool:
        raise UsageError("master model needs a non-empty cut pool")
    nominal = instance.nominal
    n = instance.ground_size
    model = MilpModel()
    for i in range(n):
        model.add_var(f"x_{i}", "B", 0.0, 1.0)
    z0 = model.num_vars
    for j in range(len(segments)):
        # regret is non-negative for every x (the x = y cut), so z >= 0
        model.add_var(f"z_{j}", "C", 0.0, np.inf)
    obj = np.zeros(n + len(segments))
    for j, seg in enumerate(segments):
        obj[z0 + j] = seg.weight
    model.obj = obj
    for j, seg in enumerate(segments):
        lam = seg.point
        for y in pool:
            yf = y.astype(np.float64)
            # z_j >= sum (1+lam) c_i x_i - sum (1 - lam + 2 lam x_i) c_i y_i
            coeffs = {z0 + j: 1.0}
            for i in range(n):
                c = -((1.0 + lam) * nominal[i] - 2.0 * lam * nominal[i] * yf[i])
                if c != 0.0:
                    coeffs[i] = c
            model.add_row(coeffs, ">=", -(1.0 - lam) * float(nominal @ yf))
    _feasibility_rows(model, instance)
    model.meta.update(style=GENERAL, instance=instance, segments=list(segments),
                      pool=[np.asarray(y, dtype=np.int8) for y in pool],
                      num_x=n)
    return model


def _dual_sp_from_segments(graph: GraphInstance,
                           segments: Sequence[Segment]) -> MilpModel:
    if not isinstance(graph, GraphInstance) or graph.kind != SHORTEST_PATH:
        raise UsageError("dual formulation exists only for shortest-path instances")
    if not segments:
        raise UsageError("master model needs at least one segment")
    nominal = graph.nominal
    m = graph.num_arcs
    V = graph.num_nodes
    model = MilpModel()
    for i in range(m):
        model.add_var(f"x_{i}", "B", 0.0, 1.0)
    u0 = model.num_vars
    for j in range(len(segments)):
        for v in range(V):
            if v == graph.s:
                model.add_var(f"u_{j}_{v}", "C", 0.0, 0.0)
            else:
                model.add_var(f"u_{j}_{v}", "C", -np.inf, np.inf)
    obj = np.zeros(model.num_vars)
    for j, seg in enumerate(segments):
        lam = seg.point
        for i in range(m):
            obj[i] += seg.weight * (1.0 + lam) * nominal[i]
        obj[u0 + j * V + graph.t] -= seg.weight
    model.obj = obj
    for j, seg in enumerate(segments):
        lam = seg.point
        for a in range(m):
            # u_head - u_tail <= (1 - lam) c_a + 2 lam c_a x_a
            coeffs = {u0 + j * V + int(graph.heads[a]): 1.0}
            tail_var = u0 + j * V + int(graph.tails[a])
            coeffs[tail_var] = coeffs.get(tail_var, 0.0) - 1.0
            if nominal[a] != 0.0:
                coeffs[a] = -2.0 * lam * nominal[a]
            coeffs = {k: v for k, v in coeffs.items() if v != 0.0}
            model.add_row(coeffs, "<=", (1.0 - lam) * nominal[a])
    _feasibility_rows(model, graph)
    model.meta.update(style=DUAL_SP, instance=graph, segments=list(segments),
                      num_x=m)
    return model


def build_formulation_general(instance: Instance, lambda_set: Sequence[float],
                              pool: Sequence[np.ndarray],
                              w: WeightFunction) -> MilpModel:
    """Cut-pool master model (works for every problem class)."""
    if not list(lambda_set):
        raise UsageError("changepoint set must be non-empty")
    return _general_from_segments(instance, build_segments(lambda_set, w), pool)


def build_formulation_dual_sp(graph: GraphInstance, lambda_set: Sequence[float],
                              w: WeightFunction) -> MilpModel:
    """Compact master model using shortest-path LP duality (node potentials
    per segment); no cut pool is needed."""
    if not list(lambda_set):
        raise UsageError("changepoint set must be non-empty")
    return _dual_sp_from_segments(graph, build_segments(lambda_set, w))


# ---------------------------------------------------------------------------
# backends


class SolverBackend:
    """Backend contract: solve a MilpModel to proven optimality."""

    name = "abstract"
    supports_binary = True
    supports_continuous = True

    def solve(self, model: MilpModel) -> BackendResult:  # pragma: no cover
        raise NotImplementedError


class HighsBackend(SolverBackend):
    """MILP solves via scipy's bundled HiGHS; spanning-tree masters get
    cycle-elimination rows lazily.

    Presolve is off by default: the bundled HiGHS has been observed to
    return a wrong claimed optimum (bad dual bound) on dual-formulation
    masters with presolve enabled, and the algorithm needs true optima for
    valid lower bounds.  ``verify_master_objective`` guards every master
    solve regardless of backend.
    """

    name = "highs"

    def __init__(self, time_limit: Optional[float] = None,
                 presolve: bool = False):
        self.time_limit = time_limit
        self.presolve = presolve

    def solve(self, model: MilpModel) -> BackendResult:
        work = model
        for _ in range(10000):
            res = self._solve_once(work)
            if res.status != "optimal" or not work.meta.get("lazy_cycles"):
                return res
            cycle = _find_cycle(work.meta["instance"],
                                res.assignment[: work.meta["num_x"]])
            if cycle is None:
                return res
            work = _with_extra_row(work, {int(e): 1.0 for e in cycle}, "<=",
                                   float(len(cycle) - 1))
        raise BackendError("cycle elimination did not converge")

    def _solve_once(self, model: MilpModel) -> BackendResult:
        a, lb, ub = model.constraint_matrix()
        integrality = np.array(
            [1 if v.kind == "B" else 0 for v in model.variables])
        bounds = Bounds(np.array([v.lb for v in model.variables]),
                        np.array([v.ub for v in model.variables]))
        options = {"mip_rel_gap": 0.0, "presolve": self.presolve}
        if self.time_limit is not None:
            options["time_limit"] = self.time_limit
        res = milp(c=model.obj, constraints=LinearConstraint(a, lb, ub),
                   integrality=integrality, bounds=bounds, options=options)
        if res.status == 2:
            return BackendResult("infeasible", None, None, res.message)
        if not res.success:
            raise BackendError(f"MILP solve failed: {res.message}")
        values = np.asarray(res.x, dtype=np.float64)
        for j, v in enumerate(model.variables):
            if v.kind == "B":
                values[j] = round(values[j])
        return BackendResult("optimal", values, float(res.fun), res.message)


class EnumerationBackend(SolverBackend):
    """Exact master solves by exhausting the feasible set of the attached
    instance; the continuous variables are resolved in closed form (cut
    maxima for the general style, shortest-path distances for the dual)."""

    name = "enum"

    def __init__(self, limit: int = 10**6):
        self.limit = limit

    def solve(self, model: MilpModel) -> BackendResult:
        style = model.meta.get("style")
        if style == GENERAL:
            return self._solve_general(model)
        if style == DUAL_SP:
            return self._solve_dual_sp(model)
        return self._solve_raw(model)

    def _solve_general(self, model: MilpModel) -> BackendResult:
        instance = model.meta["instance"]
        segments = model.meta["segments"]
        pool = model.meta["pool"]
        nominal = instance.nominal
        sols = enumerate_solutions(instance, limit=self.limit)
        P = np.array(sols, dtype=np.float64)
        Y = np.array(pool, dtype=np.float64)
        pc = P @ nominal
        cy = Y @ nominal
        pcy = P @ (Y * nominal).T  # (S, L): cost mass shared with each cut
        objs = np.zeros(P.shape[0])
        zs = np.zeros((P.shape[0], len(segments)))
        for j, seg in enumerate(segments):
            lam = seg.point
            cuts = ((1.0 + lam) * pc[:, None]
                    - (1.0 - lam) * cy[None, :]
                    - 2.0 * lam * pcy)
            zj = np.maximum(cuts.max(axis=1), 0.0)
            zs[:, j] = zj
            objs += seg.weight * zj
        best_idx = int(np.argmin(objs))
        best_obj = float(objs[best_idx])
        best_z = zs[best_idx]
        values = np.zeros(model.num_vars)
        values[: model.meta["num_x"]] = sols[best_idx]
        values[model.meta["num_x"]:] = best_z
        return BackendResult("optimal", values, best_obj)

    def _solve_dual_sp(self, model: MilpModel) -> BackendResult:
        graph = model.meta["instance"]
        segments = model.meta["segments"]
        nominal = graph.nominal
        sols = enumerate_solutions(graph, limit=self.limit)
        best_obj = np.inf
        best_idx = -1
        for idx, x in enumerate(sols):
            obj = 0.0
            xf = x.astype(np.float64)
            for seg in segments:
                lam = seg.point
                costs = nominal * (1.0 - lam + 2.0 * lam * xf)
                _, opt = solve_nominal(graph, costs)
                obj += seg.weight * ((1.0 + lam) * float(nominal @ xf) - opt)
            if obj < best_obj:
                best_obj = obj
                best_idx = idx
        x = sols[best_idx]
        values = np.zeros(model.num_vars)
        values[: model.meta["num_x"]] = x
        # fill node potentials with the actual distances for completeness
        V = graph.num_nodes
        xf = x.astype(np.float64)
        for j, seg in enumerate(segments):
            lam = seg.point
            costs = nominal * (1.0 - lam + 2.0 * lam * xf)
            dist = _all_distances(graph, costs)
            u = np.where(np.isfinite(dist), dist, 0.0)
            values[model.meta["num_x"] + j * V:
                   model.meta["num_x"] + (j + 1) * V] = u
        return BackendResult("optimal", values, float(best_obj))

    def _solve_raw(self, model: MilpModel) -> BackendResult:
        binaries = [j for j, v in enumerate(model.variables) if v.kind == "B"]
        if len(binaries) != model.num_vars:
            raise UsageError(
                "raw enumeration supports pure-binary models only; attach "
                "instance metadata for mixed models")
        if len(binaries) > 25:
            raise CapacityError("too many binary variables to enumerate")
        a, lb, ub = model.constraint_matrix()
        best = None
        best_obj = np.inf
        for mask in range(1 << len(binaries)):
            values = np.array([(mask >> i) & 1 for i in range(len(binaries))],
                              dtype=np.float64)
            act = a @ values
            if np.any(act < lb - 1e-9) or np.any(act > ub + 1e-9):
                continue
            obj = float(model.obj @ values)
            if obj < best_obj:
                best_obj = obj
                best = values
        if best is None:
            return BackendResult("infeasible", None, None)
        return BackendResult("optimal", best, best_obj)


def _all_distances(graph: GraphInstance, costs: np.ndarray) -> np.ndarray:
    from . import _kernels
    indptr, csr_heads, csr_arcs = graph.csr()
    dist, _, _ = _kernels.dijkstra(graph.num_nodes, indptr, csr_heads,
                                   csr_arcs, costs, graph.s)
    return dist


def _find_cycle(graph: GraphInstance, x_values: np.ndarray):
    """Edge-index cycle in the support of x, or None if it is a forest."""
    chosen = [int(a) for a in np.flatnonzero(np.round(x_values) > 0.5)]
    parent = list(range(graph.num_nodes))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    adj: dict[int, list[tuple[int, int]]] = {}
    for e in chosen:
        u, v = int(graph.tails[e]), int(graph.heads[e])
        ru, rv = find(u), find(v)
        if ru == rv:
            # walk u -> v through the accepted forest to recover the cycle
            path_edges = _forest_path(adj, u, v)
            return path_edges + [e]
        parent[ru] = rv
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    return None


def _forest_path(adj, start, goal):
    stack = [(start, -1, [])]
    seen = {start}
    while stack:
        node, _, edges = stack.pop()
        if node == goal:
            return edges
        for nxt, e in adj.get(node, []):
            if nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, node, edges + [e]))
    raise BackendError("forest walk failed; inconsistent cycle detection")


def _with_extra_row(model: MilpModel, coeffs, sense, rhs) -> MilpModel:
    clone = MilpModel(variables=model.variables, obj=model.obj,
                      row_coeffs=list(model.row_coeffs),
                      row_senses=list(model.row_senses),
                      row_rhs=list(model.row_rhs),
                      meta=dict(model.meta))
    clone.add_row(coeffs, sense, rhs)
    return clone


# ---------------------------------------------------------------------------
# CPLEX-LP emission and the external-solver adapter


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_lp(model: MilpModel) -> str:
    """Render the model in CPLEX-LP text format.

    Sections and 17-significant-digit numbers are emitted deterministically
    so the output is stable for golden-file comparison.
    """
    lines = ["Minimize", " obj:" + _expr(model.obj, model)]
    lines.append("Subject To")
    for r, coeffs in enumerate(model.row_coeffs):
        sense = {"<=": "<=", ">=": ">=", "=": "="}[model.row_senses[r]]
        dense = np.zeros(model.num_vars)
        for c, v in coeffs.items():
            dense[c] = v
        lines.append(f" c{r}:{_expr(dense, model)} {sense} "
                     f"{_fmt(model.row_rhs[r])}")
    bounds_lines = []
    for v in model.variables:
        if v.kind == "B":
            continue
        if v.lb == 0.0 and v.ub == np.inf:
            continue  # LP default bound
        if v.lb == -np.inf and v.ub == np.inf:
            bounds_lines.append(f" {v.name} free")
        elif v.lb == v.ub:
            bounds_lines.append(f" {v.name} = {_fmt(v.lb)}")
        else:
            lo = "-inf" if v.lb == -np.inf else _fmt(v.lb)
            hi = "+inf" if v.ub == np.inf else _fmt(v.ub)
            bounds_lines.append(f" {lo} <= {v.name} <= {hi}")
    if bounds_lines:
        lines.append("Bounds")
        lines.extend(bounds_lines)
    binaries = [v.name for v in model.variables if v.kind == "B"]
    if binaries:
        lines.append("Binary")
        for k in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[k:k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def _expr(dense: np.ndarray, model: MilpModel) -> str:
    parts = []
    for j, coef in enumerate(dense):
        if coef == 0.0:
            continue
        name = model.variables[j].name
        if not parts:
            parts.append(f" {_fmt(coef)} {name}")
        elif coef >= 0:
            parts.append(f" + {_fmt(coef)} {name}")
        else:
            parts.append(f" - {_fmt(-coef)} {name}")
    if not parts:
        return " 0 " + model.variables[0].name if model.variables else " 0"
    return "".join(parts)


def parse_solution_file(text: str) -> tuple[str, dict, Optional[float]]:
    """Parse the adapter's solution format: a ``status`` line, an optional
    ``objective`` line, then one ``name value`` pair per line."""
    status = None
    objective = None
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "status":
            status = parts[1]
        elif parts[0] == "objective":
            objective = float(parts[1])
        elif len(parts) == 2:
            try:
                values[parts[0]] = float(parts[1])
            except ValueError as exc:
                raise BackendError(
                    f"unparsable solution line {lineno}: {raw!r}") from exc
        else:
            raise BackendError(f"unparsable solution line {lineno}: {raw!r}")
    if status is None:
        raise BackendError("solution file missing a status line")
    return status, values, objective


class ExternalBackend(SolverBackend):
    """Emit the model as a CPLEX-LP file and invoke an external command.

    The command template contains ``{model}`` and ``{solution}``
    placeholders and defaults to the ``VSR_SOLVER_CMD`` environment
    variable.  The solution file format is the simple ``name value`` layout
    of :func:`parse_solution_file`.
    """

    name = "external"

    def __init__(self, command: Optional[str] = None):
        self.command = command

    def solve(self, model: MilpModel) -> BackendResult:
        work = model
        for _ in range(10000):
            res = backend_emit_and_invoke(work, self.command)
            if res.status != "optimal" or not work.meta.get("lazy_cycles"):
                return res
            cycle = _find_cycle(work.meta["instance"],
                                res.assignment[: work.meta["num_x"]])
            if cycle is None:
                return res
            work = _with_extra_row(work, {int(e): 1.0 for e in cycle}, "<=",
                                   float(len(cycle) - 1))
        raise BackendError("cycle elimination did not converge")


def backend_emit_and_invoke(model: MilpModel,
                            command: Optional[str] = None) -> BackendResult:
    """One emit/invoke/parse round trip against the external solver."""
    command = command or os.environ.get("VSR_SOLVER_CMD")
    if not command:
        raise BackendError(
            "no external solver configured; set VSR_SOLVER_CMD")
    with tempfile.TemporaryDirectory(prefix="vsr_") as tmp:
        model_path = os.path.join(tmp, "model.lp")
        solution_path = os.path.join(tmp, "model.sol")
        with open(model_path, "w") as fh:
            fh.write(write_lp(model))
        argv = [arg.format(model=model_path, solution=solution_path)
                for arg in shlex.split(command)]
        proc = subprocess.run(argv, capture_output=True, text=True)
        if proc.returncode != 0:
            raise BackendError(
                f"external solver exited with {proc.returncode}",
                output=proc.stdout + proc.stderr)
        try:
            with open(solution_path) as fh:
                status, values, objective = parse_solution_file(fh.read())
        except FileNotFoundError as exc:
            raise BackendError("external solver wrote no solution file",
                               output=proc.stdout + proc.stderr) from exc
    if status != "optimal":
        return BackendResult(status, None, None)
    assignment = np.zeros(model.num_vars)
    for j, v in enumerate(model.variables):
        assignment[j] = values.get(v.name, 0.0)
    if objective is None:
        objective = float(model.obj @ assignment)
    return BackendResult("optimal", assignment, objective)


BACKENDS = {
    "enum": EnumerationBackend,
    "highs": HighsBackend,
    "external": ExternalBackend,
}


def make_backend(name: str, **kwargs) -> SolverBackend:
    try:
        cls = BACKENDS[name]
    except KeyError:
        raise UsageError(f"unknown backend {name!r}; choices: {sorted(BACKENDS)}")
    return cls(**kwargs)


# ---------------------------------------------------------------------------
# outer loop


def definitional_objective(model: MilpModel, x: np.ndarray) -> float:
    """Master objective at a fixed binary part with the continuous part
    resolved in closed form (cut maxima / per-segment distances)."""
    instance = model.meta["instance"]
    segments = model.meta["segments"]
    nominal = instance.nominal
    xf = np.asarray(x, dtype=np.float64)
    total = 0.0
    if model.meta["style"] == GENERAL:
        pool = model.meta["pool"]
        for seg in segments:
            lam = seg.point
            best = 0.0
            for y in pool:
                yf = y.astype(np.float64)
                cut = ((1.0 + lam) * float(nominal @ xf)
                       - (1.0 - lam) * float(nominal @ yf)
                       - 2.0 * lam * float((nominal * yf) @ xf))
                best = max(best, cut)
            total += seg.weight * best
        return total
    for seg in segments:
        lam = seg.point
        costs = nominal * (1.0 - lam + 2.0 * lam * xf)
        dist = _all_distances(instance, costs)
        total += seg.weight * ((1.0 + lam) * float(nominal @ xf)
                               - float(dist[instance.t]))
    return total


def verify_master_objective(model: MilpModel, result: BackendResult,
                            tol: float = 1e-5) -> None:
    """Cross-check a claimed master optimum against the definitional
    objective of the returned binary part.

    At a true optimum the continuous variables attain their closed-form
    values, so a mismatch means the solver's answer is inconsistent (seen
    with buggy presolve); failing fast here protects the bound guarantees.
    """
    if model.meta.get("style") not in (GENERAL, DUAL_SP):
        return
    x_raw = np.round(result.assignment[: model.meta["num_x"]]).astype(np.int8)
    expect = definitional_objective(model, x_raw)
    if abs(result.objective - expect) > tol * (1.0 + abs(expect)):
        raise BackendError(
            f"backend reported objective {result.objective} but the "
            f"returned solution evaluates to {expect}; the master bound "
            "would be invalid (if using an external solver, disable its "
            "presolve or tighten its tolerances)")


def _extract_x(model: MilpModel, result: BackendResult) -> np.ndarray:
    instance = model.meta["instance"]
    x = np.round(result.assignment[: model.meta["num_x"]]).astype(np.int8)
    if isinstance(instance, GraphInstance) and instance.kind == SHORTEST_PATH:
        return _clean_path(instance, x)
    return x


def _clean_path(graph: GraphInstance, x: np.ndarray) -> np.ndarray:
    """Strip zero-cost cycles that flow conservation cannot forbid.

    Depth-first search for a simple s-t path inside the support, expanding
    the smallest arc index first; the support always contains one because
    the flow constraints route one unit from s to t.
    """
    support = set(int(a) for a in np.flatnonzero(x))
    if not support:
        raise InfeasibleError("master solution support is empty")
    indptr, csr_heads, csr_arcs = graph.csr()

    def dfs(v, seen, edges):
        if v == graph.t:
            return edges
        for k in range(indptr[v], indptr[v + 1]):
            a = int(csr_arcs[k])
            head = int(csr_heads[k])
            if a in support and head not in seen:
                found = dfs(head, seen | {head}, edges + [a])
                if found is not None:
                    return found
        return None

    path = dfs(graph.s, {graph.s}, [])
    if path is None:
        raise InfeasibleError("master solution support contains no s-t path")
    clean = np.zeros_like(x)
    clean[path] = 1
    return clean


def resolve_formulation(instance: Instance, formulation: str) -> str:
    if formulation in (None, "auto"):
        if isinstance(instance, GraphInstance) and instance.kind == SHORTEST_PATH:
            return DUAL_SP
        return GENERAL
    if formulation == DUAL_SP:
        if not (isinstance(instance, GraphInstance)
                and instance.kind == SHORTEST_PATH):
            raise UsageError("dual formulation requires a shortest-path instance")
        return DUAL_SP
    if formulation == GENERAL:
        return GENERAL
    raise UsageError(f"unknown formulation {formulation!r}")


def algorithm1(instance: Instance, w: WeightFunction,
               backend: Optional[SolverBackend] = None,
               epsilon: float = DEFAULT_EPSILON,
               formulation: str = "auto",
               max_iterations: int = 200,
               ) -> tuple[np.ndarray, float, MasterState]:
    """Row-generation solve of the compromise min-max-regret problem.

    Seeds the changepoint set with the weight-domain midpoint, then
    alternates master solves (lower bounds) with exact evaluation of the
    candidate (upper bounds), accumulating the candidate's changepoints and,
    for the general formulation, its regret solutions, until the bounds meet
    within ``epsilon`` (relative).  Returns the best incumbent.
    """
    if epsilon <= 0:
        raise UsageError("epsilon must be positive")
    backend = backend or HighsBackend()
    style = resolve_formulation(instance, formulation)
    dom = w.domain
    if dom.width == 0.0:
        # zero-length integral: every feasible solution has value zero
        x_hat, _ = solve_nominal(instance, instance.nominal)
        state = MasterState(lambda_set=[dom.lo])
        state.iterations.append(IterationRecord(0, 0.0, 0.0, 1, 0.0))
        return x_hat, 0.0, state
    state = MasterState(lambda_set=[0.5 * (dom.lo + dom.hi)])
    pool_keys = set()
    if style == GENERAL:
        y0, _ = solve_nominal(instance, instance.nominal)
        state.pool.append(y0)
        pool_keys.add(solution_key(y0))
    best_x = None
    best_ub = np.inf
    t0 = time.perf_counter()
    for k in range(max_iterations):
        if style == DUAL_SP:
            model = build_formulation_dual_sp(instance, state.lambda_set, w)
        else:
            model = build_formulation_general(instance, state.lambda_set,
                                              state.pool, w)
        result = backend.solve(model)
        if result.status != "optimal":
            raise BackendError(
                f"master solve failed with status {result.status}")
        verify_master_objective(model, result)
        lb = result.objective
        x = _extract_x(model, result)
        ev = compute_val(instance, x, w)
        ub = ev.val
        if ub < best_ub:
            best_ub = ub
            best_x = x
        state.iterations.append(IterationRecord(
            k=k, lb=lb, ub=ub, lambda_count=len(state.lambda_set),
            wall_time=time.perf_counter() - t0))
        if best_ub - lb <= epsilon * (1.0 + abs(best_ub)):
            return best_x, best_ub, state
        progress = False
        lam_sorted = sorted(state.lambda_set)
        for lam in ev.changepoints:
            pos = bisect.bisect_left(lam_sorted, lam)
            near = (
                (pos > 0 and lam - lam_sorted[pos - 1] <= EPS_LAMBDA)
                or (pos < len(lam_sorted) and lam_sorted[pos] - lam <= EPS_LAMBDA))
            if not near:
                lam_sorted.insert(pos, float(lam))
                progress = True
        state.lambda_set = lam_sorted
        if style == GENERAL:
            for y in ev.witnesses:
                key = solution_key(y)
                if key not in pool_keys:
                    pool_keys.add(key)
                    state.pool.append(y)
                    progress = True
        if not progress:
            raise StallError(
                "no new changepoint or cut while a bound gap remains",
                state=state)
    raise CapacityError(f"row generation exceeded {max_iterations} iterations")


def solve_minmax_regret_fixed(instance: Instance, lam: float,
                              backend: Optional[SolverBackend] = None,
                              formulation: str = "auto",
                              epsilon: float = DEFAULT_EPSILON,
                              ) -> tuple[np.ndarray, float]:
    """Classic fixed-size min-max-regret solve (the Experiment-2 baseline).

    The dual formulation solves one compact model at the given size; the
    general formulation runs a standard cut loop, generating regret
    solutions until the incumbent's true regret meets the master bound.
    """
    if not (0.0 <= lam <= 1.0):
        raise DomainError(f"size {lam} outside [0, 1]")
    backend = backend or HighsBackend()
    style = resolve_formulation(instance, formulation)
    point_segment = [Segment(lo=lam, hi=lam, weight=1.0, point=lam)]
    if style == DUAL_SP:
        model = _dual_sp_from_segments(instance, point_segment)
        result = backend.solve(model)
        if result.status != "optimal":
            raise BackendError(f"master solve failed: {result.status}")
        x = _extract_x(model, result)
        return x, regret_at(instance, x, lam)[0]
    pool = [solve_nominal(instance, instance.nominal)[0]]
    pool_keys = {solution_key(pool[0])}
    for _ in range(10000):
        model = _general_from_segments(instance, point_segment, pool)
        result = backend.solve(model)
        if result.status != "optimal":
            raise BackendError(f"master solve failed: {result.status}")
        x = _extract_x(model, result)
        lb = result.objective
        reg, witness = regret_at(instance, x, lam)
        if reg - lb <= epsilon * (1.0 + abs(reg)):
            return x, reg
        key = solution_key(witness)
        if key in pool_keys:
            raise StallError("regret cut loop stalled")
        pool_keys.add(key)
        pool.append(witness)
    raise CapacityError("regret cut loop exceeded iteration cap")
