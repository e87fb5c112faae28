"""Command-line surface: instance generation, the solvers, regret curves,
and the two benchmark experiments at desk scale.

All table output is CSV (comma separated, ``.`` decimals, LF endings) plus a
JSON run manifest with versions, seeds and timings; plotting is left to
downstream tools.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__, instances, master
from .exceptions import VsrError
from .model import WeightFunction
from .regret import compute_val, regret_at
from .minmax import compromise_interval_minmax

DEFAULT_LAMBDAS = (0.0, 0.3, 0.5, 0.7, 1.0)
DEFAULT_GRID = 101
SAMPLE_POINTS = (0.0, 0.25, 0.5, 0.75, 1.0)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_manifest(out_dir, name, args_ns, seeds, started, extra=None):
    doc = {
        "command": name,
        "args": {k: v for k, v in vars(args_ns).items() if k != "func"},
        "package_version": __version__,
        "python_version": sys.version.split()[0],
        "numpy_version": np.__version__,
        "seeds": list(seeds),
        "started_unix": started,
        "elapsed_s": time.time() - started,
    }
    if extra:
        doc.update(extra)
    path = os.path.join(out_dir, f"{name}_manifest.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _backend_from_args(args) -> master.SolverBackend:
    return master.make_backend(args.backend)


def _num_list(text, cast):
    return [cast(tok) for tok in str(text).split(",") if tok != ""]


# ---------------------------------------------------------------------------
# generate


def _layered_configs(args):
    for N in _num_list(args.layers, int):
        for k in _num_list(args.widths, int):
            for ct in _num_list(args.cost_types, str):
                yield {"type": "layered", "N": N, "k": k, "cost_type": ct}


def _twopath_configs(args):
    for L in _num_list(args.lengths, int):
        for d in _num_list(args.densities, float):
            yield {"type": "twopath", "L": L, "d": d}


def _gen_instance(cfg, seed):
    if cfg["type"] == "layered":
        inst = instances.gen_layered(cfg["N"], cfg["k"], cfg["cost_type"], seed)
        stem = f"layered_N{cfg['N']}_k{cfg['k']}_c{cfg['cost_type']}_s{seed}"
    else:
        inst = instances.gen_twopath(cfg["L"], cfg["d"], seed)
        stem = f"twopath_L{cfg['L']}_d{cfg['d']:g}_s{seed}"
    return inst, stem


def cmd_generate(args) -> int:
    started = time.time()
    os.makedirs(args.out_dir, exist_ok=True)
    configs = list(_layered_configs(args) if args.type == "layered"
                   else _twopath_configs(args))
    seeds = []
    count = 0
    for cfg in configs:
        for i in range(args.count):
            seed = args.seed + i
            inst, stem = _gen_instance(cfg, seed)
            gencfg = instances.GeneratorConfig(
                kind=cfg["type"],
                params={k: v for k, v in cfg.items() if k != "type"},
                seed=seed)
            instances.save(inst, os.path.join(args.out_dir, stem + ".json"),
                           seed=seed, generator=gencfg)
            seeds.append(seed)
            count += 1
    _write_manifest(args.out_dir, "generate", args, seeds, started,
                    {"files_written": count})
    print(f"wrote {count} instance files to {args.out_dir}")
    return 0


# ---------------------------------------------------------------------------
# solve


def _solution_report(inst_path, mode, x, val, extra=None):
    doc = {"instance": os.path.abspath(inst_path), "mode": mode,
           "incidence": [int(v) for v in x], "val": float(val)}
    if extra:
        doc.update(extra)
    return doc


def cmd_solve(args) -> int:
    inst = instances.load(args.instance)
    w = WeightFunction.constant(0.0, 1.0)
    backend = _backend_from_args(args)
    if args.mode == "compromise-regret":
        x, val, state = master.algorithm1(
            inst, w, backend=backend, epsilon=args.epsilon,
            formulation=args.formulation)
        log = [[r.k, r.lb, r.ub, r.lambda_count, r.wall_time]
               for r in state.iterations]
        report = _solution_report(
            args.instance, args.mode, x, val,
            {"iterations": log,
             "lambda_set": [float(l) for l in state.lambda_set],
             "epsilon": args.epsilon, "backend": args.backend})
        print(f"val = {val:.9g} after {len(log)} iterations "
              f"(|changepoint set| = {len(state.lambda_set)})")
        for r in state.iterations:
            print(f"  iter {r.k}: LB={r.lb:.9g} UB={r.ub:.9g} "
                  f"segments={r.lambda_count} t={r.wall_time:.2f}s")
    elif args.mode == "compromise-minmax":
        x, val = compromise_interval_minmax(inst, w)
        report = _solution_report(args.instance, args.mode, x, val)
        print(f"val = {val:.9g} (nominal minimizer)")
    elif args.mode == "regret":
        x, reg = master.solve_minmax_regret_fixed(
            inst, args.lam, backend=backend, formulation=args.formulation,
            epsilon=args.epsilon)
        report = _solution_report(args.instance, args.mode, x, reg,
                                  {"lambda": args.lam})
        print(f"regret at lambda={args.lam:g}: {reg:.9g}")
    else:
        raise VsrError(f"unknown mode {args.mode}")
    print("solution:", "".join(str(int(v)) for v in report["incidence"]))
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# curve


def _resolve_solution(spec, inst, backend, epsilon):
    """Solution spec: 'compromise', 'nominal', 'regret:LAM', or '@file'."""
    from .problems import solve_nominal
    if spec.startswith("@"):
        with open(spec[1:]) as fh:
            doc = json.load(fh)
        return np.array(doc["incidence"], dtype=np.int8)
    if spec == "nominal":
        return solve_nominal(inst, inst.nominal)[0]
    if spec == "compromise":
        w = WeightFunction.constant(0.0, 1.0)
        return master.algorithm1(inst, w, backend=backend, epsilon=epsilon)[0]
    if spec.startswith("regret:"):
        lam = float(spec.split(":", 1)[1])
        return master.solve_minmax_regret_fixed(inst, lam, backend=backend,
                                                epsilon=epsilon)[0]
    raise VsrError(f"unknown solution spec {spec!r}")


def _spec_name(spec):
    return spec.replace("@", "file_").replace(":", "_").replace(".", "_") \
        .replace("/", "_")


def cmd_curve(args) -> int:
    from .problems import is_feasible
    inst = instances.load(args.instance)
    backend = _backend_from_args(args)
    w = WeightFunction.constant(0.0, 1.0)
    specs = args.solutions
    solutions = {}
    for spec in specs:
        x = _resolve_solution(spec, inst, backend, args.epsilon)
        if not is_feasible(inst, x):
            raise VsrError(f"solution {spec!r} is infeasible for the instance")
        solutions[spec] = x
    baseline = _resolve_solution(args.baseline, inst, backend, args.epsilon)
    grid = np.linspace(0.0, 1.0, args.grid)
    profiles = {spec: compute_val(inst, x, w).profile
                for spec, x in solutions.items()}
    base_curve = compute_val(inst, baseline, w).profile.value(grid)
    header = ["lambda"]
    for spec in specs:
        header.append(f"reg_{_spec_name(spec)}")
    for spec in specs:
        header.append(f"diff_{_spec_name(spec)}")
    rows = []
    curves = {spec: profiles[spec].value(grid) for spec in specs}
    for gi, lam in enumerate(grid):
        row = [f"{lam:.10g}"]
        row += [f"{curves[spec][gi]:.10g}" for spec in specs]
        row += [f"{curves[spec][gi] - base_curve[gi]:.10g}" for spec in specs]
        rows.append(row)
    _write_csv(args.out, header, rows)
    print(f"wrote {args.out} ({args.grid} grid rows, {len(specs)} solutions)")
    return 0


# ---------------------------------------------------------------------------
# experiment 1


def _exp1_one(payload):
    cfg, seed, backend_name, epsilon = payload
    inst, stem = _gen_instance(cfg, seed)
    try:
        backend = master.make_backend(backend_name)
        w = WeightFunction.constant(0.0, 1.0)
        t0 = time.perf_counter()
        x, val, state = master.algorithm1(inst, w, backend=backend,
                                          epsilon=epsilon)
        elapsed = time.perf_counter() - t0
    except VsrError as exc:
        return ("fail", {"instance_id": stem, "config": cfg, "seed": seed,
                         "error": str(exc)})
    samples = [regret_at(inst, x, lam)[0] for lam in SAMPLE_POINTS]
    row = {
        "instance_id": stem,
        "seed": seed,
        "nodes": inst.num_nodes,
        "arcs": inst.num_arcs,
        "time_s": elapsed,
        "iterations": len(state.iterations),
        "lambda_count": len(state.lambda_set),
        "val": val,
        **{f"reg_at_{p:g}": s for p, s in zip(SAMPLE_POINTS, samples)},
        **{k: v for k, v in cfg.items() if k != "type"},
        "graph_type": cfg["type"],
    }
    return ("ok", row)


def _run_parallel(tasks, jobs, worker):
    if jobs <= 1:
        return [worker(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


def _cell_key(row, keys):
    return tuple(row[k] for k in keys)


def _summaries(rows, row_key, col_key, metrics):
    """Per-cell means in a wide layout: one row per row_key value, one
    column per col_key value, mirroring the experiment tables."""
    out = {}
    for metric in metrics:
        table = {}
        for row in rows:
            cell = (row[row_key], row[col_key])
            table.setdefault(cell, []).append(row[metric])
        row_vals = sorted({r for r, _ in table})
        col_vals = sorted({c for _, c in table})
        header = [row_key] + [f"{col_key}_{c}" for c in col_vals]
        lines = []
        for r in row_vals:
            line = [r]
            for c in col_vals:
                vals = table.get((r, c), [])
                line.append(f"{np.mean(vals):.6g}" if vals else "")
            lines.append(line)
        out[metric] = (header, lines)
    return out


def cmd_experiment1(args) -> int:
    started = time.time()
    os.makedirs(args.out_dir, exist_ok=True)
    configs = list(_layered_configs(args) if args.type == "layered"
                   else _twopath_configs(args))
    tasks = [(cfg, args.seed + i, args.backend, args.epsilon)
             for cfg in configs for i in range(args.count)]
    results = _run_parallel(tasks, args.jobs, _exp1_one)
    rows = [payload for status, payload in results if status == "ok"]
    failures = [payload for status, payload in results if status == "fail"]
    if not rows:
        header = ["instance_id"]
        _write_csv(os.path.join(args.out_dir, "experiment1_raw.csv"),
                   header, [])
        _write_manifest(args.out_dir, "experiment1", args, [], started,
                        {"failures": failures})
        print("empty grid; wrote header-only CSV")
        return 0
    rows.sort(key=lambda r: r["instance_id"])
    header = list(rows[0].keys())
    _write_csv(os.path.join(args.out_dir, "experiment1_raw.csv"), header,
               [[row[h] for h in header] for row in rows])
    row_key = "N" if args.type == "layered" else "L"
    col_key = "k" if args.type == "layered" else "d"
    for metric, (hdr, lines) in _summaries(
            rows, row_key, col_key,
            ["time_s", "iterations", "lambda_count"]).items():
        _write_csv(os.path.join(args.out_dir, f"experiment1_{metric}.csv"),
                   hdr, lines)
    _write_manifest(args.out_dir, "experiment1", args,
                    sorted({r["seed"] for r in rows}), started,
                    {"failures": failures, "rows": len(rows)})
    print(f"experiment1: {len(rows)} runs, {len(failures)} failures -> "
          f"{args.out_dir}")
    return 0 if not failures else 1


# ---------------------------------------------------------------------------
# experiment 2


def _exp2_one(payload):
    path, lambdas, backend_name, epsilon, grid_n = payload
    inst = instances.load(path)
    backend = master.make_backend(backend_name)
    w = WeightFunction.constant(0.0, 1.0)
    x_comp, val_comp, _ = master.algorithm1(inst, w, backend=backend,
                                            epsilon=epsilon)
    grid = np.linspace(0.0, 1.0, grid_n)
    comp_profile = compute_val(inst, x_comp, w).profile
    entry = {
        "instance_id": os.path.splitext(os.path.basename(path))[0],
        "val_compromise": val_comp,
        "dominance_ok": True,
    }
    curves = {"compromise": comp_profile.value(grid)}
    for lam in lambdas:
        x_b, reg_b = master.solve_minmax_regret_fixed(
            inst, lam, backend=backend, epsilon=epsilon)
        ev = compute_val(inst, x_b, w)
        name = f"u{lam:g}"
        curves[name] = ev.profile.value(grid)
        entry[f"val_{name}"] = ev.val
        entry[f"reg_{name}_at_own"] = reg_b
        comp_at_own = float(comp_profile.value(np.array([lam]))[0])
        entry[f"reg_compromise_at_{lam:g}"] = comp_at_own
        if ev.val < val_comp - 1e-6 * (1.0 + abs(val_comp)):
            entry["dominance_ok"] = False
        if reg_b > comp_at_own + 1e-6 * (1.0 + abs(reg_b)):
            entry["dominance_ok"] = False
    return entry, grid, curves


def cmd_experiment2(args) -> int:
    started = time.time()
    os.makedirs(args.out_dir, exist_ok=True)
    lambdas = _num_list(args.lambdas, float)
    tasks = [(path, lambdas, args.backend, args.epsilon, args.grid)
             for path in args.instances]
    results = _run_parallel(tasks, args.jobs, _exp2_one)
    results.sort(key=lambda r: r[0]["instance_id"])
    entries = [r[0] for r in results]
    header = list(entries[0].keys())
    _write_csv(os.path.join(args.out_dir, "experiment2_values.csv"), header,
               [[e[h] for h in header] for e in entries])
    # averaged difference-to-compromise curves
    grid = results[0][1]
    names = [k for k in results[0][2] if k != "compromise"]
    diff_sums = {name: np.zeros_like(grid) for name in names}
    for _, _, curves in results:
        for name in names:
            diff_sums[name] += curves[name] - curves["compromise"]
    rows = []
    for gi, lam in enumerate(grid):
        row = [f"{lam:.10g}"]
        row += [f"{diff_sums[name][gi] / len(results):.10g}" for name in names]
        rows.append(row)
    _write_csv(os.path.join(args.out_dir, "experiment2_curves.csv"),
               ["lambda"] + [f"diff_{n}" for n in names], rows)
    bad = [e["instance_id"] for e in entries if not e["dominance_ok"]]
    _write_manifest(args.out_dir, "experiment2", args, [], started,
                    {"instances": len(entries), "dominance_violations": bad})
    print(f"experiment2: {len(entries)} instances -> {args.out_dir}"
          + (f"; DOMINANCE VIOLATIONS: {bad}" if bad else ""))
    return 0 if not bad else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vsr",
        description="Compromise solutions for robust combinatorial "
                    "optimization with variable-sized uncertainty.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--backend", default="highs",
                       choices=sorted(master.BACKENDS))
        p.add_argument("--epsilon", type=float, default=master.DEFAULT_EPSILON)
        p.add_argument("--formulation", default="auto",
                       choices=["auto", "general", "dual_sp"])
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    g = sub.add_parser("generate", help="write seeded instance files")
    g.add_argument("--type", choices=["layered", "twopath"], required=True)
    g.add_argument("--layers", default="5", help="comma list of N")
    g.add_argument("--widths", default="5", help="comma list of k")
    g.add_argument("--cost-types", default="A", dest="cost_types")
    g.add_argument("--lengths", default="50", help="comma list of L")
    g.add_argument("--densities", default="0.05", help="comma list of d")
    g.add_argument("--count", type=int, default=20)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out-dir", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("instance")
    s.add_argument("--mode", required=True,
                   choices=["compromise-regret", "compromise-minmax", "regret"])
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.add_argument("--report", default=None, help="write JSON report here")
    common(s)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("curve", help="regret-vs-size CSV for solutions")
    c.add_argument("instance")
    c.add_argument("--solutions", nargs="+", required=True,
                   help="'compromise', 'nominal', 'regret:LAM' or '@report.json'")
    c.add_argument("--baseline", default="compromise")
    c.add_argument("--grid", type=int, default=DEFAULT_GRID)
    c.add_argument("--out", required=True)
    common(c)
    c.set_defaults(func=cmd_curve)

    e1 = sub.add_parser("experiment1", help="timing/iteration tables")
    e1.add_argument("--type", choices=["layered", "twopath"], default="layered")
    e1.add_argument("--layers", default="5,10,15")
    e1.add_argument("--widths", default="5,10")
    e1.add_argument("--cost-types", default="A,B", dest="cost_types")
    e1.add_argument("--lengths", default="50,150")
    e1.add_argument("--densities", default="0.05,0.10")
    e1.add_argument("--count", type=int, default=20)
    e1.add_argument("--seed", type=int, default=1)
    e1.add_argument("--out-dir", required=True)
    common(e1)
    e1.set_defaults(func=cmd_experiment1)

    e2 = sub.add_parser("experiment2", help="compare against fixed-size baselines")
    e2.add_argument("instances", nargs="+")
    e2.add_argument("--lambdas", default="0,0.3,0.5,0.7,1.0")
    e2.add_argument("--grid", type=int, default=DEFAULT_GRID)
    e2.add_argument("--out-dir", required=True)
    common(e2)
    e2.set_defaults(func=cmd_experiment2)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VsrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
