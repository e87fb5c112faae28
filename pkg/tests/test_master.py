import os
import sys

import numpy as np
import pytest

from vsrobust import (CapacityError, EnumerationBackend, ExternalBackend,
                      GraphInstance, HighsBackend, MilpModel, SHORTEST_PATH,
                      SelectionInstance, UsageError, WeightFunction,
                      algorithm1, backend_emit_and_invoke,
                      build_formulation_dual_sp, build_formulation_general,
                      compute_val, enumerate_solutions, parse_solution_file,
                      regret_at, solve_minmax_regret_fixed, solve_nominal,
                      write_lp)
from vsrobust.master import build_segments
from vsrobust.instances import SplitMix64

from oracles import random_instance, random_mst_graph, random_sp_graph, \
    random_selection, random_weight, riemann_val

MOCK_CMD = (f"{sys.executable} "
            f"{os.path.join(os.path.dirname(__file__), 'mock_solver.py')} "
            "{model} {solution}")

GOLDEN_DUAL_LP = """Minimize
 obj: 6 x_0 + 7.5 x_1 - 0.5 u_0_1 - 0.5 u_1_1
Subject To
 c0: -2 x_0 - 1 u_0_0 + 1 u_0_1 <= 3
 c1: -2.5 x_1 - 1 u_0_0 + 1 u_0_1 <= 3.75
 c2: -6 x_0 - 1 u_1_0 + 1 u_1_1 <= 1
 c3: -7.5 x_1 - 1 u_1_0 + 1 u_1_1 <= 1.25
 c4: 1 x_0 + 1 x_1 = 1
 c5: -1 x_0 - 1 x_1 = -1
Bounds
 u_0_0 = 0
 -19 <= u_0_1 <= 19
 u_1_0 = 0
 -19 <= u_1_1 <= 19
Binary
 x_0 x_1
End
"""


def _raw_one_var():
    m = MilpModel()
    m.add_var("x_0", "B", 0.0, 1.0)
    m.obj = np.array([1.0])
    m.add_row({0: 1.0}, ">=", 0.0)
    return m


def _raw_infeasible():
    m = MilpModel()
    m.add_var("x_0", "B", 0.0, 1.0)
    m.add_var("x_1", "B", 0.0, 1.0)
    m.obj = np.zeros(2)
    m.add_row({0: 1.0, 1: 1.0}, "=", 1.0)
    m.add_row({0: 1.0, 1: 1.0}, "=", 0.0)
    return m


class TestSegments:
    def test_single_interior_point_covers_domain(self, unit_weight):
        segs = build_segments([0.5], unit_weight)
        assert sum(s.weight for s in segs) == pytest.approx(1.0)
        assert segs[0].point == pytest.approx(0.25)
        assert segs[-1].point == pytest.approx(0.75)

    def test_boundary_points_dropped(self, unit_weight):
        segs = build_segments([0.0, 1.0], unit_weight)
        assert len(segs) == 1
        assert segs[0].point == pytest.approx(0.5)

    def test_centroid_equals_midpoint_for_constant_weight(self, unit_weight):
        segs = build_segments([0.125, 0.5], unit_weight)
        for s in segs:
            assert s.point == pytest.approx(0.5 * (s.lo + s.hi))


class TestFormulations:
    def test_general_self_pool_gives_zero_bound(self, two_parallel, unit_weight):
        x0 = np.array([1, 0], dtype=np.int8)
        model = build_formulation_general(two_parallel, [0.5], [x0], unit_weight)
        res = EnumerationBackend().solve(model)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(0.0, abs=1e-12)

    def test_general_two_cut_bound(self, two_parallel, unit_weight):
        pool = [np.array([1, 0], dtype=np.int8), np.array([0, 1], dtype=np.int8)]
        model = build_formulation_general(two_parallel, [0.5], pool, unit_weight)
        res = EnumerationBackend().solve(model)
        # reg(edge0, .) sampled at the two centroids: .5*1.25 + .5*5.75
        assert res.objective == pytest.approx(3.5)
        assert res.objective <= 32.0 / 9.0
        highs = HighsBackend().solve(model)
        assert highs.objective == pytest.approx(res.objective, abs=1e-9)

    def test_empty_inputs_rejected(self, two_parallel, unit_weight):
        with pytest.raises(UsageError):
            build_formulation_general(two_parallel, [], [], unit_weight)
        with pytest.raises(UsageError):
            build_formulation_dual_sp(two_parallel, [], unit_weight)

    def test_dual_requires_shortest_path(self, k3_unit, unit_weight):
        with pytest.raises(UsageError):
            build_formulation_dual_sp(k3_unit, [0.5], unit_weight)

    def test_single_edge_graph_zero_regret(self, unit_weight):
        g = GraphInstance(num_nodes=2, tails=np.array([0]), heads=np.array([1]),
                          nominal=np.array([7.0]), kind=SHORTEST_PATH, s=0, t=1)
        x, val, state = algorithm1(g, unit_weight, backend=EnumerationBackend())
        assert val == pytest.approx(0.0, abs=1e-12)
        assert len(state.iterations) == 1

    def test_dual_model_matches_golden_lp(self, two_parallel, unit_weight):
        model = build_formulation_dual_sp(two_parallel, [0.5], unit_weight)
        assert write_lp(model) == GOLDEN_DUAL_LP

    def test_backend_assignment_satisfies_model(self, two_parallel, unit_weight):
        pool = [np.array([1, 0], dtype=np.int8), np.array([0, 1], dtype=np.int8)]
        for build in (lambda: build_formulation_general(
                          two_parallel, [0.5], pool, unit_weight),
                      lambda: build_formulation_dual_sp(
                          two_parallel, [0.5], unit_weight)):
            model = build()
            for backend in (EnumerationBackend(), HighsBackend()):
                res = backend.solve(model)
                assert model.check_assignment(res.assignment)


class TestAlgorithm1:
    def test_micro_case_exact(self, two_parallel, unit_weight):
        for backend in (EnumerationBackend(), HighsBackend()):
            for formulation in ("dual_sp", "general"):
                x, val, state = algorithm1(two_parallel, unit_weight,
                                           backend=backend,
                                           formulation=formulation)
                assert np.array_equal(x, [1, 0])
                assert val == pytest.approx(32.0 / 9.0, abs=1e-9)
                lbs = state.lower_bounds
                assert lbs == sorted(lbs)
                for rec in state.iterations:
                    assert rec.ub >= rec.lb - 1e-9

    def test_bounds_and_consistency_on_random_instances(self, unit_weight):
        rng = SplitMix64(515)
        for _ in range(12):
            inst = random_instance(rng)
            w = random_weight(rng)
            x, val, state = algorithm1(inst, w, backend=EnumerationBackend())
            ev = compute_val(inst, x, w)
            assert val == pytest.approx(ev.val, rel=1e-9, abs=1e-12)
            lbs = state.lower_bounds
            assert all(b >= a - 1e-9 for a, b in zip(lbs, lbs[1:]))
            for rec in state.iterations:
                assert rec.ub >= rec.lb - 1e-9 * (1 + abs(rec.ub))

    def test_backends_agree_on_random_instances(self, unit_weight):
        rng = SplitMix64(616)
        for _ in range(8):
            inst = random_instance(rng)
            _, val_e, _ = algorithm1(inst, unit_weight,
                                     backend=EnumerationBackend())
            _, val_h, _ = algorithm1(inst, unit_weight, backend=HighsBackend())
            assert val_h == pytest.approx(val_e, rel=1e-7, abs=1e-9)

    def test_enumeration_capacity_error(self, unit_weight):
        inst = SelectionInstance(n=12, p=6, nominal=np.arange(1.0, 13.0))
        with pytest.raises(CapacityError):
            algorithm1(inst, unit_weight, backend=EnumerationBackend(limit=10))

    def test_optimum_beats_every_feasible_solution(self, unit_weight):
        rng = SplitMix64(717)
        for _ in range(6):
            inst = random_instance(rng)
            x, val, _ = algorithm1(inst, unit_weight,
                                   backend=EnumerationBackend())
            for y in enumerate_solutions(inst):
                assert val <= compute_val(inst, y, unit_weight).val + 1e-9


class TestFixedRegret:
    def test_zero_size_returns_nominal(self, two_parallel):
        x, reg = solve_minmax_regret_fixed(two_parallel, 0.0,
                                           backend=EnumerationBackend())
        assert reg == pytest.approx(0.0, abs=1e-12)
        assert np.array_equal(x, solve_nominal(two_parallel,
                                               two_parallel.nominal)[0])

    def test_full_size_parallel_edges(self, two_parallel):
        x, reg = solve_minmax_regret_fixed(two_parallel, 1.0,
                                           backend=EnumerationBackend())
        assert np.array_equal(x, [1, 0])
        assert reg == pytest.approx(8.0)

    def test_is_truly_minimal_on_random_instances(self):
        rng = SplitMix64(818)
        for _ in range(10):
            inst = random_instance(rng)
            lam = round(rng.unit(), 3)
            x, reg = solve_minmax_regret_fixed(inst, lam,
                                               backend=EnumerationBackend(),
                                               formulation="general")
            assert reg == pytest.approx(regret_at(inst, x, lam)[0],
                                        rel=1e-9, abs=1e-12)
            best = min(regret_at(inst, y, lam)[0]
                       for y in enumerate_solutions(inst))
            assert reg == pytest.approx(best, rel=1e-7, abs=1e-9)

    def test_formulations_agree_for_shortest_path(self):
        rng = SplitMix64(919)
        for _ in range(8):
            g = random_sp_graph(rng)
            lam = round(rng.unit(), 3)
            _, r1 = solve_minmax_regret_fixed(g, lam, formulation="dual_sp",
                                              backend=EnumerationBackend())
            _, r2 = solve_minmax_regret_fixed(g, lam, formulation="general",
                                              backend=HighsBackend())
            assert r1 == pytest.approx(r2, rel=1e-7, abs=1e-9)


class TestExternalBackend:
    def test_one_var_model(self):
        res = backend_emit_and_invoke(_raw_one_var(), MOCK_CMD)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(0.0)
        assert res.assignment[0] == pytest.approx(0.0)

    def test_infeasible_model(self):
        res = backend_emit_and_invoke(_raw_infeasible(), MOCK_CMD)
        assert res.status == "infeasible"

    def test_missing_command_raises(self, monkeypatch):
        from vsrobust import BackendError
        monkeypatch.delenv("VSR_SOLVER_CMD", raising=False)
        with pytest.raises(BackendError):
            backend_emit_and_invoke(_raw_one_var(), None)

    def test_command_from_environment(self, monkeypatch, two_parallel,
                                      unit_weight):
        monkeypatch.setenv("VSR_SOLVER_CMD", MOCK_CMD)
        model = build_formulation_dual_sp(two_parallel, [0.5], unit_weight)
        res = ExternalBackend().solve(model)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(3.5)

    def test_failing_command_captured(self):
        from vsrobust import BackendError
        with pytest.raises(BackendError) as err:
            backend_emit_and_invoke(_raw_one_var(),
                                    f"{sys.executable} -c 'import sys; sys.exit(3)'")
        assert "3" in str(err.value)

    def test_matches_enumeration_on_random_models(self, unit_weight):
        # cross-backend agreement on a batch of machine-built models
        rng = SplitMix64(50)
        external = ExternalBackend(MOCK_CMD)
        enum = EnumerationBackend()
        for trial in range(50):
            inst = random_instance(rng, kinds=("selection", "sp"))
            pool = [solve_nominal(inst, inst.nominal)[0]]
            lam_set = sorted({round(rng.unit(), 2) or 0.5 for _ in range(2)})
            if (isinstance(inst, GraphInstance) and rng.next_u64() % 2
                    and inst.kind == SHORTEST_PATH):
                model = build_formulation_dual_sp(inst, lam_set, unit_weight)
            else:
                model = build_formulation_general(inst, lam_set, pool,
                                                  unit_weight)
            res_ext = external.solve(model)
            res_enum = enum.solve(model)
            assert res_ext.status == res_enum.status == "optimal"
            assert res_ext.objective == pytest.approx(res_enum.objective,
                                                      rel=1e-6, abs=1e-6)

    def test_algorithm1_via_external_backend(self, two_parallel, unit_weight):
        x, val, _ = algorithm1(two_parallel, unit_weight,
                               backend=ExternalBackend(MOCK_CMD))
        assert np.array_equal(x, [1, 0])
        assert val == pytest.approx(32.0 / 9.0, abs=1e-9)

    def test_mst_master_with_lazy_cycles(self, unit_weight):
        rng = SplitMix64(60)
        g = random_mst_graph(rng)
        pool = [solve_nominal(g, g.nominal)[0]]
        model = build_formulation_general(g, [0.3, 0.7], pool, unit_weight)
        res_ext = ExternalBackend(MOCK_CMD).solve(model)
        res_enum = EnumerationBackend().solve(model)
        res_highs = HighsBackend().solve(model)
        assert res_ext.objective == pytest.approx(res_enum.objective, abs=1e-6)
        assert res_highs.objective == pytest.approx(res_enum.objective, abs=1e-9)


class TestSolutionFileParsing:
    def test_round_trip_precision(self):
        text = "status optimal\nobjective 3.5555555555555554\nx_0 1\nz_0 0.12345678901234567\n"
        status, values, obj = parse_solution_file(text)
        assert status == "optimal"
        assert obj == pytest.approx(32.0 / 9.0, abs=1e-9)
        assert values["z_0"] == pytest.approx(0.12345678901234567, abs=1e-18)

    def test_missing_status_rejected(self):
        from vsrobust import BackendError
        with pytest.raises(BackendError):
            parse_solution_file("x_0 1\n")

    def test_garbage_line_rejected(self):
        from vsrobust import BackendError
        with pytest.raises(BackendError):
            parse_solution_file("status optimal\nx_0 one two\n")
