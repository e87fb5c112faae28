import numpy as np
import pytest

from vsrobust import (SelectionInstance, WeightFunction,
                      compromise_ellipsoid_minmax, compromise_interval_minmax,
                      ellipsoid_worst_case, enumerate_solutions, solve_nominal,
                      weight_moments)
from vsrobust.instances import SplitMix64

from oracles import random_instance, random_weight, simpson_moments


class TestIntervalMinMax:
    def test_three_item_example(self, unit_weight):
        inst = SelectionInstance(n=3, p=1, nominal=np.array([2.0, 5.0, 9.0]))
        x, val = compromise_interval_minmax(inst, unit_weight)
        assert np.array_equal(x, [1, 0, 0])
        assert val == pytest.approx(3.0)

    def test_zero_costs_give_zero_value(self, unit_weight):
        inst = SelectionInstance(n=3, p=2, nominal=np.zeros(3))
        _, val = compromise_interval_minmax(inst, unit_weight)
        assert val == 0.0

    def test_linear_weight_parallel_edges(self, two_parallel):
        w = WeightFunction([(0.0, 0.0), (1.0, 1.0)])
        x, val = compromise_interval_minmax(two_parallel, w)
        assert np.array_equal(x, [1, 0])
        assert val == pytest.approx(10.0 / 3.0)

    def test_returns_nominal_argmin_on_random_instances(self):
        rng = SplitMix64(13)
        for _ in range(30):
            inst = random_instance(rng)
            w = random_weight(rng)
            x, val = compromise_interval_minmax(inst, w)
            _, v_nom = solve_nominal(inst, inst.nominal)
            assert float(inst.nominal @ x) == pytest.approx(v_nom, rel=1e-12)
            m0, m1 = weight_moments(w, w.lams[0], w.lams[-1])
            assert val == pytest.approx((m0 + m1) * v_nom, rel=1e-12)

    def test_weight_scaling_scales_value_only(self):
        rng = SplitMix64(14)
        inst = SelectionInstance(n=5, p=2,
                                 nominal=np.array([3.0, 1.0, 4.0, 1.0, 5.0]))
        w1 = random_weight(rng)
        w2 = WeightFunction(list(zip(w1.lams, 8.0 * w1.vals)))
        x1, v1 = compromise_interval_minmax(inst, w1)
        x2, v2 = compromise_interval_minmax(inst, w2)
        assert np.array_equal(x1, x2)
        assert v2 == pytest.approx(8.0 * v1, rel=1e-12)


class TestEllipsoidWorstCase:
    def test_zero_size_is_nominal_cost(self):
        c = np.array([3.0, 1.0])
        assert ellipsoid_worst_case(np.array([1, 1]), c, np.eye(2), 0.0) == 4.0

    def test_identity_matrix_unit_vector(self):
        c = np.array([3.0, 7.0])
        out = ellipsoid_worst_case(np.array([1, 0]), c, np.eye(2), 2.0)
        assert out == pytest.approx(5.0)

    def test_dominates_sampled_scenarios(self):
        rng = SplitMix64(15)
        n, m = 5, 3
        C = np.array([[rng.unit() * 2 - 1 for _ in range(m)] for _ in range(n)])
        nominal = np.array([10.0 + 5 * rng.unit() for _ in range(n)])
        x = np.array([1, 0, 1, 1, 0])
        lam = 1.7
        analytic = ellipsoid_worst_case(x, nominal, C, lam)
        best = -np.inf
        for _ in range(100_000):
            xi = np.array([rng.unit() * 2 - 1 for _ in range(m)])
            norm = np.linalg.norm(xi)
            if norm == 0:
                continue
            xi *= lam / norm
            best = max(best, float((nominal + C @ xi) @ x))
        assert analytic >= best - 1e-9
        assert analytic == pytest.approx(best, rel=1e-3)
        # the closed-form maximizer attains the bound
        ctx = C.T @ x.astype(float)
        xi_star = lam * ctx / np.linalg.norm(ctx)
        assert float((nominal + C @ xi_star) @ x) == pytest.approx(analytic)


class TestEllipsoidCompromise:
    def test_centroid_constant_weight(self, unit_weight):
        inst = SelectionInstance(n=3, p=1, nominal=np.array([1.0, 2.0, 3.0]))
        _, _, red = compromise_ellipsoid_minmax(inst, np.eye(3), unit_weight)
        assert red.lambda_prime == pytest.approx(0.5)

    def test_centroid_linear_weight(self):
        w = WeightFunction([(0.0, 0.0), (1.0, 1.0)])
        inst = SelectionInstance(n=2, p=1, nominal=np.array([1.0, 2.0]))
        _, _, red = compromise_ellipsoid_minmax(inst, np.eye(2), w)
        assert red.lambda_prime == pytest.approx(2.0 / 3.0)

    def test_diagonal_example_prefers_low_spread(self, unit_weight):
        inst = SelectionInstance(n=3, p=1, nominal=np.array([2.0, 2.2, 9.0]))
        C = np.diag([3.0, 0.1, 0.1])
        x, val, _ = compromise_ellipsoid_minmax(inst, C, unit_weight)
        assert np.array_equal(x, [0, 1, 0])
        assert val == pytest.approx(2.25)

    def test_agrees_with_numeric_integral_argmin(self):
        rng = SplitMix64(16)
        for _ in range(25):
            inst = random_instance(rng, kinds=("selection", "sp"))
            n = inst.ground_size
            m = int(rng.randint(1, 3))
            C = np.array([[rng.unit() for _ in range(m)] for _ in range(n)])
            w = random_weight(rng)
            x_red, val_red, red = compromise_ellipsoid_minmax(inst, C, w)
            grid = np.linspace(float(w.lams[0]), float(w.lams[-1]), 4001)
            ws = w(grid)
            best, best_val = None, np.inf
            for y in enumerate_solutions(inst):
                worst = np.array([ellipsoid_worst_case(y, inst.nominal, C, l)
                                  for l in grid])
                val = float(np.trapezoid(ws * worst, grid))
                if val < best_val - 1e-12:
                    best, best_val = y, val
            assert np.array_equal(x_red, best)
            assert val_red == pytest.approx(best_val, rel=1e-4)

    def test_weight_scaling_leaves_centroid_invariant(self):
        rng = SplitMix64(18)
        w1 = random_weight(rng)
        w2 = WeightFunction(list(zip(w1.lams, 5.0 * w1.vals)))
        inst = SelectionInstance(n=3, p=1, nominal=np.array([1.0, 2.0, 3.0]))
        _, _, r1 = compromise_ellipsoid_minmax(inst, np.eye(3), w1)
        _, _, r2 = compromise_ellipsoid_minmax(inst, np.eye(3), w2)
        assert r1.lambda_prime == pytest.approx(r2.lambda_prime, rel=1e-12)
