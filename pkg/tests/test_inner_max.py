import math

import numpy as np
import pytest

import saddlekit as sk
from saddlekit.core import OracleTally


def zero_coupling_problem(dim=2, mu_y=1.0):
    """F identically zero, h = mu_y/2 ||y||^2: the inner maximizer is 0."""
    inst = sk.bilinear_instance(np.zeros((dim, dim)), np.zeros(dim), 1.0, mu_y)
    return inst.problem()


class TestSolveInnerMax:
    def test_b1_maximizer(self, b1_problem):
        w, _ = sk.solve_inner_max(b1_problem, np.array([1.0, 1.0]), 1e-12)
        assert np.allclose(w, [1.0, 2.0], atol=1e-5)

    def test_zero_coupling(self):
        p = zero_coupling_problem()
        w, _ = sk.solve_inner_max(p, np.array([3.0, -1.0]), 1e-10)
        assert np.allclose(w, 0.0, atol=1e-8)

    def test_certified_gap(self, b1, b1_problem):
        x = np.array([1.0, 1.0])
        delta = 0.005
        w, _ = sk.solve_inner_max(b1_problem, x, delta)
        g_x = b1.g_value(x)
        assert g_x == pytest.approx(2.5)
        achieved = b1_problem.value_F(x, w) - b1_problem.value_h(w)
        assert g_x - achieved <= delta + 1e-12

    def test_quadratic_family_certified(self):
        inst = sk.gen_quadratic_saddle(4, 5, 20.0, seed=2)
        p = inst.problem()
        rng = np.random.default_rng(0)
        for delta in (1e-2, 1e-5, 1e-8):
            x = rng.standard_normal(4)
            w, _ = sk.solve_inner_max(p, x, delta)
            y_star = inst.y_star_of(x)
            exact = p.value_F(x, y_star) - p.value_h(y_star)
            achieved = p.value_F(x, w) - p.value_h(w)
            assert exact - achieved <= delta * (1 + 1e-9)

    def test_budget_exceeded(self):
        inst = sk.gen_quadratic_saddle(4, 5, 20.0, seed=2)
        p = inst.problem()
        with pytest.raises(sk.BudgetExceededError) as err:
            sk.solve_inner_max(p, np.full(4, 50.0), 1e-14, max_blocks=0)
        assert err.value.best is not None


class TestInexactGrad:
    def test_forced_witness_bundle(self, b1_problem):
        x = np.array([1.0, 1.0])
        ig = sk.inexact_grad_from_witness(b1_problem, x, np.array([1.0, 1.9]), 0.005)
        assert np.allclose(ig.grad, [1.0, 3.8])
        err = np.linalg.norm(ig.grad - np.array([1.0, 4.0]))
        bound = b1_problem.spec.l_xy * math.sqrt(2 * 0.005 / b1_problem.spec.mu_y)
        assert err == pytest.approx(0.2)
        assert bound == pytest.approx(0.2)
        assert ig.delta == pytest.approx(0.01)
        assert ig.l_env == pytest.approx(16.0)

    def test_small_delta_recovers_gradient(self, b1_problem):
        ig = sk.inexact_grad_g(b1_problem, np.array([1.0, 1.0]), 1e-12)
        assert np.allclose(ig.grad, [1.0, 4.0], atol=1e-5)

    def test_zero_coupling_gradient(self):
        p = zero_coupling_problem()
        for x in (np.zeros(2), np.array([4.0, -2.0])):
            ig = sk.inexact_grad_g(p, x, 1e-3)
            assert np.allclose(ig.grad, 0.0)

    def test_gradient_error_bound_sampled(self):
        rng = np.random.default_rng(4)
        instances = [sk.gen_bilinear(4, 3, 30.0, 0), sk.gen_quadratic_saddle(3, 4, 10.0, 1)]
        for i in range(60):
            inst = instances[i % 2]
            p = inst.problem()
            x = rng.standard_normal(inst.dims[0])
            delta = 10.0 ** rng.uniform(-8, -2)
            ig = sk.inexact_grad_g(p, x, delta)
            err = np.linalg.norm(ig.grad - inst.g_grad(x))
            assert err <= p.spec.l_xy * math.sqrt(2 * delta / p.spec.mu_y) + 1e-8

    def test_finite_difference_match(self, b1):
        # central differences of the exact partial max against the bundle
        p = b1.problem()
        x = np.array([0.4, -0.3])
        delta = 1e-10
        ig = sk.inexact_grad_g(p, x, delta)
        step = 1e-5
        fd = np.zeros(2)
        for i in range(2):
            e = np.zeros(2)
            e[i] = step
            fd[i] = (b1.g_value(x + e) - b1.g_value(x - e)) / (2 * step)
        assert np.allclose(ig.grad, fd, atol=1e-7 + math.sqrt(delta))


class TestEnvelopeCheck:
    def test_exact_witness_probe(self, b1, b1_problem):
        x = np.array([1.0, 1.0])
        ig = sk.inexact_grad_g(b1_problem, x, 1e-9)
        assert sk.envelope_check(b1.g_value, ig, x, np.zeros(2), lower_slack=1e-10)

    def test_probe_at_base_point(self, b1, b1_problem):
        x = np.array([1.0, 1.0])
        ig = sk.inexact_grad_from_witness(b1_problem, x, np.array([1.0, 1.9]), 0.005)
        # z = x reduces to 0 <= g(x) - value <= delta
        assert sk.envelope_check(b1.g_value, ig, x, x)

    def test_corrupted_gradient_detected(self, b1, b1_problem):
        x = np.array([1.0, 1.0])
        ig = sk.inexact_grad_g(b1_problem, x, 1e-12)
        ig.delta = 0.0
        ig.grad = ig.grad + np.array([1.0, 0.0])
        # brute-force probe grid finds a violation
        grid = [np.array([a, c]) for a in np.linspace(-2, 3, 11) for c in np.linspace(-2, 3, 11)]
        assert any(not sk.envelope_check(b1.g_value, ig, x, z) for z in grid)

    def test_argmax_lipschitz_property(self):
        rng = np.random.default_rng(9)
        inst = sk.gen_bilinear(5, 4, 40.0, seed=3, mu_y=0.7)
        spec = inst.problem().spec
        for _ in range(300):
            x1, x2 = rng.standard_normal(5), rng.standard_normal(5)
            dx = np.linalg.norm(x1 - x2)
            dy = np.linalg.norm(inst.y_star_of(x1) - inst.y_star_of(x2))
            assert dy <= (2 * spec.l_xy / spec.mu_y) * dx + 1e-7


class TestEnvelopeOracle:
    def test_warm_start_and_delta_update(self, b1_problem):
        tally = OracleTally()
        oracle = sk.EnvelopeGradOracle(b1_problem, delta_env=1e-2, tally=tally)
        g1 = oracle(np.array([1.0, 1.0]))
        oracle.set_delta(1e-6)
        g2 = oracle(np.array([1.0, 1.0]))
        assert np.allclose(g2, [1.0, 4.0], atol=1e-2)
        assert oracle.last_bundle.delta == pytest.approx(1e-6)
        with pytest.raises(sk.InvalidSpecError):
            oracle.set_delta(0.0)
