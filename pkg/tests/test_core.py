import numpy as np
import pytest

import saddlekit as sk
from saddlekit.core import (
    EuclideanBall,
    Metered,
    OracleKind,
    OracleTally,
    counted,
    restrict_to_ball,
    set_center,
)


def spec_with(l_xx=0.0, l_xy=0.0, l_yy=0.0, mu_x=1.0, mu_y=1.0, **kw):
    return sk.SaddleSpec(dim_x=2, dim_y=2, mu_x=mu_x, mu_y=mu_y,
                         l_xx=l_xx, l_xy=l_xy, l_yy=l_yy, **kw)


class TestEffectiveSmoothness:
    @pytest.mark.parametrize(
        "l_xx,l_xy,mu_y,expected",
        [(0.0, 2.0, 1.0, 8.0), (5.0, 0.0, 3.0, 5.0), (1.0, 3.0, 2.0, 10.0)],
    )
    def test_values(self, l_xx, l_xy, mu_y, expected):
        assert sk.effective_smoothness(spec_with(l_xx=l_xx, l_xy=l_xy, mu_y=mu_y)) == expected

    def test_nonpositive_mu_y_rejected(self):
        bad = spec_with()
        bad.mu_y = 0.0
        with pytest.raises(sk.InvalidSpecError):
            sk.effective_smoothness(bad)

    def test_monotonicity(self):
        # nondecreasing in l_xx and l_xy, nonincreasing in mu_y
        rng = np.random.default_rng(0)
        for _ in range(200):
            l_xx, l_xy, mu_y = rng.uniform(0.0, 10.0, 2).tolist() + [rng.uniform(0.1, 10.0)]
            base = sk.effective_smoothness(spec_with(l_xx=l_xx, l_xy=l_xy, mu_y=mu_y))
            bump = rng.uniform(0.0, 5.0)
            assert sk.effective_smoothness(spec_with(l_xx=l_xx + bump, l_xy=l_xy, mu_y=mu_y)) >= base
            assert sk.effective_smoothness(spec_with(l_xx=l_xx, l_xy=l_xy + bump, mu_y=mu_y)) >= base
            assert sk.effective_smoothness(spec_with(l_xx=l_xx, l_xy=l_xy, mu_y=mu_y + bump)) <= base


class TestRegularize:
    def test_values(self):
        assert sk.regularize(0.01, 1.0, 1.0) == (0.005, 0.005)
        assert sk.regularize(0.02, 2.0, 1.0) == (0.0025, 0.01)

    @pytest.mark.parametrize("args", [(0.0, 1, 1), (0.1, 0.0, 1), (0.1, 1, -2)])
    def test_nonpositive_rejected(self, args):
        with pytest.raises(sk.InvalidSpecError):
            sk.regularize(*args)

    def test_noop_when_already_strongly_convex(self, b1_problem):
        # mu = 1 >= eps / (2 r^2) = 0.005: moduli unchanged, same object
        out = sk.regularize_problem(b1_problem, 0.01, 1.0, 1.0)
        assert out is b1_problem

    def test_tightens_weak_side_only(self, b1):
        problem = b1.problem()
        problem.spec.mu_x = 1e-4
        out = sk.regularize_problem(problem, 0.01, 1.0, 1.0)
        assert out.spec.mu_x == pytest.approx(0.005)
        assert out.spec.mu_y == 1.0
        assert out.notes["regularization_bias"] == pytest.approx(0.0025)
        # folded quadratic is consistent between value, gradient and prox
        x = np.array([0.3, -0.7])
        d = 0.005 - 1e-4
        assert out.value_r(x) == pytest.approx(problem.value_r(x) + 0.5 * d * float(x @ x))
        assert np.allclose(out.grad_r(x), problem.grad_r(x) + d * x)
        c1, c2 = np.array([0.2, 0.1]), 0.7
        v = out.prox_r(c1, c2)
        # optimality of min <c1,.> + r(.) + d/2||.||^2 + c2||.||^2
        assert np.allclose(c1 + out.grad_r(v) + 2 * c2 * v, 0.0, atol=1e-12)


class TestTally:
    def test_merge_adds(self):
        a = OracleTally({OracleKind.GRAD_R: 3})
        b = OracleTally({OracleKind.GRAD_R: 4})
        assert sk.tally_merge(a, b).count(OracleKind.GRAD_R) == 7
        # inputs untouched
        assert a.count(OracleKind.GRAD_R) == 3 and b.count(OracleKind.GRAD_R) == 4

    def test_merge_identity_and_disjoint(self):
        t = OracleTally({OracleKind.GRAD_X_F: 1})
        assert sk.tally_merge(OracleTally(), t) == t
        merged = sk.tally_merge(t, OracleTally({OracleKind.GRAD_Y_F: 2}))
        assert merged.snapshot() == {"gradx_F": 1, "grady_F": 2}

    def test_counters_never_decrease(self):
        t = OracleTally()
        with pytest.raises(ValueError):
            t.bump(OracleKind.GRAD_R, -1)

    def test_counted_wrapper(self):
        t = OracleTally()
        calls = [0]

        def fn(x):
            calls[0] += 1
            return x

        wrapped = counted(fn, t, OracleKind.GRAD_H, matvecs=2)
        for _ in range(5):
            wrapped(1.0)
        assert calls[0] == 5
        assert t.count(OracleKind.GRAD_H) == 5
        assert t.count(OracleKind.MATVEC) == 10


class TestMetering:
    def test_tally_matches_independent_counter(self, b1):
        """Solver tallies equal the invocation counts of the raw closures."""
        problem = b1.problem()
        raw_counts = {"grady_F": 0, "prox_h": 0, "gradx_F": 0}
        base_gyf, base_ph, base_gxf = problem.grad_y_F, problem.prox_h, problem.grad_x_F

        def gyf(x, y):
            raw_counts["grady_F"] += 1
            return base_gyf(x, y)

        def ph(c1, c2):
            raw_counts["prox_h"] += 1
            return base_ph(c1, c2)

        def gxf(x, y):
            raw_counts["gradx_F"] += 1
            return base_gxf(x, y)

        problem.grad_y_F, problem.prox_h, problem.grad_x_F = gyf, ph, gxf
        tally = OracleTally()
        sk.inexact_grad_g(problem, np.array([1.0, 1.0]), 1e-6, tally=tally)
        assert tally.count(OracleKind.GRAD_Y_F) == raw_counts["grady_F"]
        assert tally.count(OracleKind.PROX_H) == raw_counts["prox_h"]
        assert tally.count(OracleKind.GRAD_X_F) == raw_counts["gradx_F"]

    def test_missing_oracle_raises(self, b1):
        problem = b1.problem()
        problem.grad_h = None
        with pytest.raises(sk.UnsupportedProblemError):
            Metered(problem).grad_h(np.zeros(2))


class TestDeterminism:
    def test_repeat_runs_bitwise_identical(self, b1):
        reports = []
        for _ in range(2):
            rep = sk.solve_saddle(b1.problem(), 1e-6, engine="case1", r_x=3.0, r_y=3.0)
            reports.append(rep)
        a, b = reports
        assert a.x_final.tobytes() == b.x_final.tobytes()
        assert a.y_final.tobytes() == b.y_final.tobytes()
        assert a.history_key() == b.history_key()
        assert a.tally == b.tally


class TestSets:
    def test_ball_projection(self):
        ball = EuclideanBall(np.zeros(2), 1.0)
        assert np.allclose(ball.project(np.array([3.0, 4.0])), [0.6, 0.8])
        inside = np.array([0.1, -0.2])
        assert ball.project(inside) is inside

    def test_restrict_to_ball(self):
        ball = restrict_to_ball(sk.AllSpace(), np.zeros(2), 2.0)
        assert isinstance(ball, EuclideanBall)
        inner = EuclideanBall(np.zeros(2), 1.0)
        assert restrict_to_ball(inner, np.zeros(2), 5.0) is inner
        with pytest.raises(sk.UnsupportedProblemError):
            restrict_to_ball(EuclideanBall(np.array([3.0, 0.0]), 2.0), np.zeros(2), 2.0)

    def test_set_center(self):
        assert np.allclose(set_center(EuclideanBall(np.array([1.0, 2.0]), 1.0), 2), [1.0, 2.0])
        assert np.allclose(set_center(sk.AllSpace(), 3), np.zeros(3))
