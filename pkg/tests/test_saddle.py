import math

import numpy as np
import pytest

import saddlekit as sk
from saddlekit.core import OracleKind, SpectralInfo


class TestSolveSaddle:
    def test_b1_case1(self, b1, b1_problem):
        rep = sk.solve_saddle(b1_problem, 1e-6, engine="case1", r_x=3.0, r_y=3.0)
        assert rep.converged
        assert rep.certified_gap <= 1e-6
        assert np.linalg.norm(rep.x_final - b1.closed_form_x) <= 1e-3
        assert np.linalg.norm(rep.y_final - b1.closed_form_y) <= 1e-3

    def test_auto_matches_flags(self, b1_problem):
        rep = sk.solve_saddle(b1_problem, 1e-5, engine="auto", r_x=3.0, r_y=3.0)
        assert rep.extras["engine"] == "case1"

    def test_mirror_prox_same_saddle_more_calls(self):
        # operator conditioning L/mu = 1e2 or beyond: the extragradient
        # baseline pays for the tiny moduli while the structured pipeline
        # rides the curvature of the partial max
        inst = sk.gen_smoothed_game(12, 100.0, seed=4)
        rx = 2 * (np.linalg.norm(inst.closed_form_x) + 1)
        ry = 2 * (np.linalg.norm(inst.closed_form_y) + 1)
        reps = {}
        for engine in ("case1", "mirror_prox"):
            reps[engine] = sk.solve_saddle(inst.problem(), 1e-6, engine=engine, r_x=rx, r_y=ry)
            assert np.linalg.norm(reps[engine].x_final - inst.closed_form_x) <= 1e-3

        def grad_total(rep):
            t = rep.tally
            return sum(
                t.count(k)
                for k in (OracleKind.GRAD_R, OracleKind.GRAD_H, OracleKind.GRAD_X_F, OracleKind.GRAD_Y_F)
            )

        assert grad_total(reps["mirror_prox"]) > grad_total(reps["case1"])

    def test_decoupled_problem(self):
        # zero coupling: x solves min r, y solves max -h
        inst = sk.bilinear_instance(np.zeros((2, 2)), np.array([1.0, -2.0]))
        rep = sk.solve_saddle(inst.problem(), 1e-8, engine="case1", r_x=6.0, r_y=2.0)
        assert rep.converged
        assert np.allclose(rep.x_final, [1.0, -2.0], atol=1e-3)
        assert np.allclose(rep.y_final, 0.0, atol=1e-6)

    def test_sliding_route(self):
        inst = sk.gen_bilinear(5, 4, 30.0, seed=7)
        rep = sk.solve_saddle(inst.problem(), 1e-6, engine="case2", r_x=6.0, r_y=6.0)
        assert rep.converged
        assert np.linalg.norm(rep.x_final - inst.closed_form_x) <= 1e-3

    def test_smooth_dual_route(self):
        # h declared non-prox-friendly: inner solves use grad_h instead of
        # its prox, and the outer goes through the splitting loop
        inst = sk.gen_quadratic_saddle(4, 5, 10.0, seed=11)
        p = inst.problem()
        p.prox_friendly_h = False
        p.prox_h = None
        rep = sk.solve_saddle(p, 1e-6, engine="auto", r_x=6.0, r_y=6.0)
        assert rep.extras["engine"] == "case3"  # r is still prox-friendly
        assert rep.converged
        assert np.linalg.norm(rep.x_final - inst.closed_form_x) <= 1e-3
        assert rep.tally.count(OracleKind.PROX_H) == 0
        assert rep.tally.count(OracleKind.GRAD_H) > 0

    def test_engine_consistency(self):
        inst = sk.gen_bilinear(6, 6, 50.0, seed=9)
        rx = 2 * (np.linalg.norm(inst.closed_form_x) + 1)
        ry = 2 * (np.linalg.norm(inst.closed_form_y) + 1)
        eps = 1e-6
        xa = sk.solve_saddle(inst.problem(), eps, engine="case1", r_x=rx, r_y=ry).x_final
        xb = sk.solve_saddle(inst.problem(), eps, engine="mirror_prox", r_x=rx, r_y=ry).x_final
        mu_min = min(inst.mu_x, inst.mu_y)
        assert np.linalg.norm(xa - xb) <= 10 * math.sqrt(eps / mu_min)

    def test_regularizer_fold_invariance(self, b1):
        # the same saddle whether the quadratic moduli live in the composites
        # or inside the coupling term
        base = b1.problem()
        mu_x, mu_y, a, b = b1.mu_x, b1.mu_y, b1.a, b1.b
        folded = sk.SaddleProblem(
            spec=base.spec,
            value_r=lambda x: 0.5 * mu_x * float(x @ x),
            value_h=lambda y: 0.5 * mu_y * float(y @ y),
            value_F=lambda x, y: float(y @ (a @ x)) - float(b @ x),
            grad_r=lambda x: mu_x * x,
            grad_h=lambda y: mu_y * y,
            grad_x_F=lambda x, y: a.T @ y - b,
            grad_y_F=lambda x, y: a @ x,
            prox_r=lambda c1, c2: -c1 / (mu_x + 2 * c2),
            prox_h=lambda c1, c2: -c1 / (mu_y + 2 * c2),
            prox_friendly_r=True,
            prox_friendly_h=True,
        )
        rep1 = sk.solve_saddle(base, 1e-8, engine="case1", r_x=3.0, r_y=3.0)
        rep2 = sk.solve_saddle(folded, 1e-8, engine="case1", r_x=3.0, r_y=3.0)
        assert np.allclose(rep1.x_final, rep2.x_final, atol=1e-4)

    def test_history_strictly_increasing_across_attempts(self):
        inst = sk.gen_smoothed_game(12, 100.0, seed=4)
        rx = 2 * (np.linalg.norm(inst.closed_form_x) + 1)
        ry = 2 * (np.linalg.norm(inst.closed_form_y) + 1)
        rep = sk.solve_saddle(inst.problem(), 1e-6, engine="mirror_prox", r_x=rx, r_y=ry)
        iters = [row.iteration for row in rep.history]
        assert all(b > a for a, b in zip(iters, iters[1:]))

    def test_invalid_inputs(self, b1_problem):
        with pytest.raises(sk.InvalidSpecError):
            sk.solve_saddle(b1_problem, -1.0, r_x=1.0, r_y=1.0)
        with pytest.raises(sk.InvalidSpecError):
            sk.solve_saddle(b1_problem, 1e-6)  # unbounded sets need radii


class TestDualityGap:
    def test_at_saddle(self, b1, b1_problem):
        cert = sk.duality_gap(b1_problem, b1.closed_form_x, b1.closed_form_y, 10.0, 10.0, 1e-5)
        assert 0.0 <= cert.gap <= 2e-5 + 1e-12

    def test_at_origin(self, b1_problem):
        cert = sk.duality_gap(b1_problem, np.zeros(2), np.zeros(2), 10.0, 10.0, 1e-6)
        # primal max of -||y||^2/2 is 0; dual min of ||x||^2/2 - <(1,1),x> is -1
        assert cert.primal_value == pytest.approx(0.0, abs=1e-6)
        assert cert.dual_value == pytest.approx(-1.0, abs=1e-6)
        assert cert.gap == pytest.approx(1.0, abs=3e-6)

    def test_positive_off_saddle(self, b1_problem):
        cert = sk.duality_gap(
            b1_problem, np.array([2.0, -1.0]), np.array([-1.0, 2.0]), 10.0, 10.0, 1e-6
        )
        assert cert.gap > 0.1


class TestPredict:
    def test_est_base(self):
        spec = sk.SaddleSpec(dim_x=2, dim_y=2, mu_x=1.0, mu_y=1.0, l_xy=2.0)
        pred = sk.predict_complexity(spec, True, True)
        assert pred.formulas["grad_x_coupling"] == pytest.approx(2.0)

    def test_missing_constants_rejected(self):
        spec = sk.SaddleSpec(dim_x=2, dim_y=2, mu_x=1.0, mu_y=1.0, l_xy=2.0)
        with pytest.raises(sk.InvalidSpecError):
            sk.predict_complexity(spec, False, True)  # smooth r needs l_x

    def test_case1_formulas(self):
        spec = sk.SaddleSpec(dim_x=2, dim_y=2, mu_x=1.0, mu_y=1.0, l_xy=2.0)
        pred = sk.predict_complexity(spec, True, True)
        assert pred.formulas["bilinear_pf"] == pytest.approx(2.0)
        assert pred.formulas["general_pf"] == pytest.approx(2.0)
        # bilinear structure routes the prox/coupling counts to the bilinear formula
        assert pred.counts[OracleKind.PROX_R] == (pytest.approx(2.0), "bilinear_pf")

    def test_kernel_restricted_product(self):
        spec = sk.SaddleSpec(
            dim_x=2, dim_y=2, mu_x=1.0, mu_y=1.0, l_xy=2.0, l_x=1.0, l_y=1.0
        )
        spectral = SpectralInfo(4.0, 1.0, np.zeros((2, 0)))
        pred = sk.predict_complexity(spec, True, True, spectral=spectral)
        assert pred.formulas["kernel_restricted"] == pytest.approx(2.0)

    def test_substitution_only_when_larger(self):
        spec = sk.SaddleSpec(
            dim_x=2, dim_y=2, mu_x=1.0, mu_y=1.0, l_xy=2.0, l_x=1.0, l_y=1.0
        )
        small = sk.predict_complexity(spec, True, True, spectral=SpectralInfo(4.0, 0.5, np.zeros((2, 0))))
        assert not small.mu_x_substituted
        big = sk.predict_complexity(spec, True, True, spectral=SpectralInfo(4.0, 9.0, np.zeros((2, 0))))
        assert big.mu_x_substituted
        assert big.formulas["grad_x_coupling"] == pytest.approx(math.sqrt(4.0 / 9.0))

    def test_general_vs_bilinear_selection(self):
        spec = sk.SaddleSpec(dim_x=2, dim_y=2, mu_x=0.5, mu_y=1.0, l_xx=3.0, l_xy=2.0, l_yy=1.0)
        pred = sk.predict_complexity(spec, True, True)
        assert pred.counts[OracleKind.PROX_R][1] == "general_pf"
        assert pred.formulas["general_pf"] == pytest.approx(3.0 / 0.5)


class TestMatrixGame:
    def test_identity_smoothing(self):
        p = sk.smooth_matrix_game(np.eye(2), 0.04, 1.0)
        assert p.spec.mu_y == pytest.approx(0.02)
        assert p.spec.l_xy == pytest.approx(1.0)
        # h(y) = eps ||y||^2 / (4 r^2)
        y = np.array([2.0, -1.0])
        assert p.value_h(y) == pytest.approx(0.04 * 5.0 / 4.0)

    def test_singular_value_coupling(self):
        p = sk.smooth_matrix_game(np.diag([1.0, 2.0]), 0.04, 1.0)
        assert p.spec.l_xy == pytest.approx(2.0)

    def test_zero_matrix_warns(self):
        with pytest.warns(UserWarning):
            p = sk.smooth_matrix_game(np.zeros((2, 2)), 0.04, 1.0)
        assert p.spec.l_xy == 0.0

    def test_prox_oracles_solve_their_subproblems(self):
        p = sk.smooth_matrix_game(np.diag([1.0, 2.0]), 0.04, 1.0)
        c1, c2 = np.array([0.3, -0.2]), 0.5
        y = p.prox_h(c1, c2)
        assert np.allclose(c1 + p.grad_h(y) + 2 * c2 * y, 0.0, atol=1e-12)


class TestDualView:
    def test_involution_on_oracles(self, b1_problem):
        dv2 = sk.dual_view(sk.dual_view(b1_problem))
        rng = np.random.default_rng(1)
        for _ in range(20):
            x, y = rng.standard_normal(2), rng.standard_normal(2)
            assert dv2.value_F(x, y) == pytest.approx(b1_problem.value_F(x, y))
            assert np.allclose(dv2.grad_x_F(x, y), b1_problem.grad_x_F(x, y))
            assert np.allclose(dv2.grad_y_F(x, y), b1_problem.grad_y_F(x, y))
            assert dv2.value_r(x) == pytest.approx(b1_problem.value_r(x))

    def test_solves_to_swapped_saddle(self, b1, b1_problem):
        dv = sk.dual_view(b1_problem)
        rep = sk.solve_saddle(dv, 1e-6, engine="case1", r_x=3.0, r_y=3.0)
        assert np.linalg.norm(rep.x_final - b1.closed_form_y) <= 1e-3
        assert np.linalg.norm(rep.y_final - b1.closed_form_x) <= 1e-3

    def test_spec_bookkeeping_swap(self):
        spec = sk.SaddleSpec(dim_x=3, dim_y=2, mu_x=1.0, mu_y=2.0, l_xx=0.0, l_yy=5.0, l_xy=1.0)
        inst_problem = sk.SaddleProblem(
            spec=spec,
            value_r=lambda x: 0.0,
            value_h=lambda y: 0.0,
            value_F=lambda x, y: 0.0,
        )
        dv = sk.dual_view(inst_problem)
        assert dv.spec.l_xx == 5.0 and dv.spec.l_yy == 0.0
        assert dv.spec.mu_x == 2.0 and dv.spec.mu_y == 1.0
        assert dv.spec.dim_x == 2 and dv.spec.dim_y == 3
        pred_orig = sk.predict_complexity(spec, True, True)
        pred_dual = sk.predict_complexity(dv.spec, True, True)
        # the self-curvature constants trade places in the predictions
        assert pred_dual.formulas["grad_y_coupling"] != pred_orig.formulas["grad_y_coupling"]
