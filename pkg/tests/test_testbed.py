import numpy as np
import pytest

import saddlekit as sk


class TestSpectral:
    def test_diagonal(self):
        lam_max, lam_min_plus, kernel = sk.spectral(np.diag([1.0, 2.0]))
        assert lam_max == pytest.approx(4.0)
        assert lam_min_plus == pytest.approx(1.0)
        assert kernel.shape == (2, 0)

    def test_rank_deficient(self):
        lam_max, lam_min_plus, kernel = sk.spectral(np.array([[1.0, 0.0], [0.0, 0.0]]))
        assert lam_max == pytest.approx(1.0)
        assert lam_min_plus == pytest.approx(1.0)
        assert kernel.shape == (2, 1)
        assert np.allclose(np.abs(kernel[:, 0]), [0.0, 1.0])

    def test_zero_matrix_rejected(self):
        with pytest.raises(sk.InvalidSpecError):
            sk.spectral(np.zeros((2, 2)))

    def test_matches_construction(self):
        # generator singular values vs an independent eigendecomposition
        inst = sk.gen_bilinear(7, 5, 64.0, seed=12)
        lam_max, lam_min_plus, _ = sk.spectral(inst.a)
        assert lam_max == pytest.approx(64.0, rel=1e-8)
        assert lam_min_plus == pytest.approx(1.0, rel=1e-8)
        assert inst.spectral.lambda_max == pytest.approx(lam_max, abs=1e-8)


class TestGenerators:
    def test_b1_closed_form(self, b1):
        assert np.allclose(b1.closed_form_x, [0.5, 0.2])
        assert np.allclose(b1.closed_form_y, [0.5, 0.4])

    def test_isotropic_when_cond_one(self):
        inst = sk.gen_bilinear(4, 4, 1.0, seed=0)
        assert inst.spectral.lambda_max == pytest.approx(inst.spectral.lambda_min_plus)

    def test_seed_reproducible_bitwise(self):
        a = sk.gen_bilinear(6, 5, 30.0, seed=3)
        b = sk.gen_bilinear(6, 5, 30.0, seed=3)
        assert a.a.tobytes() == b.a.tobytes()
        assert a.b.tobytes() == b.b.tobytes()
        c = sk.gen_quadratic_saddle(6, 5, 30.0, seed=3)
        d = sk.gen_quadratic_saddle(6, 5, 30.0, seed=3)
        assert c.a.tobytes() == d.a.tobytes() and c.p_diag.tobytes() == d.p_diag.tobytes()

    def test_closed_form_zeroes_operator(self):
        for seed in range(6):
            inst = sk.gen_bilinear(5, 7, 40.0, seed=seed, mu_x=0.7, mu_y=1.4)
            op = sk.assemble_saddle_operator(inst.problem())
            z_star = np.concatenate([inst.closed_form_x, inst.closed_form_y])
            assert np.linalg.norm(op.evaluate(z_star)) <= 1e-8
        for seed in range(6):
            inst = sk.gen_quadratic_saddle(4, 6, 25.0, seed=seed)
            op = sk.assemble_saddle_operator(inst.problem())
            z_star = np.concatenate([inst.closed_form_x, inst.closed_form_y])
            assert np.linalg.norm(op.evaluate(z_star)) <= 1e-8

    def test_declared_constants_bound_difference_quotients(self):
        rng = np.random.default_rng(5)
        inst = sk.gen_quadratic_saddle(5, 4, 30.0, seed=8)
        p = inst.problem()
        s = p.spec
        for _ in range(200):
            x1, x2 = rng.standard_normal(5), rng.standard_normal(5)
            y1, y2 = rng.standard_normal(4), rng.standard_normal(4)
            dx, dy = np.linalg.norm(x1 - x2), np.linalg.norm(y1 - y2)
            if dx > 1e-9:
                assert np.linalg.norm(p.grad_x_F(x1, y1) - p.grad_x_F(x2, y1)) <= s.l_xx * dx * (1 + 1e-9)
                assert np.linalg.norm(p.grad_y_F(x1, y1) - p.grad_y_F(x2, y1)) <= s.l_xy * dx * (1 + 1e-9)
                assert np.linalg.norm(p.grad_r(x1) - p.grad_r(x2)) <= s.l_x * dx * (1 + 1e-9)
            if dy > 1e-9:
                assert np.linalg.norm(p.grad_x_F(x1, y1) - p.grad_x_F(x1, y2)) <= s.l_xy * dy * (1 + 1e-9)
                assert np.linalg.norm(p.grad_y_F(x1, y1) - p.grad_y_F(x1, y2)) <= s.l_yy * dy * (1 + 1e-9)
                assert np.linalg.norm(p.grad_h(y1) - p.grad_h(y2)) <= s.l_y * dy * (1 + 1e-9)

    def test_quadratic_family_inner_argmax(self):
        inst = sk.gen_quadratic_saddle(3, 4, 9.0, seed=1)
        p = inst.problem()
        rng = np.random.default_rng(0)
        x = rng.standard_normal(3)
        y_star = inst.y_star_of(x)
        # stationarity of F(x, .) - h(.)
        assert np.allclose(p.grad_y_F(x, y_star) - p.grad_h(y_star), 0.0, atol=1e-10)

    def test_prox_oracles_solve_their_subproblems(self):
        inst = sk.gen_bilinear(4, 3, 12.0, seed=2, mu_x=0.9, mu_y=1.7)
        p = inst.problem()
        rng = np.random.default_rng(3)
        for _ in range(20):
            c1, c2 = rng.standard_normal(4), rng.uniform(0.0, 2.0)
            v = p.prox_r(c1, c2)
            assert np.allclose(c1 + p.grad_r(v) + 2 * c2 * v, 0.0, atol=1e-10)
            c1y = rng.standard_normal(3)
            w = p.prox_h(c1y, c2)
            assert np.allclose(c1y + p.grad_h(w) + 2 * c2 * w, 0.0, atol=1e-10)

    def test_smoothed_game_scaling(self):
        inst = sk.gen_smoothed_game(10, 100.0, seed=0)
        assert inst.mu_x == pytest.approx(0.05 / 100.0)
        assert inst.spectral.lambda_max == pytest.approx(1.0, rel=1e-6)
        assert inst.spectral.lambda_min_plus == pytest.approx(0.01, rel=1e-6)


class TestLemma1Check:
    def test_diagonal_instance(self, b1):
        rep = sk.lemma1_check(b1, l_y=1.0, samples=500, seed=0)
        assert rep.lipschitz_predicted == pytest.approx(4.0)
        assert rep.lipschitz_empirical <= 4.0 + 1e-6
        assert rep.modulus_predicted == pytest.approx(1.0)
        assert rep.modulus_empirical >= 1.0 - 1e-6
        assert rep.ok

    def test_rank_deficient(self):
        inst = sk.bilinear_instance(np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([1.0, 0.0]))
        rep = sk.lemma1_check(inst, l_y=1.0, samples=500, seed=1)
        assert rep.modulus_empirical >= 1.0 - 1e-6
        assert rep.grad_kernel_overlap <= 1e-9
        assert rep.ok

    def test_zero_matrix(self):
        inst = sk.bilinear_instance(np.zeros((2, 2)), np.zeros(2))
        rep = sk.lemma1_check(inst, l_y=1.0, samples=100, seed=2)
        assert rep.lipschitz_empirical == 0.0
        assert rep.grad_kernel_overlap <= 1e-12

    def test_spread_dual_curvature(self):
        inst = sk.gen_bilinear(5, 6, 50.0, seed=9, mu_y=0.5)
        rep = sk.lemma1_check(inst, l_y=2.0, samples=400, seed=3)
        assert rep.ok
