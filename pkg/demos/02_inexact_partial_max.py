"""Certified inner maximization and the inexact gradients it induces.

For g(x) = max_y {F(x,y) - h(y)} the package never differentiates g
directly: it solves the inner problem to a requested accuracy delta and uses
the coupling gradient at the witness.  This script shows the resulting
gradient error against its l_xy sqrt(2 delta / mu_y) bound and probes the
two-sided model envelope.
"""

import numpy as np

import saddlekit as sk


def main():
    inst = sk.bilinear_instance(np.diag([1.0, 2.0]), np.array([1.0, 1.0]))
    problem = inst.problem()
    x = np.array([1.0, 1.0])
    exact_grad = inst.g_grad(x)
    print(f"exact gradient of the partial max at {x}: {exact_grad}")

    print("\n== gradient error vs requested inner accuracy ==")
    print(f"{'delta':>10} {'error':>12} {'bound':>12}")
    for delta in (1e-2, 1e-4, 1e-6, 1e-8):
        ig = sk.inexact_grad_g(problem, x, delta)
        err = float(np.linalg.norm(ig.grad - exact_grad))
        bound = problem.spec.l_xy * np.sqrt(2 * delta / problem.spec.mu_y)
        print(f"{delta:>10.0e} {err:>12.3e} {bound:>12.3e}")

    print("\n== envelope of a deliberately sloppy witness ==")
    ig = sk.inexact_grad_from_witness(problem, x, np.array([1.0, 1.9]), 0.005)
    print(f"bundle: value={ig.value}, grad={ig.grad}, delta={ig.delta}, l_env={ig.l_env}")
    rng = np.random.default_rng(1)
    holds = all(
        sk.envelope_check(inst.g_value, ig, x, x + rng.standard_normal(2) * s)
        for s in (0.1, 1.0, 3.0)
        for _ in range(200)
    )
    print(f"two-sided envelope held on 600 random probes: {holds}")

    corrupted = sk.inexact_grad_from_witness(problem, x, np.array([1.0, 1.9]), 0.005)
    corrupted.grad = corrupted.grad + np.array([1.0, 0.0])
    corrupted.delta = 0.0
    violated = any(
        not sk.envelope_check(inst.g_value, corrupted, x, x + rng.standard_normal(2))
        for _ in range(200)
    )
    print(f"corrupting the gradient is detected by some probe: {violated}")


if __name__ == "__main__":
    main()
