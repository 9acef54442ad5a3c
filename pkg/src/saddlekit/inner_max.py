"""Certified inner maximization and the inexact-gradient bundle it induces.

For fixed x the dual subproblem  max_y { F(x,y) - h(y) }  is mu_y-strongly
concave; a delta-accurate maximizer ``w`` turns ``grad_x F(x, w)`` into an
inexact gradient of the partial-max function

    g(x) = max_y { F(x,y) - h(y) },

satisfying the two-sided model envelope with inexactness 2*delta and envelope
constant 2*L, L = l_xx + 2 l_xy^2 / mu_y, together with the error bound
``||grad - grad g(x)|| <= l_xy sqrt(2 delta / mu_y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import fgm
from .core import (
    FeasibleSet,
    InvalidSpecError,
    Metered,
    OracleTally,
    SaddleProblem,
    Vector,
    effective_smoothness,
    set_center,
)


@dataclass
class InexactGrad:
    """A one-point model of g: value, gradient, inexactness, envelope constant.

    ``delta`` is the envelope inexactness (= 2x the inner accuracy actually
    requested), ``l_env`` the envelope constant (= 2x the smoothness of g).
    ``witness_y`` is the approximate inner maximizer behind the bundle.
    """

    value: float
    grad: Vector
    delta: float
    l_env: float
    witness_y: Vector


def _as_metered(problem, tally: Optional[OracleTally]) -> Metered:
    if isinstance(problem, Metered):
        return problem
    return Metered(problem, tally)


def _inner_objective(mp: Metered, x: Vector, domain: Optional[FeasibleSet] = None):
    """Minimization form of the inner problem: phi(y) = h(y) - F(x, y).

    With a prox-friendly h the coupling part is the smooth term and h stays
    composite; otherwise h must be smooth (constant l_y) and the whole
    objective is handled as one smooth term over the feasible set.
    """
    spec = mp.spec
    dom = domain if domain is not None else spec.set_y
    composite_mode = mp.problem.prox_friendly_h and domain is None
    if composite_mode:
        return fgm.CompositeObjective(
            smooth_grad=lambda y: -mp.grad_y_F(x, y),
            l_smooth=max(spec.l_yy, spec.mu_y),
            mu=spec.mu_y,
            prox_model=fgm.prox_model_from_friendly(mp.prox_h),
            domain=dom,
        )
    if mp.problem.grad_h is None:
        raise InvalidSpecError(
            "inner solve needs either a prox-friendly h or a grad_h oracle"
        )
    l_y = spec.l_y if spec.l_y is not None else spec.mu_y
    return fgm.CompositeObjective(
        smooth_grad=lambda y: mp.grad_h(y) - mp.grad_y_F(x, y),
        l_smooth=max(spec.l_yy + l_y, spec.mu_y),
        mu=spec.mu_y,
        domain=dom,
    )


def solve_inner_max(
    problem: SaddleProblem | Metered,
    x: Vector,
    delta: float,
    y0: Optional[Vector] = None,
    max_blocks: int = 256,
    tally: Optional[OracleTally] = None,
) -> tuple[Vector, OracleTally]:
    """Return a certified delta-accurate maximizer of F(x, .) - h(.).

    The stopping rule never touches g(x) itself: for an unconstrained smooth
    inner problem the gap is bounded by ||grad||^2 / (2 mu_y); in the
    composite or constrained case by the proximal-gradient-mapping analogue.
    When the coupling gradient in y is constant (l_yy = 0) and h is
    prox-friendly, a single prox call solves the subproblem exactly.

    Raises :class:`~saddlekit.core.BudgetExceededError` (carrying the best
    iterate) if the block cap is hit before certification.
    """
    if delta <= 0:
        raise InvalidSpecError("inner accuracy delta must be positive")
    mp = _as_metered(problem, tally)
    spec = mp.spec
    x = np.asarray(x, dtype=float)
    if mp.problem.prox_friendly_h and spec.l_yy == 0.0:
        # constant smooth gradient: the model subproblem IS the inner problem
        witness = mp.prox_h(-mp.grad_y_F(x, set_center(spec.set_y, spec.dim_y)), 0.0)
        return witness, mp.tally
    obj = _inner_objective(mp, x)
    start = np.array(y0, dtype=float) if y0 is not None else set_center(spec.set_y, spec.dim_y)
    rep = fgm.solve_to_gap(obj, start, delta, max_blocks=max_blocks, tally=mp.tally)
    return rep.x_final, mp.tally


def inexact_grad_g(
    problem: SaddleProblem | Metered,
    x: Vector,
    delta: float,
    y0: Optional[Vector] = None,
    max_blocks: int = 256,
    tally: Optional[OracleTally] = None,
) -> InexactGrad:
    """Inexact-gradient bundle of g at x from a certified inner solve."""
    mp = _as_metered(problem, tally)
    witness, _ = solve_inner_max(mp, x, delta, y0=y0, max_blocks=max_blocks)
    return inexact_grad_from_witness(mp, x, witness, delta)


def inexact_grad_from_witness(
    problem: SaddleProblem | Metered,
    x: Vector,
    witness: Vector,
    delta: float,
    tally: Optional[OracleTally] = None,
) -> InexactGrad:
    """Package a given delta-accurate inner point as an inexact gradient of g."""
    mp = _as_metered(problem, tally)
    value = mp.value_S_hat(x, witness)
    grad = mp.grad_x_F(x, witness)
    return InexactGrad(
        value=float(value),
        grad=np.asarray(grad, dtype=float),
        delta=2.0 * float(delta),
        l_env=2.0 * effective_smoothness(mp.spec),
        witness_y=np.asarray(witness, dtype=float),
    )


def envelope_check(
    exact_g: Callable[[Vector], float],
    ig: InexactGrad,
    x: Vector,
    z: Vector,
    lower_slack: float = 0.0,
) -> bool:
    """Two-sided model-envelope test of an inexact gradient bundle at probe z.

    True iff  0 <= g(z) - [value + <grad, z - x>] <= l_env/2 ||z-x||^2 + delta
    up to a 1e-9 (1 + |g(z)|) slack on the upper side.  ``lower_slack`` loosens
    the lower side for floating-point comparisons against near-exact bundles.
    """
    gz = float(exact_g(np.asarray(z, dtype=float)))
    lhs = gz - (ig.value + float(ig.grad @ (np.asarray(z) - np.asarray(x))))
    d = np.asarray(z, dtype=float) - np.asarray(x, dtype=float)
    rhs = 0.5 * ig.l_env * float(d @ d) + ig.delta + 1e-9 * (1.0 + abs(gz))
    return (lhs >= -abs(lower_slack)) and (lhs <= rhs)


def grad_error_bound(spec, delta: float) -> float:
    """Worst-case gradient error of a delta-accurate inner solve."""
    return spec.l_xy * math.sqrt(2.0 * delta / spec.mu_y)


class EnvelopeGradOracle:
    """Stateful producer of inexact gradients of g with warm-started inner solves.

    Each call runs one certified inner maximization at the currently
    requested accuracy and returns the resulting bundle; the witness seeds
    the next call.  ``set_delta`` accepts the *envelope* inexactness (the
    inner solver is asked for half of it).
    """

    def __init__(
        self,
        problem: SaddleProblem | Metered,
        delta_env: float,
        tally: Optional[OracleTally] = None,
        max_blocks: int = 256,
    ):
        self._mp = _as_metered(problem, tally)
        if delta_env <= 0:
            raise InvalidSpecError("envelope inexactness must be positive")
        self._delta_env = float(delta_env)
        self._warm: Optional[Vector] = None
        self._max_blocks = max_blocks
        self.last_bundle: Optional[InexactGrad] = None

    @property
    def tally(self) -> OracleTally:
        return self._mp.tally

    @property
    def delta_env(self) -> float:
        return self._delta_env

    def set_delta(self, delta_env: float) -> None:
        if delta_env <= 0:
            raise InvalidSpecError("envelope inexactness must be positive")
        self._delta_env = float(delta_env)

    def reset(self) -> None:
        self._warm = None
        self.last_bundle = None

    def bundle(self, x: Vector) -> InexactGrad:
        ig = inexact_grad_g(
            self._mp,
            x,
            0.5 * self._delta_env,
            y0=self._warm,
            max_blocks=self._max_blocks,
        )
        self._warm = ig.witness_y
        self.last_bundle = ig
        return ig

    def __call__(self, x: Vector) -> Vector:
        return self.bundle(x).grad
