"""Fast gradient method for composite objectives under inexact first-order oracles.

The building block is the accelerated scheme that linearizes the smooth part
and keeps the composite part exact inside the model subproblem

    phi(v) = 1/2 ||v - u||^2 + alpha * ( <grad_smooth(y), v> + composite(v) ),

whose minimizer the caller supplies through ``prox_model``.  With an exact
oracle the trajectory obeys  f(x^N) - f* <= 8 L R^2 / (N+1)^2  with
R^2 = ||x^0 - x*||^2 / 2; a per-call oracle inexactness delta adds 2 N delta.

Three drivers are provided:

* :func:`run_fgm` - a fixed number of accelerated steps;
* :func:`run_restarted_fgm` - the linearly convergent restart wrapper for
  strongly convex objectives, with a per-restart inexactness schedule;
* :func:`solve_to_gap` - restart blocks driven by a computable optimality
  certificate instead of a known distance bound (used by inner solvers).
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    AllSpace,
    BudgetExceededError,
    FeasibleSet,
    HistoryRow,
    InvalidSpecError,
    OracleTally,
    SolveReport,
    Vector,
)


@dataclass
class CompositeObjective:
    """Smooth-plus-composite objective handed to the accelerated drivers.

    ``smooth_grad`` is called once per iteration; it may hide an inexact
    oracle, in which case ``set_delta`` (when provided) lets the restart
    scheduler request a per-call accuracy.  ``prox_model(u, alpha, lin)``
    must return the exact minimizer of the model subproblem above over the
    feasible set.  ``mu`` is the strong-convexity modulus of the *full*
    objective (smooth + composite).
    """

    smooth_grad: Callable[[Vector], Vector]
    l_smooth: float
    mu: float = 0.0
    prox_model: Optional[Callable[[Vector, float, Vector], Vector]] = None
    domain: FeasibleSet = field(default_factory=AllSpace)
    full_value: Optional[Callable[[Vector], float]] = None
    f_star: Optional[float] = None
    set_delta: Optional[Callable[[float], None]] = None
    plain_smooth: bool = False  # no composite beyond the domain indicator

    def __post_init__(self):
        if self.l_smooth <= 0:
            raise InvalidSpecError("l_smooth must be positive")
        if self.prox_model is None:
            self.plain_smooth = True
            self.prox_model = lambda u, alpha, lin: self.domain.project(u - alpha * lin)

    def gap_at(self, x: Vector) -> float:
        if self.full_value is None or self.f_star is None:
            return float("nan")
        return self.full_value(x) - self.f_star


def next_alpha(big_a: float, l: float) -> float:
    """Larger root of  l * alpha^2 = big_a + alpha."""
    if l <= 0:
        raise InvalidSpecError("smoothness constant must be positive")
    return (1.0 + math.sqrt(1.0 + 4.0 * l * big_a)) / (2.0 * l)


def run_fgm(
    obj: CompositeObjective,
    x0: Vector,
    n: int,
    delta: float = 0.0,
    tally: Optional[OracleTally] = None,
    record_history: bool = True,
) -> SolveReport:
    """Run ``n`` accelerated steps from ``x0``.

    ``delta`` is the per-call oracle inexactness, used only for the reported
    bound; realizing it is the oracle's business.  The history logs the
    objective gap whenever the objective carries an exact value oracle.
    """
    tally = tally if tally is not None else OracleTally()
    start = time.perf_counter()
    x = np.array(x0, dtype=float)
    u = x.copy()
    big_a = 0.0
    history: list[HistoryRow] = []
    for k in range(int(n)):
        alpha = next_alpha(big_a, obj.l_smooth)
        a_next = big_a + alpha
        y = (alpha * u + big_a * x) / a_next
        lin = obj.smooth_grad(y)
        u = obj.prox_model(u, alpha, lin)
        x = (alpha * u + big_a * x) / a_next
        big_a = a_next
        if record_history:
            history.append(
                HistoryRow(
                    iteration=k + 1,
                    gap=obj.gap_at(x),
                    tally=tally.snapshot(),
                    wall_ms=(time.perf_counter() - start) * 1e3,
                )
            )
    bound = float("inf")
    return SolveReport(
        x_final=x,
        certified_gap=bound,
        tally=tally,
        converged=False,
        history=history,
        wall_ms=(time.perf_counter() - start) * 1e3,
        extras={"big_a": big_a, "delta": delta, "iterations": int(n)},
    )


class RestartVariant(enum.Enum):
    """Two published choices of restart budget and restart count.

    ``ALG4`` uses N_j = ceil(3 sqrt(2L/mu)) blocks and p = ceil(log2(mu R^2 / eps))
    restarts; ``TEXT`` uses N_j = ceil(3 e sqrt(L/mu)) and
    p = ceil(ln(mu R^2 / eps) / 2).  ALG4 is the default.
    """

    ALG4 = "alg4"
    TEXT = "text"


def restart_budget(l: float, mu: float, variant: RestartVariant = RestartVariant.ALG4) -> int:
    if mu <= 0:
        raise InvalidSpecError("restart budget requires mu > 0")
    if variant is RestartVariant.ALG4:
        return int(math.ceil(3.0 * math.sqrt(2.0 * l / mu)))
    return int(math.ceil(3.0 * math.e * math.sqrt(l / mu)))


def restart_count(
    mu: float, r0_sq: float, epsilon: float, variant: RestartVariant = RestartVariant.ALG4
) -> int:
    if mu <= 0 or epsilon <= 0 or r0_sq <= 0:
        raise InvalidSpecError("restart count requires positive mu, radius, epsilon")
    ratio = mu * r0_sq / epsilon
    if ratio <= 1.0:
        return 1
    if variant is RestartVariant.ALG4:
        return max(1, int(math.ceil(math.log2(ratio))))
    return max(1, int(math.ceil(0.5 * math.log(ratio))))


def run_restarted_fgm(
    obj: CompositeObjective,
    x0: Vector,
    epsilon: float,
    r0: float,
    variant: RestartVariant = RestartVariant.ALG4,
    delta_mode: str = "scheduled",
    fixed_delta: float = 0.0,
    until_certified: bool = False,
    max_restarts: Optional[int] = None,
    tally: Optional[OracleTally] = None,
) -> SolveReport:
    """Restarted accelerated method for ``mu``-strongly convex objectives.

    ``r0`` upper-bounds the starting distance ``||x0 - x*||``.  Each restart
    runs a fixed block of iterations and halves the certified squared
    distance.  ``delta_mode`` controls the oracle-accuracy schedule:

    * ``"scheduled"``: delta_j = L D_j^2 / (4 N^3), which keeps the
      accumulated oracle error below L D_j^2 / (4 N^2) per block;
    * ``"fixed"``: a constant per-call inexactness ``fixed_delta``;
    * ``"exact"``: no inexactness.

    The returned ``certified_gap`` is the running worst-case objective bound;
    ``converged`` reflects ``certified_gap <= epsilon``.  With
    ``until_certified`` the wrapper keeps restarting past the scheduled count
    until the bound is met (or ``max_restarts`` blocks were spent).
    """
    if obj.mu <= 0:
        raise InvalidSpecError("restarted method requires mu > 0")
    if epsilon <= 0 or r0 <= 0:
        raise InvalidSpecError("epsilon and r0 must be positive")
    tally = tally if tally is not None else OracleTally()
    start = time.perf_counter()
    l, mu = obj.l_smooth, obj.mu
    n_j = restart_budget(l, mu, variant)
    p = restart_count(mu, r0 * r0, epsilon, variant)
    cap = max_restarts if max_restarts is not None else (4 * p + 64 if until_certified else p)

    x = np.array(x0, dtype=float)
    d_sq = r0 * r0
    bound = float("inf")
    history: list[HistoryRow] = []
    restarts = 0
    smooth_calls = 0
    while restarts < cap:
        if delta_mode == "scheduled":
            delta_j = l * d_sq / (4.0 * n_j**3)
        elif delta_mode == "fixed":
            delta_j = fixed_delta
        elif delta_mode == "exact":
            delta_j = 0.0
        else:
            raise InvalidSpecError(f"unknown delta_mode {delta_mode!r}")
        if obj.set_delta is not None:
            obj.set_delta(delta_j)
        rep = run_fgm(obj, x, n_j, delta_j, tally=tally, record_history=False)
        x = rep.x_final
        smooth_calls += n_j
        restarts += 1
        bound = 4.0 * l * d_sq / (n_j + 1) ** 2 + 2.0 * n_j * delta_j
        d_sq = min(d_sq, 2.0 * bound / mu)
        history.append(
            HistoryRow(
                iteration=restarts,
                gap=obj.gap_at(x) if obj.full_value is not None else bound,
                tally=tally.snapshot(),
                wall_ms=(time.perf_counter() - start) * 1e3,
            )
        )
        if restarts >= p and (not until_certified or bound <= epsilon):
            break
    return SolveReport(
        x_final=x,
        certified_gap=bound,
        tally=tally,
        converged=bool(bound <= epsilon),
        history=history,
        wall_ms=(time.perf_counter() - start) * 1e3,
        extras={
            "restarts": restarts,
            "block_size": n_j,
            "scheduled_restarts": p,
            "smooth_calls": smooth_calls,
        },
    )


def certificate(obj: CompositeObjective, x: Vector) -> tuple[float, Vector]:
    """Computable optimality certificate for a strongly convex objective.

    For a plain smooth unconstrained objective this is the gradient bound
    ``||grad f(x)||^2 / (2 mu)`` with witness ``x`` itself.  Otherwise one
    proximal-gradient step ``x+`` is taken and the subgradient at ``x+`` is
    bounded through the step length, giving
    ``gap(x+) <= (l + l_c)^2 ||x+ - x||^2 / (2 mu)``.

    Costs one smooth-gradient call plus (in the composite case) one
    prox-model call; both go through the metered closures.
    """
    if obj.mu <= 0:
        raise InvalidSpecError("certificate requires mu > 0")
    g = obj.smooth_grad(x)
    if obj.plain_smooth and isinstance(obj.domain, AllSpace):
        return float(g @ g) / (2.0 * obj.mu), x
    l_c = max(obj.l_smooth, obj.mu)
    x_plus = obj.prox_model(x, 1.0 / l_c, g)
    step_sq = float(np.dot(x_plus - x, x_plus - x))
    bound = (obj.l_smooth + l_c) ** 2 * step_sq / (2.0 * obj.mu)
    return bound, x_plus


def solve_to_gap(
    obj: CompositeObjective,
    x0: Vector,
    target_gap: float,
    max_blocks: int = 256,
    tally: Optional[OracleTally] = None,
) -> SolveReport:
    """Drive the objective gap below ``target_gap`` with certified stops.

    Runs restart blocks of the accelerated method, checking the certificate
    after each block; the certificate's witness becomes the next start.  When
    the block cap is reached first, raises :class:`BudgetExceededError`
    carrying the best iterate.
    """
    if target_gap <= 0:
        raise InvalidSpecError("target gap must be positive")
    tally = tally if tally is not None else OracleTally()
    start = time.perf_counter()
    l_eff = max(obj.l_smooth, obj.mu)
    n_b = int(math.ceil(3.0 * math.sqrt(2.0 * l_eff / obj.mu)))
    x = np.array(x0, dtype=float)
    bound, witness = certificate(obj, x)
    blocks = 0
    history = [
        HistoryRow(0, bound, tally.snapshot(), (time.perf_counter() - start) * 1e3)
    ]
    while bound > target_gap:
        if blocks >= max_blocks:
            raise BudgetExceededError(
                f"certificate still {bound:.3e} > {target_gap:.3e} after {blocks} blocks",
                best=witness,
                tally=tally,
            )
        rep = run_fgm(obj, witness, n_b, 0.0, tally=tally, record_history=False)
        x = rep.x_final
        bound, witness = certificate(obj, x)
        blocks += 1
        history.append(
            HistoryRow(blocks, bound, tally.snapshot(), (time.perf_counter() - start) * 1e3)
        )
    return SolveReport(
        x_final=witness,
        certified_gap=bound,
        tally=tally,
        converged=True,
        history=history,
        wall_ms=(time.perf_counter() - start) * 1e3,
        extras={"blocks": blocks, "block_size": n_b},
    )


# ---------------------------------------------------------------------------
# common model subproblems in closed form
# ---------------------------------------------------------------------------


def quadratic_prox_model(
    weight: float,
    center: Optional[Vector] = None,
    lin_term: Optional[Vector] = None,
    domain: Optional[FeasibleSet] = None,
) -> Callable[[Vector, float, Vector], Vector]:
    """Model-subproblem solver for a quadratic composite.

    Composite ``c(v) = weight/2 ||v - center||^2 + <lin_term, v>``; the model

        min_v 1/2 ||v - u||^2 + alpha (<lin, v> + c(v))

    over an unconstrained domain or a Euclidean ball reduces to a projection
    of the unconstrained minimizer because the objective stays isotropic.
    """
    dom = domain if domain is not None else AllSpace()

    def prox(u: Vector, alpha: float, lin: Vector) -> Vector:
        num = u - alpha * lin
        if lin_term is not None:
            num = num - alpha * lin_term
        if weight != 0.0:
            if center is not None:
                num = num + alpha * weight * center
            v = num / (1.0 + alpha * weight)
        else:
            v = num
        return dom.project(v)

    return prox


def prox_model_from_friendly(
    prox_oracle: Callable[[Vector, float], Vector]
) -> Callable[[Vector, float, Vector], Vector]:
    """Adapt a ``min <c1,v> + composite(v) + c2 ||v||^2`` oracle to the model form.

    Dividing the model objective by alpha gives c1 = lin - u/alpha and
    c2 = 1/(2 alpha).
    """

    def prox(u: Vector, alpha: float, lin: Vector) -> Vector:
        return prox_oracle(lin - u / alpha, 0.5 / alpha)

    return prox
