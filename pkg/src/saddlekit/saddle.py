"""Meta-solver for min_x max_y { r(x) + F(x,y) - h(y) } with metered oracles.

The saddle problem is driven as the strongly convex minimization of
f(x) = r(x) + g(x), g the partial max, whose inexact gradients come from
certified inner maximizations.  Engine selection follows the composites'
prox-friendliness:

* both prox-friendly          -> restarted fast gradient with composite r;
* r smooth, h prox-friendly   -> two-term splitting outer loop;
* r prox-friendly, h smooth   -> splitting outer loop, smooth inner solves;
* both smooth                 -> splitting outer loop, smooth inner solves;
* ``mirror_prox``             -> restarted extragradient baseline.

Solutions are certified by a restricted primal-dual gap over balls around
the starting points, computed by two independent auxiliary solves.
"""

from __future__ import annotations

import enum
import math
import time
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import fgm, inner_max, mirror_prox, sliding
from .core import (
    AllSpace,
    EuclideanBall,
    InvalidSpecError,
    Metered,
    OracleKind,
    OracleTally,
    SaddleProblem,
    SaddleSpec,
    SolveReport,
    SpectralInfo,
    UnsupportedProblemError,
    Vector,
    effective_smoothness,
    restrict_to_ball,
    set_center,
)


class Engine(enum.Enum):
    AUTO = "auto"
    CASE1 = "case1"
    CASE2 = "case2"
    CASE3 = "case3"
    CASE4 = "case4"
    MIRROR_PROX = "mirror_prox"


@dataclass
class GapCertificate:
    """Restricted primal-dual gap certificate.

    ``primal_value`` approximates  max_{y in Q_y ∩ B(2 r_y)} S(x, y)  from
    below, ``dual_value``  min_{x in Q_x ∩ B(2 r_x)} S(x, y)  from above;
    both auxiliary solves are certified to ``inner_accuracy``, whose slack is
    folded into ``gap``.
    """

    primal_value: float
    dual_value: float
    gap: float
    r_x: float
    r_y: float
    inner_accuracy: float


@dataclass
class ComplexityPrediction:
    """Closed-form oracle-count predictions (log factors stripped).

    ``counts`` maps each oracle kind to (base count, formula name); every
    evaluated formula also appears in ``formulas``.
    """

    counts: dict[OracleKind, tuple[float, str]]
    formulas: dict[str, float]
    mu_x_substituted: bool = False


def _flatten_histories(reports) -> list:
    """Concatenate per-attempt histories with a global iteration index."""
    rows = []
    for rep in reports:
        for row in rep.history:
            rows.append(
                replace(row, iteration=len(rows) + 1)
            )
    return rows


def _resolve_engine(problem: SaddleProblem, engine: Engine | str) -> Engine:
    eng = Engine(engine) if not isinstance(engine, Engine) else engine
    if eng is not Engine.AUTO:
        return eng
    pf_r, pf_h = problem.prox_friendly_r, problem.prox_friendly_h
    if pf_r and pf_h:
        return Engine.CASE1
    if not pf_r and pf_h:
        return Engine.CASE2
    if pf_r and not pf_h:
        return Engine.CASE3
    return Engine.CASE4


def _outer_modulus(problem: SaddleProblem) -> tuple[float, float]:
    """Strong convexity of f, with the structured lower bound when sound.

    For bilinear couplings with a trivial kernel and a smooth dual composite
    the partial max is itself strongly convex with modulus
    lambda_min+ / l_y; when that exceeds mu_x the outer loop may use it.
    Returns (modulus of f, modulus contributed by g alone).
    """
    spec = problem.spec
    mu_g = 0.0
    if (
        problem.spectral is not None
        and spec.l_y is not None
        and spec.l_y > 0
        and problem.spectral.kernel_trivial
        and isinstance(spec.set_y, AllSpace)
    ):
        cand = problem.spectral.lambda_min_plus / spec.l_y
        if cand > spec.mu_x:
            mu_g = cand
    return max(spec.mu_x, mu_g), mu_g


def duality_gap(
    problem: SaddleProblem | Metered,
    x: Vector,
    y: Vector,
    r_x: float,
    r_y: float,
    inner_eps: float,
    tally: Optional[OracleTally] = None,
) -> GapCertificate:
    """Certify a candidate pair by two restricted auxiliary solves.

    The primal side maximizes S(x, .) over Q_y intersected with the ball of
    radius 2 r_y around Q_y's center; the dual side minimizes S(., y)
    symmetrically.  Both use gradient oracles of the composites (a prox-only
    composite would need its feasible set unchanged by the restriction).
    """
    if inner_eps <= 0 or r_x <= 0 or r_y <= 0:
        raise InvalidSpecError("duality_gap needs positive radii and accuracy")
    mp = problem if isinstance(problem, Metered) else Metered(problem, tally)
    spec = mp.spec
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    # primal side: minimize h(v) - F(x, v) over the restricted dual set
    dom_y = restrict_to_ball(spec.set_y, set_center(spec.set_y, spec.dim_y), 2.0 * r_y)
    if mp.problem.grad_h is None:
        raise UnsupportedProblemError("duality_gap needs grad_h for the primal side")
    l_y = spec.l_y if spec.l_y is not None else spec.mu_y
    primal_obj = fgm.CompositeObjective(
        smooth_grad=lambda v: mp.grad_h(v) - mp.grad_y_F(x, v),
        l_smooth=max(spec.l_yy + l_y, spec.mu_y),
        mu=spec.mu_y,
        domain=dom_y,
    )
    rep_p = fgm.solve_to_gap(primal_obj, dom_y.project(y), inner_eps, tally=mp.tally)
    y_p = rep_p.x_final
    primal_value = mp.value_r(x) + mp.value_S_hat(x, y_p)

    # dual side: minimize r(v) + F(v, y) over the restricted primal set
    dom_x = restrict_to_ball(spec.set_x, set_center(spec.set_x, spec.dim_x), 2.0 * r_x)
    if mp.problem.grad_r is None:
        raise UnsupportedProblemError("duality_gap needs grad_r for the dual side")
    l_x = spec.l_x if spec.l_x is not None else spec.mu_x
    dual_obj = fgm.CompositeObjective(
        smooth_grad=lambda v: mp.grad_r(v) + mp.grad_x_F(v, y),
        l_smooth=max(spec.l_xx + l_x, spec.mu_x),
        mu=spec.mu_x,
        domain=dom_x,
    )
    rep_d = fgm.solve_to_gap(dual_obj, dom_x.project(x), inner_eps, tally=mp.tally)
    x_d = rep_d.x_final
    dual_value = mp.value_r(x_d) + mp.value_S_hat(x_d, y)

    gap = float(primal_value) - float(dual_value) + 2.0 * inner_eps
    return GapCertificate(
        primal_value=float(primal_value),
        dual_value=float(dual_value),
        gap=gap,
        r_x=float(r_x),
        r_y=float(r_y),
        inner_accuracy=float(inner_eps),
    )


def _default_radius(feasible, label: str, r: Optional[float]) -> float:
    if r is not None:
        if r <= 0:
            raise InvalidSpecError(f"{label} must be positive")
        return float(r)
    if isinstance(feasible, EuclideanBall):
        return 2.0 * feasible.radius
    raise InvalidSpecError(
        f"{label} (starting-distance bound) is required on unbounded sets"
    )


def solve_saddle(
    problem: SaddleProblem,
    epsilon: float,
    engine: Engine | str = Engine.AUTO,
    x0: Optional[Vector] = None,
    y0: Optional[Vector] = None,
    r_x: Optional[float] = None,
    r_y: Optional[float] = None,
    tally: Optional[OracleTally] = None,
    max_attempts: int = 10,
) -> SolveReport:
    """Solve to a certified restricted duality gap of at most ``epsilon``.

    ``r_x`` / ``r_y`` bound the starting distances ``||x0 - x*||`` and
    ``||y0 - y*||`` (defaulting to twice the ball radius on bounded sets) and
    fix the certificate's restriction balls.  The returned report carries the
    pair, the gap certificate, and the full oracle tally including the
    certification cost.  Internal accuracy targets start at the scheduled
    O(epsilon) values and tighten geometrically until the certificate passes;
    ``max_attempts`` caps that loop.
    """
    problem.validate()
    if epsilon <= 0:
        raise InvalidSpecError("epsilon must be positive")
    eng = _resolve_engine(problem, engine)
    mp = Metered(problem, tally)
    spec = problem.spec
    start_t = time.perf_counter()
    x_cur = np.array(x0, dtype=float) if x0 is not None else set_center(spec.set_x, spec.dim_x)
    y_cur = np.array(y0, dtype=float) if y0 is not None else set_center(spec.set_y, spec.dim_y)
    r_x = _default_radius(spec.set_x, "r_x", r_x)
    r_y = _default_radius(spec.set_y, "r_y", r_y)

    if eng is Engine.MIRROR_PROX:
        return _solve_via_extragradient(
            mp, epsilon, x_cur, y_cur, r_x, r_y, max_attempts, start_t
        )

    mu_f, mu_from_g = _outer_modulus(problem)
    # a decoupled problem (zero coupling) leaves the partial max flat; any
    # positive envelope constant is then valid
    l_env = max(2.0 * effective_smoothness(spec), mu_f)
    oracle = inner_max.EnvelopeGradOracle(mp, delta_env=epsilon)
    eps_f = 0.5 * epsilon
    gamma_w = 0.25 * epsilon  # accuracy of the witness behind the certificate
    cert_eps = epsilon / 8.0
    r_cur = r_x
    cert = None
    outer_reports = []
    attempts = 0
    for attempt in range(max_attempts):
        attempts += 1
        if eng is Engine.CASE1:
            rep = _case1_outer(mp, oracle, x_cur, eps_f, r_cur, mu_f, l_env)
        else:
            rep = _sliding_outer(mp, oracle, x_cur, eps_f, r_cur, mu_f, mu_from_g, l_env)
        outer_reports.append(rep)
        x_cur = rep.x_final
        if rep.certified_gap < float("inf") and mu_f > 0:
            r_cur = min(r_cur, math.sqrt(max(2.0 * rep.certified_gap / mu_f, 0.0)))
        ig = inner_max.inexact_grad_g(mp, x_cur, gamma_w, y0=y_cur)
        y_cur = ig.witness_y
        cert = duality_gap(mp, x_cur, y_cur, r_x, r_y, cert_eps)
        if cert.gap <= epsilon:
            break
        eps_f *= 0.125
        gamma_w *= 0.125

    converged = cert is not None and cert.gap <= epsilon
    return SolveReport(
        x_final=x_cur,
        y_final=y_cur,
        certified_gap=cert.gap if cert is not None else float("inf"),
        tally=mp.tally,
        converged=converged,
        history=_flatten_histories(outer_reports),
        wall_ms=(time.perf_counter() - start_t) * 1e3,
        extras={
            "certificate": cert,
            "engine": eng.value,
            "attempts": attempts,
            "outer_modulus": mu_f,
        },
    )


def _case1_outer(mp, oracle, x0, eps_f, r0, mu_f, l_env) -> SolveReport:
    """Restarted accelerated outer loop with composite r and inexact g-gradients."""
    if mp.problem.prox_r is None:
        raise UnsupportedProblemError("this route needs the prox oracle of r")
    n_j = fgm.restart_budget(l_env, mu_f)
    gamma = eps_f / (8.0 * n_j)
    oracle.set_delta(2.0 * gamma)
    obj = fgm.CompositeObjective(
        smooth_grad=oracle,
        l_smooth=l_env,
        mu=mu_f,
        prox_model=fgm.prox_model_from_friendly(mp.prox_r),
        domain=mp.spec.set_x,
        set_delta=oracle.set_delta,
    )
    return fgm.run_restarted_fgm(
        obj,
        x0,
        eps_f,
        r0=r0,
        delta_mode="fixed",
        fixed_delta=2.0 * gamma,
        until_certified=True,
        tally=mp.tally,
    )


def _sliding_outer(mp, oracle, x0, eps_f, r0, mu_f, mu_from_g, l_env) -> SolveReport:
    """Two-term splitting outer loop: smooth r plus the inexact partial max."""
    spec = mp.spec
    if mp.problem.grad_r is None or spec.l_x is None or spec.l_x <= 0:
        raise UnsupportedProblemError(
            "the splitting route needs a smooth r (grad_r oracle and l_x)"
        )
    if not isinstance(spec.set_x, AllSpace):
        raise UnsupportedProblemError("the splitting route runs on all-of-space only")
    out_spec = sliding.SlidingSpec(
        l_r=spec.l_x,
        l_g=l_env,
        mu_r=spec.mu_x,
        mu_g=mu_from_g,
    )
    obj = sliding.TwoTermObjective(
        value_r=mp.value_r,
        grad_r=mp.grad_r,
        value_g=lambda x: float("nan"),
        grad_g=oracle,
        set_delta_g=oracle.set_delta,
    )
    gap0 = 0.5 * (spec.l_x + l_env) * r0 * r0
    return sliding.sliding_solve(out_spec, obj, x0, eps_f, engine="apg", gap0=gap0, tally=mp.tally)


def _solve_via_extragradient(
    mp, epsilon, x0, y0, r_x, r_y, max_attempts, start_t
) -> SolveReport:
    op = mirror_prox.assemble_saddle_operator(mp)
    z = np.concatenate([x0, y0])
    r0 = math.hypot(r_x, r_y)
    nx = mp.spec.dim_x
    cert_eps = epsilon / 8.0
    eps_vi = epsilon
    cert = None
    attempts = 0
    inner_reports = []
    for attempt in range(max_attempts):
        attempts += 1
        rep = mirror_prox.run_restarted_mp(op, z, eps_vi, r0=r0, tally=mp.tally)
        z = rep.x_final
        d_sq = rep.extras.get("dist_sq_bound", float("inf"))
        r0 = math.sqrt(d_sq) if d_sq < float("inf") else r0
        inner_reports.append(rep)
        x_hat, y_hat = z[:nx], z[nx:]
        cert = duality_gap(mp, x_hat, y_hat, r_x, r_y, cert_eps)
        if cert.gap <= epsilon:
            break
        eps_vi /= 16.0
    converged = cert is not None and cert.gap <= epsilon
    return SolveReport(
        x_final=z[:nx],
        y_final=z[nx:],
        certified_gap=cert.gap if cert is not None else float("inf"),
        tally=mp.tally,
        converged=converged,
        history=_flatten_histories(inner_reports),
        wall_ms=(time.perf_counter() - start_t) * 1e3,
        extras={"certificate": cert, "engine": "mirror_prox", "attempts": attempts},
    )


# ---------------------------------------------------------------------------
# closed-form complexity predictions
# ---------------------------------------------------------------------------


def predict_complexity(
    spec: SaddleSpec,
    prox_friendly_r: bool,
    prox_friendly_h: bool,
    spectral: Optional[SpectralInfo] = None,
) -> ComplexityPrediction:
    """Evaluate the closed-form oracle-count estimates (no log factors).

    With spectral data of a bilinear coupling, mu_x is replaced by
    lambda_min+ / l_y whenever that exceeds it, and the kernel-restricted
    product formula is also evaluated.
    """
    mu_x, mu_y = spec.mu_x, spec.mu_y
    substituted = False
    if spectral is not None and spec.l_y is not None and spec.l_y > 0:
        cand = spectral.lambda_min_plus / spec.l_y
        if cand > mu_x:
            mu_x = cand
            substituted = True

    formulas: dict[str, float] = {}
    formulas["bilinear_pf"] = spec.l_xy / math.sqrt(mu_x * mu_y)
    formulas["general_pf"] = max(spec.l_xx, spec.l_xy, spec.l_yy) / min(mu_x, mu_y)
    est1 = math.sqrt((spec.l_xx + spec.l_xy**2 / mu_y) / mu_x)
    formulas["grad_x_coupling"] = est1
    formulas["grad_y_coupling"] = est1 * math.sqrt(max(spec.l_yy / mu_y, 1.0))
    if spec.l_y is not None:
        formulas["grad_h_smooth"] = est1 * math.sqrt(spec.l_y / mu_y)
    if spec.l_x is not None:
        formulas["grad_r_smooth"] = math.sqrt(spec.l_x / mu_x)
    formulas["dual_outer"] = math.sqrt(spec.l_yy / mu_y + 2.0 * spec.l_xy**2 / (mu_x * mu_y))
    formulas["extragradient"] = (
        max(spec.l_xx, spec.l_xy, spec.l_yy) / min(mu_x, mu_y)
    )
    if spectral is not None:
        if spec.l_x is not None and spec.l_y is not None:
            formulas["kernel_restricted"] = math.sqrt(
                spec.l_x
                * spec.l_y
                * spectral.lambda_max
                / (spec.mu_x * spec.mu_y * spectral.lambda_min_plus)
            )

    bilinear = spec.l_xx == 0.0 and spec.l_yy == 0.0
    counts: dict[OracleKind, tuple[float, str]] = {}
    if prox_friendly_r and prox_friendly_h:
        key = "bilinear_pf" if bilinear else "general_pf"
        for kind in (OracleKind.PROX_R, OracleKind.GRAD_X_F, OracleKind.PROX_H, OracleKind.GRAD_Y_F):
            counts[kind] = (formulas[key], key)
    else:
        counts[OracleKind.GRAD_X_F] = (est1, "grad_x_coupling")
        counts[OracleKind.GRAD_Y_F] = (formulas["grad_y_coupling"], "grad_y_coupling")
        if prox_friendly_r:
            counts[OracleKind.PROX_R] = (est1, "grad_x_coupling")
        else:
            if "grad_r_smooth" not in formulas:
                raise InvalidSpecError("non-prox-friendly r needs l_x for predictions")
            counts[OracleKind.GRAD_R] = (formulas["grad_r_smooth"], "grad_r_smooth")
        if prox_friendly_h:
            counts[OracleKind.PROX_H] = (formulas["grad_y_coupling"], "grad_y_coupling")
        else:
            if "grad_h_smooth" not in formulas:
                raise InvalidSpecError("non-prox-friendly h needs l_y for predictions")
            counts[OracleKind.GRAD_H] = (formulas["grad_h_smooth"], "grad_h_smooth")
    if bilinear and "kernel_restricted" in formulas:
        counts[OracleKind.MATVEC] = (formulas["kernel_restricted"], "kernel_restricted")

    for name, value in formulas.items():
        if not (math.isfinite(value) and value > 0):
            raise InvalidSpecError(f"prediction {name} is not positive and finite")
    return ComplexityPrediction(counts=counts, formulas=formulas, mu_x_substituted=substituted)


# ---------------------------------------------------------------------------
# dual smoothing of matrix games and the role-swapped view
# ---------------------------------------------------------------------------


def smooth_matrix_game(a: np.ndarray, epsilon: float, r_y: float) -> SaddleProblem:
    """Bilinear problem <Ax, y> with the dual side smoothed by eps ||y||^2 / (4 r_y^2).

    The primal composite is identically zero (callers regularize it before
    solving).  The dual modulus is eps / (2 r_y^2); the coupling constant is
    the largest singular value of A.
    """
    if epsilon <= 0 or r_y <= 0:
        raise InvalidSpecError("epsilon and r_y must be positive")
    a = np.asarray(a, dtype=float)
    m, n = a.shape
    gram = a.T @ a
    lam_max = float(np.linalg.eigvalsh(gram)[-1]) if a.size else 0.0
    if lam_max <= 0:
        warnings.warn("zero coupling matrix: the problem decouples (l_xy = 0)")
        lam_max = 0.0
    mu_y = epsilon / (2.0 * r_y**2)
    spec = SaddleSpec(
        dim_x=n,
        dim_y=m,
        mu_x=0.0,
        mu_y=mu_y,
        l_xy=math.sqrt(lam_max),
        l_y=mu_y,
    )

    def prox_r(c1, c2):
        if c2 <= 0:
            raise InvalidSpecError("prox of the zero composite needs c2 > 0")
        return -c1 / (2.0 * c2)

    return SaddleProblem(
        spec=spec,
        value_r=lambda x: 0.0,
        value_h=lambda y: 0.5 * mu_y * float(y @ y),
        value_F=lambda x, y: float(y @ (a @ x)),
        grad_r=lambda x: np.zeros_like(x),
        grad_h=lambda y: mu_y * y,
        grad_x_F=lambda x, y: a.T @ y,
        grad_y_F=lambda x, y: a @ x,
        prox_r=prox_r,
        prox_h=lambda c1, c2: -c1 / (mu_y + 2.0 * c2),
        prox_friendly_r=True,
        prox_friendly_h=True,
        matvec_cost={OracleKind.GRAD_X_F: 1, OracleKind.GRAD_Y_F: 1},
    )


def dual_view(problem: SaddleProblem) -> SaddleProblem:
    """Role-swapped problem: minimize over the old dual variable.

    The swapped coupling is F'(u, v) = -F(v, u); solving the view and
    negating the value recovers the same saddle pair with roles exchanged.
    Applying the swap twice restores the original problem.
    """
    spec = problem.spec
    new_spec = replace(
        spec,
        dim_x=spec.dim_y,
        dim_y=spec.dim_x,
        mu_x=spec.mu_y,
        mu_y=spec.mu_x,
        l_xx=spec.l_yy,
        l_yy=spec.l_xx,
        l_x=spec.l_y,
        l_y=spec.l_x,
        set_x=spec.set_y,
        set_y=spec.set_x,
    )
    mv = problem.matvec_cost
    swapped_mv = {}
    pairs = {
        OracleKind.GRAD_R: OracleKind.GRAD_H,
        OracleKind.GRAD_H: OracleKind.GRAD_R,
        OracleKind.GRAD_X_F: OracleKind.GRAD_Y_F,
        OracleKind.GRAD_Y_F: OracleKind.GRAD_X_F,
        OracleKind.PROX_R: OracleKind.PROX_H,
        OracleKind.PROX_H: OracleKind.PROX_R,
    }
    for kind, cost in mv.items():
        swapped_mv[pairs.get(kind, kind)] = cost
    return SaddleProblem(
        spec=new_spec,
        value_r=problem.value_h,
        value_h=problem.value_r,
        value_F=lambda u, v: -problem.value_F(v, u),
        grad_r=problem.grad_h,
        grad_h=problem.grad_r,
        grad_x_F=(
            (lambda u, v: -problem.grad_y_F(v, u)) if problem.grad_y_F is not None else None
        ),
        grad_y_F=(
            (lambda u, v: -problem.grad_x_F(v, u)) if problem.grad_x_F is not None else None
        ),
        prox_r=problem.prox_h,
        prox_h=problem.prox_r,
        prox_friendly_r=problem.prox_friendly_h,
        prox_friendly_h=problem.prox_friendly_r,
        matvec_cost=swapped_mv,
        operator_l=problem.operator_l,
        spectral=None,  # kernel data does not transfer without the matrix itself
        notes=dict(problem.notes),
    )
