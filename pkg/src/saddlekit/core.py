"""Problem containers, constant bookkeeping, oracle metering, and preprocessing.

Everything downstream (inner maximization, fast gradient methods, the
extragradient baseline, the meta-solver) consumes the types defined here:

* :class:`SaddleSpec` is the single home for all declared constants of a
  smooth strongly-convex-strongly-concave problem
  ``min_x max_y { r(x) + F(x,y) - h(y) }``.
* :class:`SaddleProblem` bundles the user-supplied oracles.
* :class:`OracleTally` / :class:`Metered` implement call counting; every
  solver in the package reports how many times each oracle was invoked.
* :func:`regularize` computes the quadratic moduli that make a merely
  convex-concave instance strongly convex-concave at an O(epsilon) bias.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np

Vector = np.ndarray


class InvalidSpecError(ValueError):
    """Declared constants are inconsistent or out of range."""


class UnsupportedProblemError(ValueError):
    """The problem lacks an oracle the requested method needs."""


class BudgetExceededError(RuntimeError):
    """An iteration cap was hit before the stopping rule certified success.

    Carries the best iterate seen so far (``best``) and the tally at the
    time of failure, so callers can degrade gracefully.
    """

    def __init__(self, message: str, best=None, tally=None):
        super().__init__(message)
        self.best = best
        self.tally = tally


# ---------------------------------------------------------------------------
# feasible sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AllSpace:
    """Unconstrained set; projection is the identity."""

    def project(self, v: Vector) -> Vector:
        return v

    def contains(self, v: Vector, tol: float = 1e-9) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class EuclideanBall:
    """Euclidean ball {v : ||v - center|| <= radius}."""

    center: Vector
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidSpecError("ball radius must be positive")

    def project(self, v: Vector) -> Vector:
        d = v - self.center
        n = float(np.linalg.norm(d))
        if n <= self.radius:
            return v
        return self.center + d * (self.radius / n)

    def contains(self, v: Vector, tol: float = 1e-9) -> bool:
        return float(np.linalg.norm(v - self.center)) <= self.radius + tol


FeasibleSet = AllSpace | EuclideanBall


def set_center(s: FeasibleSet, dim: int) -> Vector:
    if isinstance(s, EuclideanBall):
        return np.array(s.center, dtype=float)
    return np.zeros(dim)


def restrict_to_ball(base: FeasibleSet, center: Vector, radius: float) -> FeasibleSet:
    """Intersection of ``base`` with the ball B(center, radius).

    Only the cases with a closed-form projection are supported: an
    unconstrained base, or nested balls.  Anything else raises
    :class:`UnsupportedProblemError`.
    """
    ball = EuclideanBall(np.asarray(center, dtype=float), float(radius))
    if isinstance(base, AllSpace):
        return ball
    # nested-ball cases
    dist = float(np.linalg.norm(base.center - ball.center))
    if dist + base.radius <= ball.radius:
        return base
    if dist + ball.radius <= base.radius:
        return ball
    raise UnsupportedProblemError(
        "projection onto the intersection of two overlapping balls is not closed form"
    )


# ---------------------------------------------------------------------------
# oracle metering
# ---------------------------------------------------------------------------


class OracleKind(enum.Enum):
    GRAD_R = "grad_r"
    GRAD_H = "grad_h"
    GRAD_X_F = "gradx_F"
    GRAD_Y_F = "grady_F"
    PROX_R = "prox_r"
    PROX_H = "prox_h"
    MATVEC = "matvec"


class OracleTally:
    """Monotone per-kind call counters.

    Counters only ever increase within a run; tallies from independent runs
    are combined with :func:`tally_merge`.
    """

    __slots__ = ("_counts",)

    def __init__(self, counts: Optional[Mapping[OracleKind, int]] = None):
        self._counts: dict[OracleKind, int] = {}
        if counts:
            for k, v in counts.items():
                if v < 0:
                    raise ValueError("counters must be nonnegative")
                if v:
                    self._counts[k] = int(v)

    def bump(self, kind: OracleKind, n: int = 1) -> None:
        if n < 0:
            raise ValueError("counters never decrease")
        if n:
            self._counts[kind] = self._counts.get(kind, 0) + n

    def count(self, kind: OracleKind) -> int:
        return self._counts.get(kind, 0)

    def total(self) -> int:
        return sum(self._counts.values())

    def snapshot(self) -> dict[str, int]:
        """Plain-dict snapshot keyed by the kind's string value."""
        return {k.value: v for k, v in sorted(self._counts.items(), key=lambda kv: kv[0].value)}

    def copy(self) -> "OracleTally":
        return OracleTally(self._counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OracleTally):
            return NotImplemented
        return self._counts == other._counts

    def __repr__(self) -> str:
        return f"OracleTally({self.snapshot()})"


def tally_merge(a: OracleTally, b: OracleTally) -> OracleTally:
    """Componentwise sum of two tallies; inputs are left untouched."""
    out = a.copy()
    for kind in OracleKind:
        out.bump(kind, b.count(kind))
    return out


def counted(fn: Callable, tally: OracleTally, kind: OracleKind, matvecs: int = 0) -> Callable:
    """Wrap an oracle closure so each invocation bumps ``tally``."""

    def wrapped(*args):
        tally.bump(kind)
        if matvecs:
            tally.bump(OracleKind.MATVEC, matvecs)
        return fn(*args)

    return wrapped


# ---------------------------------------------------------------------------
# problem data
# ---------------------------------------------------------------------------


@dataclass
class SaddleSpec:
    """Declared constants of a saddle instance.

    ``l_xx``, ``l_xy``, ``l_yy`` are the Lipschitz constants of the partial
    gradients of the coupling term; ``l_x`` / ``l_y`` those of the composites'
    gradients (``None`` when the composite is prox-only); ``mu_x`` / ``mu_y``
    the strong convexity/concavity moduli of the composites.  Constants are
    caller-declared, never estimated; the testbed spot-checks them.
    """

    dim_x: int
    dim_y: int
    mu_x: float
    mu_y: float
    l_xx: float = 0.0
    l_xy: float = 0.0
    l_yy: float = 0.0
    l_x: Optional[float] = None
    l_y: Optional[float] = None
    set_x: FeasibleSet = field(default_factory=AllSpace)
    set_y: FeasibleSet = field(default_factory=AllSpace)

    def validate(self) -> None:
        if self.dim_x <= 0 or self.dim_y <= 0:
            raise InvalidSpecError("dimensions must be positive")
        for name in ("l_xx", "l_xy", "l_yy"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidSpecError(f"{name} must be finite and nonnegative")
        for name in ("l_x", "l_y"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v >= 0):
                raise InvalidSpecError(f"{name} must be finite and nonnegative")
        if not (math.isfinite(self.mu_x) and self.mu_x > 0):
            raise InvalidSpecError("mu_x must be positive (regularize first)")
        if not (math.isfinite(self.mu_y) and self.mu_y > 0):
            raise InvalidSpecError("mu_y must be positive (regularize first)")


def effective_smoothness(spec: SaddleSpec) -> float:
    """Smoothness constant of the partial-max function x -> max_y {F(x,y)-h(y)}.

    Equals ``l_xx + 2 l_xy^2 / mu_y``; finite whenever ``mu_y > 0``.
    """
    if not (math.isfinite(spec.mu_y) and spec.mu_y > 0):
        raise InvalidSpecError("effective smoothness requires mu_y > 0")
    return spec.l_xx + 2.0 * spec.l_xy**2 / spec.mu_y


@dataclass
class SpectralInfo:
    """Eigendata of the coupling matrix Gram A^T A for bilinear instances."""

    lambda_max: float
    lambda_min_plus: float
    kernel_basis: Vector  # shape (dim_x, k); k = 0 for trivial kernel

    @property
    def kernel_trivial(self) -> bool:
        return self.kernel_basis.shape[1] == 0


@dataclass
class SaddleProblem:
    """Oracle bundle for ``min_x max_y { r(x) + F(x,y) - h(y) }``.

    Value oracles: ``value_r(x)``, ``value_h(y)``, ``value_F(x, y)``.
    Gradient oracles: ``grad_r``, ``grad_h``, ``grad_x_F``, ``grad_y_F``
    (any may be ``None`` if unavailable).  Prox oracles solve the linear-plus-
    quadratic model ``min_{v in Q} <c1, v> + composite(v) + c2 ||v||^2`` and
    must accept any ``c2 >= 0`` (the composite itself is strongly convex).

    Oracles must be pure functions of their inputs; counting is layered on
    per run via :class:`Metered`, so independent runs may execute
    concurrently and merge tallies afterwards.
    """

    spec: SaddleSpec
    value_r: Callable[[Vector], float]
    value_h: Callable[[Vector], float]
    value_F: Callable[[Vector, Vector], float]
    grad_r: Optional[Callable[[Vector], Vector]] = None
    grad_h: Optional[Callable[[Vector], Vector]] = None
    grad_x_F: Optional[Callable[[Vector, Vector], Vector]] = None
    grad_y_F: Optional[Callable[[Vector, Vector], Vector]] = None
    prox_r: Optional[Callable[[Vector, float], Vector]] = None
    prox_h: Optional[Callable[[Vector, float], Vector]] = None
    prox_friendly_r: bool = False
    prox_friendly_h: bool = False
    # declared matvec cost per gradient/prox oracle call (bilinear instances)
    matvec_cost: Mapping[OracleKind, int] = field(default_factory=dict)
    operator_l: Optional[float] = None  # Lipschitz bound of the stacked VI operator
    spectral: Optional[SpectralInfo] = None
    notes: dict = field(default_factory=dict)

    def validate(self) -> None:
        self.spec.validate()
        if self.prox_friendly_r and self.prox_r is None:
            raise InvalidSpecError("prox_friendly_r set but prox_r oracle missing")
        if self.prox_friendly_h and self.prox_h is None:
            raise InvalidSpecError("prox_friendly_h set but prox_h oracle missing")


class Metered:
    """Counting view of a :class:`SaddleProblem` bound to one run's tally.

    Gradient and prox calls bump the corresponding counter (plus the declared
    matvec cost).  Value oracles pass through unmetered: they feed histories
    and certificates, not the complexity accounting.
    """

    def __init__(self, problem: SaddleProblem, tally: Optional[OracleTally] = None):
        self.problem = problem
        self.tally = tally if tally is not None else OracleTally()

    @property
    def spec(self) -> SaddleSpec:
        return self.problem.spec

    def _bump(self, kind: OracleKind) -> None:
        self.tally.bump(kind)
        mv = self.problem.matvec_cost.get(kind, 0)
        if mv:
            self.tally.bump(OracleKind.MATVEC, mv)

    def _need(self, fn, name: str):
        if fn is None:
            raise UnsupportedProblemError(f"problem does not provide the {name} oracle")
        return fn

    # -- values (unmetered) --
    def value_r(self, x):
        return self.problem.value_r(x)

    def value_h(self, y):
        return self.problem.value_h(y)

    def value_F(self, x, y):
        return self.problem.value_F(x, y)

    def value_S_hat(self, x, y) -> float:
        """F(x, y) - h(y)."""
        return self.problem.value_F(x, y) - self.problem.value_h(y)

    # -- gradients / proxes (metered) --
    def grad_r(self, x):
        self._bump(OracleKind.GRAD_R)
        return self._need(self.problem.grad_r, "grad_r")(x)

    def grad_h(self, y):
        self._bump(OracleKind.GRAD_H)
        return self._need(self.problem.grad_h, "grad_h")(y)

    def grad_x_F(self, x, y):
        self._bump(OracleKind.GRAD_X_F)
        return self._need(self.problem.grad_x_F, "grad_x_F")(x, y)

    def grad_y_F(self, x, y):
        self._bump(OracleKind.GRAD_Y_F)
        return self._need(self.problem.grad_y_F, "grad_y_F")(x, y)

    def prox_r(self, c1, c2):
        self._bump(OracleKind.PROX_R)
        return self._need(self.problem.prox_r, "prox_r")(c1, c2)

    def prox_h(self, c1, c2):
        self._bump(OracleKind.PROX_H)
        return self._need(self.problem.prox_h, "prox_h")(c1, c2)


# ---------------------------------------------------------------------------
# regularization / dual smoothing
# ---------------------------------------------------------------------------


def regularize(epsilon: float, r_x: float, r_y: float) -> tuple[float, float]:
    """Quadratic moduli making the problem strongly convex-concave.

    Returns ``(epsilon / (2 r_x^2), epsilon / (2 r_y^2))``, to be added as
    ``mu/2 ||.||^2`` regularizers on the primal and dual composites.  The
    caller owns the accuracy bookkeeping: we budget an epsilon/4 bias per
    regularized side.
    """
    if not (epsilon > 0 and r_x > 0 and r_y > 0):
        raise InvalidSpecError("regularize requires positive epsilon and radii")
    return epsilon / (2.0 * r_x**2), epsilon / (2.0 * r_y**2)


REGULARIZATION_BIAS_FRACTION = 0.25  # accuracy bias budgeted per regularized side


def regularize_problem(problem: SaddleProblem, epsilon: float, r_x: float, r_y: float) -> SaddleProblem:
    """Tighten a problem's moduli to at least the smoothing floors.

    Sides already at or above their floor are untouched (regularization only
    tightens).  Modified sides get ``d/2 ||.||^2`` folded into the composite's
    value, gradient, and prox oracles, and the smoothness/modulus constants
    updated.  The accuracy bias budget is recorded in ``notes``.
    """
    floor_x, floor_y = regularize(epsilon, r_x, r_y)
    spec = problem.spec
    d_x = max(0.0, floor_x - spec.mu_x) if spec.mu_x > 0 else floor_x
    d_y = max(0.0, floor_y - spec.mu_y) if spec.mu_y > 0 else floor_y
    if d_x == 0.0 and d_y == 0.0:
        return problem

    new = replace(problem)
    new.notes = dict(problem.notes)
    bias = 0.0
    spec_kw = {}
    if d_x > 0.0:
        base_vr, base_gr, base_pr = problem.value_r, problem.grad_r, problem.prox_r
        new.value_r = lambda x, _f=base_vr, _d=d_x: _f(x) + 0.5 * _d * float(x @ x)
        if base_gr is not None:
            new.grad_r = lambda x, _f=base_gr, _d=d_x: _f(x) + _d * x
        if base_pr is not None:
            new.prox_r = lambda c1, c2, _f=base_pr, _d=d_x: _f(c1, c2 + 0.5 * _d)
        spec_kw["mu_x"] = spec.mu_x + d_x
        if spec.l_x is not None:
            spec_kw["l_x"] = spec.l_x + d_x
        bias += REGULARIZATION_BIAS_FRACTION * epsilon
    if d_y > 0.0:
        base_vh, base_gh, base_ph = problem.value_h, problem.grad_h, problem.prox_h
        new.value_h = lambda y, _f=base_vh, _d=d_y: _f(y) + 0.5 * _d * float(y @ y)
        if base_gh is not None:
            new.grad_h = lambda y, _f=base_gh, _d=d_y: _f(y) + _d * y
        if base_ph is not None:
            new.prox_h = lambda c1, c2, _f=base_ph, _d=d_y: _f(c1, c2 + 0.5 * _d)
        spec_kw["mu_y"] = spec.mu_y + d_y
        if spec.l_y is not None:
            spec_kw["l_y"] = spec.l_y + d_y
        bias += REGULARIZATION_BIAS_FRACTION * epsilon
    new.spec = replace(spec, **spec_kw)
    new.notes["regularization_bias"] = bias
    new.notes["regularization_added"] = (d_x, d_y)
    return new


# ---------------------------------------------------------------------------
# run reports
# ---------------------------------------------------------------------------


@dataclass
class HistoryRow:
    """One logged step: the gap column is nan when no exact value oracle exists."""

    iteration: int
    gap: float
    tally: dict[str, int]
    wall_ms: float

    def deterministic_view(self) -> tuple:
        # wall-clock excluded: it is the one field that legitimately varies
        # between otherwise identical runs
        return (self.iteration, self.gap, tuple(sorted(self.tally.items())))


@dataclass
class SolveReport:
    x_final: Optional[Vector]
    certified_gap: float
    tally: OracleTally
    converged: bool
    history: list[HistoryRow] = field(default_factory=list)
    y_final: Optional[Vector] = None
    wall_ms: float = 0.0
    extras: dict = field(default_factory=dict)

    def history_key(self) -> tuple:
        """Hashable view of the history used by determinism checks."""
        return tuple(row.deterministic_view() for row in self.history)
