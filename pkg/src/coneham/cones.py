"""Cone specifications: membership, samplers, range bounds, and growth maps.

A cone here is the nonnegativity set of a characterizing functional alpha.
Beyond membership testing, certification needs three cone-specific services
that cannot be derived from alpha alone:

* a sampler producing elements of the cone (for the randomized operator
  checks);
* a pointwise range bound: an interval certain to contain every value u(t)
  of every cone element on a given beta- or gamma-level set;
* the growth maps b and c comparing beta- and gamma-sublevels.

The latter two are *registered* per cone rather than computed: they are
defined by suprema over an infinite-dimensional set, and sound closed forms
exist only through cone-specific inequalities (for the concave boundary-
pinned cone, the hat-function comparison ||u||_inf <= 2 ||u||_1 and the
norm chain ||u||_1 <= ||u||_2 <= ||u||_inf).  A registered bound may be
conservative -- overestimating a range or a growth value keeps every
certificate sound -- but must never underestimate.  Cones without
registered services can still be sampled and solved on, just not certified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, SamplingFailureError, UnsupportedConeError
from .functionals import Functional, concave_dirichlet, dist_nonneg
from .grid import GridFunction, Quadrature, grid_function, sample_smooth
from .kernels import green_dirichlet, kernel_matrix

MEMBERSHIP_TOL = 1e-9
REJECTION_CAP = 100_000


@dataclass(frozen=True, eq=False)
class ConeSpec:
    alpha: Functional
    label: str
    sampler_id: str  # "green-smoothing" | "rejection"
    range_bounder: Callable[[str, float], tuple[float, float]] | None = None
    growth_b: Callable[[float], float] | None = None
    growth_c: Callable[[float], float] | None = None


@dataclass(frozen=True)
class Membership:
    verdict: str  # "inside" | "boundary" | "outside"
    margin: float  # alpha(u)


def membership(q: Quadrature, cone: ConeSpec, u: GridFunction, tol: float = MEMBERSHIP_TOL) -> Membership:
    if tol <= 0.0:
        raise InvalidParameterError("membership tolerance must be positive")
    m = cone.alpha(q, u)
    if m > tol:
        verdict = "inside"
    elif m < -tol:
        verdict = "outside"
    else:
        verdict = "boundary"
    return Membership(verdict=verdict, margin=m)


def green_smooth(q: Quadrature, w: GridFunction) -> GridFunction:
    """Push nonnegative nodal noise through the Green kernel of -u''.

    The output is a nonnegative combination of concave piecewise-linear
    columns vanishing at 0 and 1, hence itself concave with pinned
    boundary: a cone element by construction.
    """
    K = kernel_matrix(green_dirichlet(), q)
    return grid_function(q, K @ (q.weights * w.values))


def sample_cone(
    q: Quadrature,
    cone: ConeSpec,
    seed: int = 0,
    amplitude: float = 1.0,
    rng: np.random.Generator | None = None,
) -> GridFunction:
    """Draw one element of the cone; deterministic for a fixed seed.

    green-smoothing draws nonnegative noise and smooths it through the
    Green kernel; rejection draws smooth random functions and keeps the
    first with alpha(u) >= -tol (the cone is closed, so boundary points
    are acceptable), failing loudly after the attempt cap.
    """
    if amplitude <= 0.0:
        raise InvalidParameterError("amplitude must be positive")
    if rng is None:
        rng = np.random.default_rng(seed)
    if cone.sampler_id == "green-smoothing":
        w = grid_function(q, rng.uniform(0.0, amplitude, size=q.n))
        return green_smooth(q, w)
    for _ in range(REJECTION_CAP):
        u = sample_smooth(q, rng, amplitude=amplitude)
        if cone.alpha(q, u) >= -MEMBERSHIP_TOL:
            return u
    raise SamplingFailureError(
        f"rejection sampler exhausted {REJECTION_CAP} attempts for cone {cone.label!r}"
    )


def range_bound(cone: ConeSpec, level_kind: str, rho: float) -> tuple[float, float]:
    """Interval containing {u(t) : u in the cone, level(u) = rho}."""
    if level_kind not in ("beta", "gamma"):
        raise InvalidParameterError(f"level_kind must be 'beta' or 'gamma', got {level_kind!r}")
    if rho <= 0.0:
        raise InvalidParameterError("rho must be positive")
    if cone.range_bounder is None:
        raise UnsupportedConeError(
            f"cone {cone.label!r} has no registered range bounder; "
            "certification is unavailable (solving still works)"
        )
    return cone.range_bounder(level_kind, rho)


def growth_b(cone: ConeSpec, rho: float) -> float:
    """Upper bound for beta(u) over cone elements with gamma(u) <= rho."""
    if rho < 0.0:
        raise InvalidParameterError("rho must be nonnegative")
    if cone.growth_b is None:
        raise UnsupportedConeError(f"cone {cone.label!r} has no registered growth map b")
    return float(cone.growth_b(rho))


def growth_c(cone: ConeSpec, rho: float) -> float:
    """Upper bound for gamma(u) over cone elements with beta(u) <= rho."""
    if rho < 0.0:
        raise InvalidParameterError("rho must be nonnegative")
    if cone.growth_c is None:
        raise UnsupportedConeError(f"cone {cone.label!r} has no registered growth map c")
    return float(cone.growth_c(rho))


@dataclass(frozen=True)
class GrowthReport:
    trials: int
    violations_b: int
    violations_c: int
    worst_margin: float
    seed: int

    @property
    def passed(self) -> bool:
        return self.violations_b == 0 and self.violations_c == 0


def verify_growth(
    q: Quadrature,
    cone: ConeSpec,
    beta: Functional,
    gamma: Functional,
    trials: int = 1000,
    seed: int = 0,
    tol: float = 1e-9,
) -> GrowthReport:
    """Sampled consistency of the registered growth maps against the
    functionals actually used as beta and gamma: for cone samples u,
    beta(u) <= b(gamma(u)) and gamma(u) <= c(beta(u))."""
    rng = np.random.default_rng(seed)
    vb = vc = 0
    worst = np.inf
    for _ in range(trials):
        u = sample_cone(q, cone, amplitude=rng.uniform(0.1, 2.0), rng=rng)
        bv, gv = beta(q, u), gamma(q, u)
        slack_b = growth_b(cone, gv) - bv
        slack_c = growth_c(cone, bv) - gv
        worst = min(worst, slack_b, slack_c)
        if slack_b < -tol:
            vb += 1
        if slack_c < -tol:
            vc += 1
    if not np.isfinite(worst):
        worst = 0.0
    return GrowthReport(trials=trials, violations_b=vb, violations_c=vc, worst_margin=float(worst), seed=seed)


# ---------------------------------------------------------------------------
# built-in cones
# ---------------------------------------------------------------------------


def concave_dirichlet_cone() -> ConeSpec:
    """Concave functions vanishing at 0 and 1 (a subset of the nonnegative
    functions).

    Registered services (valid for beta = L2 norm, gamma = L1 norm, which
    equals the plain integral on this cone):

    * range bound [0, 2 rho] at either level: elements dominate the hat
      function through their maximum, so ||u||_inf <= 2 ||u||_1, and
      ||u||_1 <= ||u||_2 extends the bound to beta-levels;
    * b(rho) = 2 rho and c(rho) = rho from the same two inequalities.
    """
    return ConeSpec(
        alpha=concave_dirichlet(),
        label="concave_dirichlet",
        sampler_id="green-smoothing",
        range_bounder=lambda kind, rho: (0.0, 2.0 * rho),
        growth_b=lambda rho: 2.0 * rho,
        growth_c=lambda rho: rho,
    )


def nonneg_cone() -> ConeSpec:
    """Nonnegative functions, characterized by minus the distance to the
    cone; no range bound or growth maps are registered (the level sets of
    the usual beta/gamma pairs are unbounded pointwise only through
    cone-specific structure this cone does not have)."""
    return ConeSpec(alpha=dist_nonneg(), label="nonneg", sampler_id="rejection")


def custom_cone(alpha: Functional, label: str | None = None) -> ConeSpec:
    """User cone from a functional; sampled by rejection, not certifiable
    until range/growth services are supplied via ``dataclasses.replace``."""
    return ConeSpec(alpha=alpha, label=label or f"custom({alpha.label})", sampler_id="rejection")


CONE_LABELS = ("concave_dirichlet", "nonneg", "custom")
