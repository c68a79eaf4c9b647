"""Fixed-point computation, localization, and an independent ODE oracle.

The certified problems here have small contraction factors, so plain
(optionally damped) Picard iteration on the Nystrom grid is used; Newton
machinery would buy nothing.  Non-convergence within the iteration budget
is a reported outcome rather than an exception -- existence certificates
are non-constructive, so failure to iterate to a fixed point refutes
nothing.

For problems whose kernel is the Green's function of -u'' with Dirichlet
conditions and whose weight is identically one, the fixed-point equation is
equivalent to the boundary value problem -u'' = f(t, u), u(0) = u(1) = 0.
``shooting_oracle`` solves that problem directly -- fixed-step RK4 in t with
root-finding on the initial slope -- sharing neither the quadrature nor the
operator with the Picard path, which makes the two solutions mutual oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import OracleFailureError
from .grid import GridFunction, grid_function
from .hammerstein import HammersteinProblem, apply_T
from .errors import InvalidParameterError


@dataclass(frozen=True)
class Solution:
    u: GridFunction
    residual_sup: float  # ||u - Tu||_sup at the returned iterate
    iterations: int
    converged: bool


def picard_solve(
    p: HammersteinProblem,
    u0: GridFunction | None = None,
    tol: float = 1e-10,
    max_iter: int = 200,
    damping: float = 1.0,
) -> Solution:
    """Iterate u <- (1 - theta) u + theta Tu until ||u - Tu||_sup <= tol.

    ``iterations`` counts operator applications; if the budget runs out the
    last iterate is returned with ``converged=False``.
    """
    if tol <= 0.0:
        raise InvalidParameterError("tolerance must be positive")
    if not (0.0 < damping <= 1.0):
        raise InvalidParameterError("damping must lie in (0, 1]")
    u = np.zeros(p.q.n) if u0 is None else np.array(u0.values, dtype=float)
    if len(u) != p.q.n:
        raise InvalidParameterError("u0 is not sampled on the problem grid")
    residual = np.inf
    for it in range(1, max_iter + 1):
        tu = apply_T(p, GridFunction(values=u)).values
        residual = float(np.max(np.abs(u - tu)))
        if residual <= tol:
            return Solution(u=grid_function(p.q, u), residual_sup=residual, iterations=it, converged=True)
        u = (1.0 - damping) * u + damping * tu
    return Solution(u=grid_function(p.q, u), residual_sup=residual, iterations=max_iter, converged=False)


@dataclass(frozen=True)
class LocalizationReport:
    alpha_margin: float
    beta_value: float
    gamma_value: float
    in_annulus: bool
    annulus: tuple[float, float, str]  # (rho1, rho2, "gamma>=rho1, beta<=rho2")


def localize(
    p: HammersteinProblem,
    sol: Solution,
    rho1: float,
    rho2: float,
    tol: float = 1e-7,
) -> LocalizationReport:
    """Check the computed solution against the annulus the certificate
    names: in the cone (alpha >= -tol), beta below the outer level, gamma
    above the inner one."""
    a = p.cone.alpha(p.q, sol.u)
    b = p.beta(p.q, sol.u)
    g = p.gamma(p.q, sol.u)
    inside = (a >= -tol) and (b <= rho2 + tol) and (g >= rho1 - tol)
    return LocalizationReport(
        alpha_margin=float(a),
        beta_value=float(b),
        gamma_value=float(g),
        in_annulus=bool(inside),
        annulus=(float(rho1), float(rho2), f"gamma >= {rho1:g} and beta <= {rho2:g}"),
    )


def _rk4_shoot(f, slope: float, steps: int) -> np.ndarray:
    """Integrate u'' = -f(t, u), u(0) = 0, u'(0) = slope; returns nodal u on
    the uniform step grid (steps + 1 values)."""
    h = 1.0 / steps
    u, up = 0.0, float(slope)
    out = np.empty(steps + 1)
    out[0] = 0.0
    t = 0.0
    for i in range(steps):
        k1u, k1p = up, -float(f(t, u))
        k2u, k2p = up + 0.5 * h * k1p, -float(f(t + 0.5 * h, u + 0.5 * h * k1u))
        k3u, k3p = up + 0.5 * h * k2p, -float(f(t + 0.5 * h, u + 0.5 * h * k2u))
        k4u, k4p = up + h * k3p, -float(f(t + h, u + h * k3u))
        u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        up += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        t = (i + 1) * h
        out[i + 1] = u
    return out


def shooting_oracle(p: HammersteinProblem, tol: float = 1e-10, steps: int | None = None) -> GridFunction:
    """Solve -u'' = f(t,u), u(0) = u(1) = 0 by shooting; only available when
    the problem's kernel is the Dirichlet Green's kernel and g is one.

    The slope bracket starts at [0, 1] and doubles upward; with f >= 0 the
    zero-slope trajectory undershoots, so a sign change is guaranteed once
    the bracket clears the accumulated curvature.  Bracketing failure (or a
    boundary residual above ``tol`` after root-finding) raises with a
    diagnostic.
    """
    if p.kernel.label != "green_dirichlet":
        raise OracleFailureError(
            f"shooting oracle requires the green_dirichlet kernel, problem uses {p.kernel.label!r}"
        )
    if float(np.max(np.abs(p.g.values - 1.0))) > 1e-12:
        raise OracleFailureError("shooting oracle requires g identically one")
    if steps is None:
        steps = max(2000, 2 * (p.q.n - 1))

    def boundary_residual(m: float) -> float:
        return float(_rk4_shoot(p.f, m, steps)[-1])

    g0 = boundary_residual(0.0)
    if abs(g0) <= tol:
        m_star = 0.0
    else:
        if g0 > 0.0:
            raise OracleFailureError(
                f"zero-slope trajectory overshoots (u(1) = {g0:.3e} > 0); "
                "is the nonlinearity nonnegative?"
            )
        hi = 1.0
        for _ in range(60):
            if boundary_residual(hi) > 0.0:
                break
            hi *= 2.0
        else:
            raise OracleFailureError("could not bracket the initial slope up to 2^60")
        m_star = float(brentq(boundary_residual, 0.0, hi, xtol=1e-13, rtol=8.9e-16))
    dense = _rk4_shoot(p.f, m_star, steps)
    if abs(dense[-1]) > tol:
        raise OracleFailureError(
            f"boundary residual {dense[-1]:.3e} above tolerance {tol:g} after root-finding"
        )
    fine_nodes = np.linspace(0.0, 1.0, steps + 1)
    return grid_function(p.q, np.interp(p.q.nodes, fine_nodes, dense))


@dataclass(frozen=True)
class CrossValidation:
    passed: bool
    sup_diff: float
    tol: float


def cross_validate(sol: Solution, oracle_u: GridFunction, tol: float) -> CrossValidation:
    """Sup-norm agreement between the Picard fixed point and the oracle."""
    if len(sol.u.values) != len(oracle_u.values):
        raise InvalidParameterError("solution and oracle live on different grids")
    diff = float(np.max(np.abs(sol.u.values - oracle_u.values)))
    return CrossValidation(passed=diff <= tol, sup_diff=diff, tol=tol)
