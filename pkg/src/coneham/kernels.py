"""Integral kernels on [0,1]^2, their psi-functions, and continuity checks.

For a functional alpha, the psi-function of a kernel k is
``psi_alpha(s) = alpha(k(., s))``: each column of the kernel, viewed as a
function of t, is pushed through alpha.  The weighted integrals of psi
calibrate the index conditions in :mod:`coneham.hammerstein`.

Those integrals are computed with one step of Richardson extrapolation
(grid n against the half-spacing grid): the trapezoid value of a smooth
integrand has a clean h^2 leading error, so the extrapolated value gains
two orders and the difference of the two levels doubles as a quadrature
error estimate for certificate margins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError
from .functionals import Functional
from .grid import (
    GridFunction,
    Quadrature,
    RULE_TRAPEZOID,
    GridShapeError,
    build_quadrature,
    grid_function,
    refine_quadrature,
)


@dataclass(frozen=True, eq=False)
class Kernel:
    """A kernel k(t,s), optionally carrying a uniform bound on |dk/dt|.

    When the bound is present, uniform continuity in t holds analytically
    and ``check_C1`` certifies it against sampled difference quotients;
    without it the check only reports the empirical modulus table.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str
    t_deriv_bound: float | None = None

    def __call__(self, t, s) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(t, dtype=float), np.asarray(s, dtype=float)), dtype=float)


def green_dirichlet() -> Kernel:
    """Green's kernel of -u'' with zero boundary values:
    k(t,s) = s(1-t) for s <= t and t(1-s) for t <= s, i.e. min(t,s) - t s.

    Symmetric, nonnegative, zero on the boundary rows, concave in t for
    each fixed s, with |dk/dt| <= 1.
    """
    return Kernel(fn=lambda t, s: np.minimum(t, s) - t * s, label="green_dirichlet", t_deriv_bound=1.0)


def kernel_matrix(k: Kernel, q: Quadrature) -> np.ndarray:
    """K[i, j] = k(t_i, s_j) on the nodes of ``q``."""
    return k(q.nodes[:, None], q.nodes[None, :])


@dataclass(frozen=True, eq=False)
class PsiFunction:
    values: GridFunction
    source_functional: str


# Known-zero (or otherwise closed-form) psi columns, registered per
# (kernel label, functional label).  The honest column-by-column evaluation
# costs one alpha call per node -- O(n^3) for the Jensen-based functionals --
# so certification at large n consults this table when allowed.
PSI_SHORTCUTS: dict[tuple[str, str], Callable[[Quadrature], np.ndarray]] = {}


def register_psi_shortcut(
    kernel_label: str, functional_label: str, fn: Callable[[Quadrature], np.ndarray]
) -> None:
    PSI_SHORTCUTS[(kernel_label, functional_label)] = fn


# The Green kernel's columns are concave piecewise-linear with zero boundary
# values, so the concave-Dirichlet functional vanishes on every column.
register_psi_shortcut("green_dirichlet", "concave_dirichlet", lambda q: np.zeros(q.n))


def psi(
    alpha: Functional, k: Kernel, q: Quadrature, use_shortcut: bool = False
) -> PsiFunction:
    """psi_alpha(s_j) = alpha(k(., s_j)) at every node s_j.

    ``use_shortcut=True`` consults the registered closed forms; the default
    evaluates every column honestly.
    """
    if use_shortcut:
        hit = PSI_SHORTCUTS.get((k.label, alpha.label))
        if hit is not None:
            return PsiFunction(values=grid_function(q, hit(q)), source_functional=alpha.label)
    K = kernel_matrix(k, q)
    vals = np.array([alpha(q, GridFunction(values=K[:, j])) for j in range(q.n)])
    return PsiFunction(values=grid_function(q, vals), source_functional=alpha.label)


@dataclass(frozen=True)
class PsiIntegral:
    """Weighted integral of a psi-function with a two-grid error estimate."""

    value: float
    coarse: float
    fine: float
    error_estimate: float


def psi_weighted_integral(
    alpha: Functional,
    k: Kernel,
    g: GridFunction,
    q: Quadrature,
    g_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    use_shortcut: bool = False,
) -> PsiIntegral:
    """Integral of psi_alpha(s) g(s) over [0,1], Richardson-extrapolated.

    The whole computation (kernel columns, alpha, outer sum) is repeated on
    the half-spacing grid; for the trapezoid family the two levels combine
    as (4 fine - coarse) / 3.  ``g_fn`` re-evaluates the weight exactly on
    the refined nodes; otherwise g is interpolated piecewise-linearly.
    """
    def level(ql: Quadrature) -> float:
        if g_fn is not None:
            gv = np.asarray(g_fn(ql.nodes), dtype=float)
            if gv.ndim == 0:
                gv = np.full(ql.n, float(gv))
        elif ql is q:
            gv = g.values
        else:
            gv = np.interp(ql.nodes, q.nodes, g.values)
        pv = psi(alpha, k, ql, use_shortcut=use_shortcut).values.values
        return float(ql.weights @ (pv * gv))

    coarse = level(q)
    fine = level(refine_quadrature(q))
    if q.rule_id == RULE_TRAPEZOID:
        value = (4.0 * fine - coarse) / 3.0
        err = abs(fine - coarse) / 3.0
    else:
        value = fine
        err = abs(fine - coarse)
    return PsiIntegral(value=value, coarse=coarse, fine=fine, error_estimate=err)


# ---------------------------------------------------------------------------
# condition checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModulusReport:
    """Empirical modulus of continuity of k(., s), uniformly over sampled s."""

    table: tuple[tuple[float, float], ...]  # (delta, omega(delta))
    certified: bool  # an analytic derivative bound was available
    passed: bool | None  # None when no bound is present (table is informational)


def check_C1(
    k: Kernel,
    deltas: tuple[float, ...] = (0.1, 0.03, 0.01),
    t_samples: int = 201,
    s_samples: int = 101,
) -> ModulusReport:
    """Sample omega(delta) = sup over |t1 - t2| <= delta of |k(t1,s) - k(t2,s)|.

    With a derivative bound B the pass criterion is omega(delta) <= B delta;
    a discontinuity shows up as omega pinned near the jump height for every
    delta.
    """
    ts = np.linspace(0.0, 1.0, t_samples)
    ss = np.linspace(0.0, 1.0, s_samples)
    base = k(ts[:, None], ss[None, :])
    table = []
    for d in deltas:
        if d < 0.0:
            raise InvalidParameterError("delta must be nonnegative")
        omega = 0.0
        for frac in (0.25, 0.5, 1.0):
            shifted = k(np.minimum(ts + frac * d, 1.0)[:, None], ss[None, :])
            omega = max(omega, float(np.max(np.abs(shifted - base))))
        table.append((float(d), omega))
    certified = k.t_deriv_bound is not None
    passed: bool | None = None
    if certified:
        passed = all(om <= k.t_deriv_bound * d + 1e-9 for d, om in table)
    return ModulusReport(table=tuple(table), certified=certified, passed=passed)


@dataclass(frozen=True)
class C2C3Report:
    c2_passed: bool
    c3_passed: bool
    psi_min: float
    g_min: float
    integrals_finite: bool


def check_C2_C3(
    k: Kernel, g: GridFunction, alpha: Functional, q: Quadrature
) -> C2C3Report:
    """Nodewise nonnegativity of psi_alpha and of g, plus finiteness of the
    weighted integrals the theory needs (g, each kernel row against g, and
    psi_alpha g)."""
    if len(g.values) != q.n:
        raise GridShapeError("weight g is not sampled on the quadrature grid")
    pv = psi(alpha, k, q).values.values
    psi_min = float(np.min(pv))
    g_min = float(np.min(g.values))
    K = kernel_matrix(k, q)
    row_integrals = K @ (q.weights * g.values)
    finite = bool(
        np.isfinite(q.weights @ g.values)
        and np.all(np.isfinite(row_integrals))
        and np.isfinite(q.weights @ (pv * g.values))
    )
    return C2C3Report(
        c2_passed=psi_min >= -1e-9,
        c3_passed=(g_min >= -1e-12) and finite,
        psi_min=psi_min,
        g_min=g_min,
        integrals_finite=finite,
    )


def expression_kernel(fn: Callable, label: str = "expr") -> Kernel:
    """Wrap a plain (t, s) callable; no derivative bound is claimed, so
    check_C1 reports its modulus table without certifying."""
    return Kernel(fn=fn, label=label, t_deriv_bound=None)


def default_quadrature(n: int = 201) -> Quadrature:
    return build_quadrature(RULE_TRAPEZOID, n)
