"""Quadrature rules on [0,1], grid-sampled functions, norms and integration.

Every function handled by this package is represented by its values at the
nodes of a quadrature rule, with piecewise-linear interpolation in between.
Piecewise-linear interpolation attains its extrema at the nodes, which keeps
the min/max-based functionals of :mod:`coneham.functionals` exact on the grid.

Two rule families are provided:

* ``composite-trapezoid`` -- ``n`` uniformly spaced nodes including both
  endpoints (``n - 1`` panels).  Second-order accurate on smooth integrands,
  exact for piecewise-linear integrands whose kinks sit on nodes.
* ``composite-gauss-legendre`` -- ``n`` panels with a 4-point Gauss-Legendre
  rule on each (``4 n`` nodes, none at the endpoints).  Exact for polynomials
  of degree <= 7 per panel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import GridShapeError, InvalidParameterError

RULE_TRAPEZOID = "composite-trapezoid"
RULE_GAUSS = "composite-gauss-legendre"

_RULE_ALIASES = {
    "trapezoid": RULE_TRAPEZOID,
    "trap": RULE_TRAPEZOID,
    RULE_TRAPEZOID: RULE_TRAPEZOID,
    "gauss": RULE_GAUSS,
    "gauss-legendre": RULE_GAUSS,
    RULE_GAUSS: RULE_GAUSS,
}

GAUSS_POINTS_PER_PANEL = 4


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Nodes and weights integrating over [0,1]; weights sum to one."""

    nodes: np.ndarray
    weights: np.ndarray
    rule_id: str

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.nodes)
        return bool(np.allclose(d, d[0], rtol=0.0, atol=1e-13))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values at the nodes of an associated quadrature, one per node."""

    values: np.ndarray
    interp: str = "piecewise-linear"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.flags.writeable = False
    return a


def build_quadrature(rule_id: str, n: int) -> Quadrature:
    """Build a quadrature rule on [0,1].

    For the trapezoid family ``n`` is the node count (>= 2); for the
    composite Gauss-Legendre family ``n`` is the panel count (>= 1), each
    panel carrying 4 points.
    """
    rule = _RULE_ALIASES.get(rule_id)
    if rule is None:
        raise InvalidParameterError(f"unknown quadrature rule {rule_id!r}")
    if rule == RULE_TRAPEZOID:
        if n < 2:
            raise InvalidParameterError("trapezoid rule needs at least 2 nodes")
        nodes = np.linspace(0.0, 1.0, n)
        h = 1.0 / (n - 1)
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2.0
    else:
        if n < 1:
            raise InvalidParameterError("gauss-legendre rule needs at least 1 panel")
        x, w = np.polynomial.legendre.leggauss(GAUSS_POINTS_PER_PANEL)
        edges = np.linspace(0.0, 1.0, n + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
    return Quadrature(nodes=_freeze(nodes), weights=_freeze(weights), rule_id=rule)


def refine_quadrature(q: Quadrature) -> Quadrature:
    """Halve the spacing: double the panel count of either rule family."""
    if q.rule_id == RULE_TRAPEZOID:
        return build_quadrature(RULE_TRAPEZOID, 2 * (q.n - 1) + 1)
    return build_quadrature(RULE_GAUSS, 2 * (q.n // GAUSS_POINTS_PER_PANEL))


def grid_function(q: Quadrature, source) -> GridFunction:
    """Sample ``source`` (callable, array, or scalar) on the nodes of ``q``."""
    if callable(source):
        values = np.asarray(source(q.nodes), dtype=float)
        if values.ndim == 0:
            values = np.full(q.n, float(values))
    else:
        values = np.asarray(source, dtype=float)
        if values.ndim == 0:
            values = np.full(q.n, float(values))
    if values.shape != (q.n,):
        raise GridShapeError(
            f"grid function has {values.shape} values for a {q.n}-node quadrature"
        )
    return GridFunction(values=_freeze(values))


def check_associated(q: Quadrature, u: GridFunction) -> None:
    if len(u.values) != q.n:
        raise GridShapeError(
            f"grid function has {len(u.values)} values, quadrature has {q.n} nodes"
        )


def interp_at(q: Quadrature, u: GridFunction, x) -> np.ndarray:
    """Piecewise-linear evaluation of ``u`` at points ``x`` in [0,1].

    At a node this returns the stored value exactly; outside the node span
    (possible for Gauss-Legendre grids) the nearest nodal value is used.
    """
    check_associated(q, u)
    return np.interp(x, q.nodes, u.values)


def integrate(q: Quadrature, u: GridFunction) -> float:
    """Weighted nodal sum: the quadrature approximation of the integral."""
    check_associated(q, u)
    return float(q.weights @ u.values)


class Norms(NamedTuple):
    sup: float
    l1: float
    l2: float


def norms(q: Quadrature, u: GridFunction) -> Norms:
    """Sup, L1 and L2 norms of ``u`` on the grid.

    The sup norm is the max of |values| (exact under piecewise-linear
    interpolation); L1 and L2 integrate |u| and u^2 nodewise, so a sign
    change between nodes carries the quadrature's O(h^2) error.
    """
    check_associated(q, u)
    v = u.values
    sup = float(np.max(np.abs(v))) if len(v) else 0.0
    l1 = float(q.weights @ np.abs(v))
    l2 = float(np.sqrt(max(q.weights @ (v * v), 0.0)))
    return Norms(sup=sup, l1=l1, l2=l2)


def gf_add(u: GridFunction, v: GridFunction) -> GridFunction:
    return GridFunction(values=_freeze(u.values + v.values))


def gf_scale(lam: float, u: GridFunction) -> GridFunction:
    return GridFunction(values=_freeze(lam * u.values))


def gf_neg(u: GridFunction) -> GridFunction:
    return gf_scale(-1.0, u)


def sample_smooth(
    q: Quadrature,
    rng: np.random.Generator,
    amplitude: float = 1.0,
    modes: int = 6,
) -> GridFunction:
    """Random smooth function: a low-order Fourier series scaled to a fixed
    sup norm.

    The constant term is on the same footing as the oscillating modes, so a
    useful fraction of samples is one-signed; coefficients decay like 1/m to
    keep samples smooth at any grid size.  With a fixed ``amplitude`` the
    sampler never emits near-zero functions, which keeps tolerance-band
    checks (see ``check_lemsc``) meaningful.
    """
    t = q.nodes
    vals = np.full(q.n, rng.normal())
    for m in range(1, modes + 1):
        a, b = rng.normal(size=2)
        vals = vals + (a * np.cos(2 * np.pi * m * t) + b * np.sin(2 * np.pi * m * t)) / m
    peak = np.max(np.abs(vals))
    if peak < 1e-14:  # probability-zero degenerate draw
        vals = np.full(q.n, 1.0)
        peak = 1.0
    return GridFunction(values=_freeze(vals * (amplitude / peak)))
