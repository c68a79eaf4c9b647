"""Cone-characterizing functionals, combinators, and randomized axiom checks.

A functional alpha maps a grid function to a real number; its nonnegativity
set {u : alpha(u) >= 0} is the cone it characterizes.  Three properties make
that set a genuine cone:

* (a1) superadditivity:   alpha(u + v) >= alpha(u) + alpha(v)
* (a2) positive super-homogeneity:  alpha(lam u) >= lam alpha(u), lam >= 0
* (a4) pointedness surrogate:  alpha(u) + alpha(-u) <= 0 for all u, with
  equality to zero only at u = 0.

(a4) implies the pointedness condition proper, which quantifies over the
whole space and cannot be verified by sampling.  ``check_axioms`` therefore
searches for violations at random; a clean report is evidence, not proof,
and is labelled accordingly by callers.

Each built-in evaluator takes ``(Quadrature, GridFunction)`` and works purely
on nodal values (plus piecewise-linear interpolation where midpoints between
nodes are needed).  ``claimed_axioms`` records which of a1/a2/a4 the
construction guarantees; combinators propagate claims conservatively.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidMeasureError, InvalidParameterError
from .grid import (
    GridFunction,
    Quadrature,
    check_associated,
    gf_add,
    gf_neg,
    gf_scale,
    grid_function,
    interp_at,
    norms,
    sample_smooth,
)

CHECK_TOL = 1e-9


@dataclass(frozen=True)
class Functional:
    """A deterministic evaluator tagged with the axioms it claims."""

    fn: Callable[[Quadrature, GridFunction], float]
    label: str
    claimed_axioms: frozenset[str] = frozenset()

    def __call__(self, q: Quadrature, u: GridFunction) -> float:
        return float(self.fn(q, u))

    def claims(self, axiom: str) -> bool:
        return axiom in self.claimed_axioms

    def with_claims(self, *axioms: str) -> "Functional":
        """Copy with extra claimed axioms (e.g. a4 after a sum-lemma check)."""
        return dataclasses.replace(
            self, claimed_axioms=self.claimed_axioms | frozenset(axioms)
        )


def _axioms(*names: str) -> frozenset[str]:
    bad = set(names) - {"a1", "a2", "a4"}
    if bad:
        raise InvalidParameterError(f"unknown axiom tags {sorted(bad)}")
    return frozenset(names)


# ---------------------------------------------------------------------------
# built-in evaluators
# ---------------------------------------------------------------------------


def eval_min_window(
    q: Quadrature,
    u: GridFunction,
    a: float,
    b: float,
    sigma: GridFunction | None = None,
    c: float = 0.0,
) -> float:
    """min over nodes in [a,b] of sigma(t) u(t), minus c times the sup norm."""
    check_associated(q, u)
    mask = (q.nodes >= a - 1e-12) & (q.nodes <= b + 1e-12)
    if not mask.any():
        raise InvalidParameterError(f"window [{a}, {b}] contains no quadrature nodes")
    w = u.values[mask]
    if sigma is not None:
        check_associated(q, sigma)
        w = sigma.values[mask] * w
    return float(np.min(w) - c * np.max(np.abs(u.values)))


def eval_nparallel(q: Quadrature, u: GridFunction) -> float:
    """max of (min u) and (-max u); positive exactly for one-signed u."""
    check_associated(q, u)
    v = u.values
    return float(max(np.min(v), -np.max(v)))


# Pair-midpoint index tables, cached per quadrature.  For a uniform grid the
# midpoint of two nodes is either a node or a half-grid point, so the
# piecewise-linear value is an average of at most two nodal values.
_MIDPOINT_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _midpoint_tables(q: Quadrature) -> tuple[np.ndarray, np.ndarray]:
    key = id(q)
    hit = _MIDPOINT_CACHE.get(key)
    if hit is not None:
        return hit
    idx = np.arange(q.n)
    s = idx[:, None] + idx[None, :]
    lo = s // 2
    hi = lo + (s & 1)
    if len(_MIDPOINT_CACHE) > 16:
        _MIDPOINT_CACHE.clear()
    _MIDPOINT_CACHE[key] = (lo, hi)
    return lo, hi


def eval_jensen_gap(q: Quadrature, u: GridFunction) -> float:
    """Minimum over node pairs (t_i, t_j) of u((t_i+t_j)/2) - (u(t_i)+u(t_j))/2.

    Zero is always attainable at t_i = t_j, so the value is <= 0 with
    equality exactly when the sampled function is midpoint-concave on the
    grid.  Uniform grids use exact half-grid averaging; non-uniform grids
    fall back to piecewise-linear interpolation at the pair midpoints.
    """
    check_associated(q, u)
    v = u.values
    if q.is_uniform:
        lo, hi = _midpoint_tables(q)
        mids = 0.5 * (v[lo] + v[hi])
    else:
        pts = 0.5 * (q.nodes[:, None] + q.nodes[None, :])
        mids = np.interp(pts, q.nodes, v)
    gap = mids - 0.5 * (v[:, None] + v[None, :])
    return float(np.min(gap))


def eval_concave_dirichlet(q: Quadrature, u: GridFunction) -> float:
    """min of the Jensen gap and the pinned boundary terms u(0), -u(0),
    u(1), -u(1). Nonnegative exactly for concave functions vanishing at both
    endpoints."""
    u0 = float(interp_at(q, u, 0.0))
    u1 = float(interp_at(q, u, 1.0))
    return min(eval_jensen_gap(q, u), u0, -u0, u1, -u1)


def eval_stieltjes(
    q: Quadrature,
    u: GridFunction,
    h: Callable[[np.ndarray, np.ndarray], np.ndarray],
    density: GridFunction | None = None,
    atoms: Sequence[tuple[float, float]] = (),
) -> float:
    """Integral of h(t, u(t)) against a measure: a nonnegative density plus
    point atoms.  Superadditivity of ``h`` in its second argument is the
    caller's claim; ``check_axioms`` can spot-check it on the induced
    functional."""
    check_associated(q, u)
    if density is None:
        dens = np.ones(q.n)
    else:
        check_associated(q, density)
        dens = density.values
        if np.min(dens) < 0.0:
            raise InvalidMeasureError("density must be nonnegative")
    for t0, m in atoms:
        if m < 0.0:
            raise InvalidMeasureError(f"atom at t={t0} has negative mass {m}")
    total = float(q.weights @ (dens * np.asarray(h(q.nodes, u.values), dtype=float)))
    for t0, m in atoms:
        total += m * float(h(np.asarray(t0), np.asarray(interp_at(q, u, t0))))
    return total


def eval_family_inf(
    q: Quadrature, u: GridFunction, members: Sequence[GridFunction]
) -> float:
    """inf over a finite family of weights sigma of min(sigma u)."""
    if not members:
        raise InvalidParameterError("family_inf needs a nonempty family")
    check_associated(q, u)
    best = np.inf
    for sigma in members:
        check_associated(q, sigma)
        best = min(best, float(np.min(sigma.values * u.values)))
    return float(best)


def eval_dist_nonneg(q: Quadrature, u: GridFunction) -> float:
    """Minus the sup-norm distance from u to the nonnegative cone: min(0, min u)."""
    check_associated(q, u)
    return float(min(0.0, np.min(u.values)))


def phi_nonneg(q: Quadrature, u: GridFunction) -> float:
    """Signed boundary-distance for the nonnegative cone under the sup norm.

    Positive inside (distance to the boundary), zero on the boundary, minus
    the distance to the cone outside; all three branches collapse to min u.
    """
    check_associated(q, u)
    return float(np.min(u.values))


# ---------------------------------------------------------------------------
# built-in Functional constructors
# ---------------------------------------------------------------------------


def min_window(
    a: float, b: float, sigma: GridFunction | None = None, c: float = 0.0
) -> Functional:
    """Windowed minimum minus ``c`` times the sup norm.

    With c > 0 the construction also pins the origin (a4); with c = 0 any
    function constant on the window sits on the cone boundary, so only
    a1/a2 are claimed.
    """
    if not (0.0 <= a < b <= 1.0):
        raise InvalidParameterError(f"window must satisfy 0 <= a < b <= 1, got [{a}, {b}]")
    if c < 0.0:
        raise InvalidParameterError("c must be nonnegative")
    if sigma is not None and np.min(sigma.values) < 0.0:
        raise InvalidParameterError("sigma must be nonnegative")
    claims = _axioms("a1", "a2", "a4") if c > 0 else _axioms("a1", "a2")
    return Functional(
        fn=lambda q, u: eval_min_window(q, u, a, b, sigma, c),
        label="min_window",
        claimed_axioms=claims,
    )


def nparallel() -> Functional:
    """Signed one-signedness indicator with |lambda|-homogeneity.

    Claims a2 only: superadditivity fails on opposite-signed pairs
    (u = 1, v = -1 gives 0 on the left against 2 on the right), and the
    functional is symmetric, so a4 cannot hold either.  Its characteristic
    identities against max/min/sup are covered by dedicated tests.
    """
    return Functional(eval_nparallel, "nparallel", _axioms("a2"))


def jensen_gap() -> Functional:
    # constants solve Jensen's functional equation, so a4 fails
    return Functional(eval_jensen_gap, "jensen_gap", _axioms("a1", "a2"))


def concave_dirichlet() -> Functional:
    return Functional(eval_concave_dirichlet, "concave_dirichlet", _axioms("a1", "a2", "a4"))


def stieltjes(
    h: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    density: GridFunction | None = None,
    atoms: Sequence[tuple[float, float]] = (),
) -> Functional:
    """Stieltjes-integral functional; default integrand h(t, x) = exp(t) x."""
    if h is None:
        h = lambda t, x: np.exp(t) * x
    return Functional(
        fn=lambda q, u: eval_stieltjes(q, u, h, density, atoms),
        label="stieltjes",
        claimed_axioms=_axioms("a1", "a2"),
    )


def family_inf(members: Sequence[GridFunction]) -> Functional:
    """inf over a family of weights; a4 holds when the family covers [0,1]
    with locally nonvanishing members taking at least two values (the
    caller's responsibility, as with the Stieltjes integrand)."""
    if not members:
        raise InvalidParameterError("family_inf needs a nonempty family")
    members = tuple(members)
    return Functional(
        fn=lambda q, u: eval_family_inf(q, u, members),
        label="family_inf",
        claimed_axioms=_axioms("a1", "a2", "a4"),
    )


def dist_nonneg() -> Functional:
    return Functional(eval_dist_nonneg, "dist_nonneg", _axioms("a1", "a2", "a4"))


def l1_norm() -> Functional:
    return Functional(lambda q, u: norms(q, u).l1, "l1", _axioms("a2"))


def l2_norm() -> Functional:
    return Functional(lambda q, u: norms(q, u).l2, "l2", _axioms("a2"))


def sup_norm() -> Functional:
    return Functional(lambda q, u: norms(q, u).sup, "sup", _axioms("a2"))


def neg_sup() -> Functional:
    # characterizes the degenerate cone {0}
    return Functional(lambda q, u: -norms(q, u).sup, "neg_sup", _axioms("a1", "a2", "a4"))


def broken_max() -> Functional:
    """Deliberately wrong fixture: max u claiming superadditivity.

    max is subadditive, so randomized a1 checks must flag it; used as the
    sensitivity control for the axiom suite.
    """
    return Functional(
        lambda q, u: float(np.max(u.values)), "broken_max", _axioms("a1", "a2")
    )


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


def combine_min(alpha: Functional, beta: Functional) -> Functional:
    """Pointwise minimum; characterizes the intersection of the two cones.

    a1/a2 are preserved when both operands claim them; a4 survives when
    either operand claims it (the min is dominated by that operand).
    """
    claims = (alpha.claimed_axioms & beta.claimed_axioms) & _axioms("a1", "a2")
    if "a4" in (alpha.claimed_axioms | beta.claimed_axioms):
        claims = claims | _axioms("a4")
    return Functional(
        fn=lambda q, u: min(alpha(q, u), beta(q, u)),
        label=f"min({alpha.label},{beta.label})",
        claimed_axioms=claims,
    )


def scale(lam: float, alpha: Functional) -> Functional:
    if lam < 0.0:
        raise InvalidParameterError("scale factor must be nonnegative")
    claims = alpha.claimed_axioms & _axioms("a1", "a2")
    if lam > 0.0 and alpha.claims("a4"):
        claims = claims | _axioms("a4")
    return Functional(
        fn=lambda q, u: lam * alpha(q, u),
        label=f"{lam:g}*{alpha.label}",
        claimed_axioms=claims,
    )


def sum_functionals(alphas: Sequence[Functional]) -> Functional:
    """Sum of functionals.  a1/a2 propagate; a4 is claimed only after a
    ``check_lemsc`` pass, via ``with_claims('a4')`` on the result."""
    if not alphas:
        raise InvalidParameterError("sum of functionals needs a nonempty list")
    alphas = tuple(alphas)
    claims = frozenset.intersection(*(a.claimed_axioms for a in alphas)) & _axioms(
        "a1", "a2"
    )
    return Functional(
        fn=lambda q, u: sum(a(q, u) for a in alphas),
        label="+".join(a.label for a in alphas),
        claimed_axioms=claims,
    )


# ---------------------------------------------------------------------------
# randomized checkers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of a randomized axiom search; reproducible for a fixed seed."""

    trials: int
    violations_a1: int
    violations_a2: int
    violations_a4: int
    worst_margin: float
    seed: int
    checked: frozenset[str]

    @property
    def total_violations(self) -> int:
        return self.violations_a1 + self.violations_a2 + self.violations_a4

    @property
    def passed(self) -> bool:
        return self.total_violations == 0


def smooth_sampler(q: Quadrature, amplitude: float = 1.0, modes: int = 6):
    """Factory for the default random-function sampler bound to one grid."""

    def sampler(rng: np.random.Generator) -> GridFunction:
        return sample_smooth(q, rng, amplitude=amplitude, modes=modes)

    return sampler


def check_axioms(
    q: Quadrature,
    alpha: Functional,
    sampler: Callable[[np.random.Generator], GridFunction] | None = None,
    trials: int = 1000,
    seed: int = 0,
    tol: float = CHECK_TOL,
) -> AxiomReport:
    """Search for axiom violations on random samples.

    Per trial: (a1) on a random pair, (a2) on a random function with a
    scale factor in [0, 10], and the necessary half of (a4),
    alpha(u) + alpha(-u) <= 0, on a random function.  Only claimed axioms
    are scored; ``worst_margin`` is the most negative slack seen (a margin
    below ``-tol`` counts as a violation).
    """
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if sampler is None:
        sampler = smooth_sampler(q)
    rng = np.random.default_rng(seed)
    v1 = v2 = v4 = 0
    worst = np.inf
    for _ in range(trials):
        u = sampler(rng)
        if alpha.claims("a1"):
            v = sampler(rng)
            slack = alpha(q, gf_add(u, v)) - alpha(q, u) - alpha(q, v)
            worst = min(worst, slack)
            if slack < -tol:
                v1 += 1
        if alpha.claims("a2"):
            lam = rng.uniform(0.0, 10.0)
            slack = alpha(q, gf_scale(lam, u)) - lam * alpha(q, u)
            worst = min(worst, slack)
            if slack < -tol:
                v2 += 1
        if alpha.claims("a4"):
            slack = -(alpha(q, u) + alpha(q, gf_neg(u)))
            worst = min(worst, slack)
            if slack < -tol:
                v4 += 1
    if not np.isfinite(worst):
        worst = 0.0
    return AxiomReport(
        trials=trials,
        violations_a1=v1,
        violations_a2=v2,
        violations_a4=v4,
        worst_margin=float(worst),
        seed=seed,
        checked=alpha.claimed_axioms,
    )


@dataclass(frozen=True)
class LemscReport:
    """Outcome of the sum-lemma hypothesis search.

    ``verdict`` is "no-counterexample-found" or "counterexample"; the latter
    carries the witness and which condition it breaks: "cond5" when some
    alpha_j(u) + alpha_j(-u) > 0, "cond6" when a nonzero sample lies in the
    joint kernel within tolerance.  Sampling can neither prove the
    conditions nor rule out counterexamples it never draws; the verdict
    reports only what was found.
    """

    verdict: str
    condition: str | None
    witness: GridFunction | None
    trials: int
    seed: int


def check_lemsc(
    q: Quadrature,
    alphas: Sequence[Functional],
    sampler: Callable[[np.random.Generator], GridFunction] | None = None,
    trials: int = 1000,
    seed: int = 0,
    tol: float = CHECK_TOL,
) -> LemscReport:
    """Probe the two hypotheses under which a sum of functionals inherits a4."""
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if not alphas:
        raise InvalidParameterError("check_lemsc needs a nonempty list")
    if sampler is None:
        sampler = smooth_sampler(q)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        u = sampler(rng)
        if not np.any(u.values):
            continue
        sums = [a(q, u) + a(q, gf_neg(u)) for a in alphas]
        if any(s > tol for s in sums):
            return LemscReport("counterexample", "cond5", u, trials, seed)
        if all(abs(s) <= tol for s in sums):
            return LemscReport("counterexample", "cond6", u, trials, seed)
    return LemscReport("no-counterexample-found", None, None, trials, seed)


# ---------------------------------------------------------------------------
# label registry (used by problem files and the CLI)
# ---------------------------------------------------------------------------

BUILTIN_LABELS = (
    "min_window",
    "nparallel",
    "jensen_gap",
    "concave_dirichlet",
    "stieltjes",
    "family_inf",
    "dist_nonneg",
    "l1",
    "l2",
    "sup",
    "neg_sup",
)


def default_functional(label: str, q: Quadrature | None = None) -> Functional:
    """Built-in functional by label with default parameters.

    ``q`` is needed only for labels whose defaults sample the grid
    (family_inf's default family is {t, 1-t}).
    """
    simple = {
        "nparallel": nparallel,
        "jensen_gap": jensen_gap,
        "concave_dirichlet": concave_dirichlet,
        "dist_nonneg": dist_nonneg,
        "l1": l1_norm,
        "l2": l2_norm,
        "sup": sup_norm,
        "neg_sup": neg_sup,
        "stieltjes": stieltjes,
    }
    if label in simple:
        return simple[label]()
    if label == "min_window":
        return min_window(0.25, 0.75, c=0.5)
    if label == "family_inf":
        if q is None:
            raise InvalidParameterError("family_inf default needs a quadrature")
        return family_inf([grid_function(q, lambda t: t), grid_function(q, lambda t: 1 - t)])
    raise InvalidParameterError(f"unknown functional label {label!r}")
