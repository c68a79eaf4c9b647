"""The Hammerstein integral operator, its hypothesis checks, and the
existence certifier.

The operator is Tu(t) = integral of k(t,s) g(s) f(s, u(s)) ds, discretized
by the Nystrom rule of the problem's quadrature.  The certifier combines:

* sampled checks of the structural hypotheses (C4)-(C7): nonnegativity and
  boundedness of the nonlinearity, the three psi-integral inequalities for
  alpha/beta/gamma, and the existence of a reference cone element with
  nonnegative gamma;
* the two index conditions at a level rho:

  - index 1 (localizes away):  f_upper(rho) * integral(psi_beta g)  < 1
  - index 0 (localizes in):    f_lower(rho) * integral(psi_gamma g) > 1

The level constants are defined as a sup/inf of f(t, u(t))/rho over an
infinite-dimensional level set of the cone; here they are replaced by
certified one-sided bounds obtained from the cone's pointwise range
envelope: every value u(t) on the level set lies in a registered interval,
so maximizing (minimizing) f over that interval dominates (minorizes) the
true constant.  Conservative in the sound direction by construction --
a certificate can fail to be sharp but never asserts a false inequality.

Strict inequalities are enforced with a fixed margin plus the quadrature
error estimate of the psi integral; verdicts inside the combined margin are
reported as numerically inconclusive, never as holding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .cones import ConeSpec, growth_b, growth_c, membership, range_bound, sample_cone
from .errors import InvalidParameterError, NonlinearityDomainError
from .functionals import Functional
from .grid import GridFunction, Quadrature, grid_function, norms
from .kernels import Kernel, PsiIntegral, kernel_matrix, psi, psi_weighted_integral

MARGIN_TOL = 1e-9
LEVEL_GRID_POINTS = 1025  # 2^10 + 1, so refinements nest
LEVEL_REFINE_XATOL = 1e-10


@dataclass(eq=False)
class HammersteinProblem:
    """Kernel, weight, nonlinearity, cone, and comparison functionals.

    ``f`` must be vectorized over (t, v) and nonnegative; ``e`` is the
    reference cone element of the (C7) check.  ``g_fn`` optionally
    re-evaluates the weight exactly on refined grids (expression-built
    problems provide it; otherwise the sampled g is interpolated).
    """

    kernel: Kernel
    g: GridFunction
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    cone: ConeSpec
    beta: Functional
    gamma: Functional
    e: GridFunction
    q: Quadrature
    g_fn: Callable[[np.ndarray], np.ndarray] | None = None
    use_psi_shortcut: bool = True

    def __post_init__(self) -> None:
        for name, u in (("g", self.g), ("e", self.e)):
            if len(u.values) != self.q.n:
                raise InvalidParameterError(f"{name} is not sampled on the problem grid")

    @cached_property
    def kernel_matrix(self) -> np.ndarray:
        return kernel_matrix(self.kernel, self.q)

    @cached_property
    def psi_alpha(self) -> np.ndarray:
        return psi(self.cone.alpha, self.kernel, self.q, use_shortcut=self.use_psi_shortcut).values.values

    @cached_property
    def psi_beta_integral(self) -> PsiIntegral:
        return psi_weighted_integral(self.beta, self.kernel, self.g, self.q, g_fn=self.g_fn)

    @cached_property
    def psi_gamma_integral(self) -> PsiIntegral:
        return psi_weighted_integral(self.gamma, self.kernel, self.g, self.q, g_fn=self.g_fn)


def _f_values(p: HammersteinProblem, t: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.asarray(p.f(t, v), dtype=float)
    if not np.all(np.isfinite(out)):
        raise NonlinearityDomainError("nonlinearity produced a non-finite value")
    # constant expressions collapse the broadcast; restore the (t, v) shape
    want = np.broadcast_shapes(np.shape(t), np.shape(v))
    if out.shape != want:
        out = np.broadcast_to(out, want)
    return out


def apply_T(p: HammersteinProblem, u: GridFunction) -> GridFunction:
    """One Nystrom application: (Tu)(t_i) = sum_j w_j k(t_i,s_j) g_j f(s_j,u_j)."""
    if len(u.values) != p.q.n:
        raise InvalidParameterError("u is not sampled on the problem grid")
    fv = _f_values(p, p.q.nodes, u.values)
    return grid_function(p.q, p.kernel_matrix @ (p.q.weights * p.g.values * fv))


def weighted_f_integral(p: HammersteinProblem, psi_values: np.ndarray, u: GridFunction) -> float:
    """Same-grid quadrature of psi(s) g(s) f(s, u(s)); the comparison value
    for the (C5)/(C6) inequalities."""
    fv = _f_values(p, p.q.nodes, u.values)
    return float(p.q.weights @ (psi_values * p.g.values * fv))


# ---------------------------------------------------------------------------
# structural hypothesis checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class C4Report:
    passed: bool
    sup_by_r: tuple[tuple[float, float], ...]  # (r, empirical sup of f on I x [-r,r])
    nonneg: bool
    finite: bool


def check_C4(p: HammersteinProblem, r_list: Sequence[float] = (1.0,), samples: int = 201) -> C4Report:
    """Sample f over t-grid x [-r, r] per r: finite, nonnegative, and report
    the empirical bound sup f (the L-infinity majorant at that radius)."""
    sups = []
    nonneg = True
    finite = True
    for r in r_list:
        vs = np.linspace(-r, r, samples)
        vals = np.asarray(p.f(p.q.nodes[:, None], vs[None, :]), dtype=float)
        if not np.all(np.isfinite(vals)):
            finite = False
            sups.append((float(r), float("nan")))
            continue
        if np.min(vals) < 0.0:
            nonneg = False
        sups.append((float(r), float(np.max(vals))))
    return C4Report(passed=nonneg and finite, sup_by_r=tuple(sups), nonneg=nonneg, finite=finite)


@dataclass(frozen=True)
class C5C6Report:
    passed: bool
    trials: int
    violations_alpha: int
    violations_beta: int
    violations_gamma: int
    worst_alpha_margin: float
    worst_beta_margin: float
    worst_gamma_margin: float
    psi_beta_positive: bool
    psi_gamma_positive: bool
    seed: int


def check_C5_C6(p: HammersteinProblem, n_samples: int = 1000, seed: int = 0, tol: float = 1e-7) -> C5C6Report:
    """Sampled operator inequalities on cone elements u:

    alpha(Tu) >= integral(psi_alpha g f(.,u)),
    beta(Tu)  <= integral(psi_beta  g f(.,u)),
    gamma(Tu) >= integral(psi_gamma g f(.,u)),

    with all integrals on the problem grid, plus positivity of the plain
    psi_beta/psi_gamma integrals."""
    rng = np.random.default_rng(seed)
    psi_a = p.psi_alpha
    psi_b = psi(p.beta, p.kernel, p.q).values.values
    psi_g = psi(p.gamma, p.kernel, p.q).values.values
    va = vb = vg = 0
    wa = wb = wg = np.inf
    for _ in range(n_samples):
        u = sample_cone(p.q, p.cone, amplitude=rng.uniform(0.05, 2.0), rng=rng)
        tu = apply_T(p, u)
        sa = p.cone.alpha(p.q, tu) - weighted_f_integral(p, psi_a, u)
        sb = weighted_f_integral(p, psi_b, u) - p.beta(p.q, tu)
        sg = p.gamma(p.q, tu) - weighted_f_integral(p, psi_g, u)
        wa, wb, wg = min(wa, sa), min(wb, sb), min(wg, sg)
        va += sa < -tol
        vb += sb < -tol
        vg += sg < -tol
    pos_b = p.psi_beta_integral.value > 0.0
    pos_g = p.psi_gamma_integral.value > 0.0
    return C5C6Report(
        passed=(va == vb == vg == 0) and pos_b and pos_g,
        trials=n_samples,
        violations_alpha=int(va),
        violations_beta=int(vb),
        violations_gamma=int(vg),
        worst_alpha_margin=float(wa),
        worst_beta_margin=float(wb),
        worst_gamma_margin=float(wg),
        psi_beta_positive=pos_b,
        psi_gamma_positive=pos_g,
        seed=seed,
    )


@dataclass(frozen=True)
class C7Report:
    passed: bool
    membership_verdict: str
    e_sup: float
    gamma_e: float


def check_C7(p: HammersteinProblem, tol: float = 1e-9) -> C7Report:
    """The reference element e: in the cone, nonzero, with gamma(e) >= 0."""
    m = membership(p.q, p.cone, p.e)
    e_sup = norms(p.q, p.e).sup
    ge = p.gamma(p.q, p.e)
    return C7Report(
        passed=(m.verdict != "outside") and e_sup > 0.0 and ge >= -tol,
        membership_verdict=m.verdict,
        e_sup=e_sup,
        gamma_e=ge,
    )


# ---------------------------------------------------------------------------
# level constants and index conditions
# ---------------------------------------------------------------------------


def _level_constant(p: HammersteinProblem, level_kind: str, rho: float, maximize: bool, v_points: int) -> float:
    if rho <= 0.0:
        raise InvalidParameterError("rho must be positive")
    lo, hi = range_bound(p.cone, level_kind, rho)
    vs = np.linspace(lo, hi, v_points)
    vals = _f_values(p, p.q.nodes[:, None], vs[None, :])
    sign = -1.0 if maximize else 1.0
    i, j = np.unravel_index(np.argmin(sign * vals), vals.shape)
    best = float(vals[i, j])
    t_star = float(p.q.nodes[i])
    if hi > lo:
        # polish around the grid argmax/argmin in v at the extremal t
        dv = (hi - lo) / (v_points - 1)
        a = max(lo, float(vs[j]) - dv)
        b = min(hi, float(vs[j]) + dv)
        if b > a:
            res = minimize_scalar(
                lambda v: sign * float(_f_values(p, np.asarray(t_star), np.asarray(v))),
                bounds=(a, b),
                method="bounded",
                options={"xatol": LEVEL_REFINE_XATOL},
            )
            refined = sign * float(res.fun)
            best = max(best, refined) if maximize else min(best, refined)
    return best / rho


def f_upper(p: HammersteinProblem, rho: float, v_points: int = LEVEL_GRID_POINTS) -> float:
    """Certified upper bound of sup f(t, u(t))/rho over the beta-level set:
    maximize f over the t-grid and the registered pointwise envelope."""
    return _level_constant(p, "beta", rho, maximize=True, v_points=v_points)


def f_lower(p: HammersteinProblem, rho: float, v_points: int = LEVEL_GRID_POINTS) -> float:
    """Certified lower bound of inf f(t, u(t))/rho over the gamma-level set."""
    return _level_constant(p, "gamma", rho, maximize=False, v_points=v_points)


@dataclass(frozen=True)
class IndexVerdict:
    rho: float
    kind: str  # "index1" | "index0"
    level_constant: float  # f_upper(rho) or f_lower(rho)
    psi_integral: float
    product: float
    holds: bool
    margin: float  # positive slack beyond the threshold 1
    status: str  # "holds" | "fails" | "inconclusive-numerical"
    note: str = ""


def check_index1(p: HammersteinProblem, rho: float) -> IndexVerdict:
    """Index-1 condition at level rho: f_upper(rho) * integral(psi_beta g) < 1."""
    fu = f_upper(p, rho)
    pi = p.psi_beta_integral
    product = fu * pi.value
    margin = 1.0 - product
    margin_tol = MARGIN_TOL + abs(fu) * pi.error_estimate
    if margin > margin_tol:
        status = "holds"
    elif margin < -margin_tol:
        status = "fails"
    else:
        status = "inconclusive-numerical"
    return IndexVerdict(
        rho=rho, kind="index1", level_constant=fu, psi_integral=pi.value,
        product=product, holds=status == "holds", margin=margin, status=status,
    )


def check_index0(p: HammersteinProblem, rho: float) -> IndexVerdict:
    """Index-0 condition at level rho: f_lower(rho) * integral(psi_gamma g) > 1.

    Requires the (C7) reference element: without it the condition's
    conclusion is not available, so the verdict cannot hold.
    """
    fl = f_lower(p, rho)
    pi = p.psi_gamma_integral
    product = fl * pi.value
    margin = product - 1.0
    margin_tol = MARGIN_TOL + abs(fl) * pi.error_estimate
    c7 = check_C7(p)
    if not c7.passed:
        return IndexVerdict(
            rho=rho, kind="index0", level_constant=fl, psi_integral=pi.value,
            product=product, holds=False, margin=margin, status="fails",
            note="reference-element check (C7) failed",
        )
    if margin > margin_tol:
        status = "holds"
    elif margin < -margin_tol:
        status = "fails"
    else:
        status = "inconclusive-numerical"
    return IndexVerdict(
        rho=rho, kind="index0", level_constant=fl, psi_integral=pi.value,
        product=product, holds=status == "holds", margin=margin, status=status,
    )


# ---------------------------------------------------------------------------
# certification strategies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapCheck:
    description: str
    lhs: float  # the level that must exceed...
    rhs: float  # ...this growth-map value
    passed: bool


@dataclass(frozen=True)
class Certificate:
    """Verdicts and gap checks for one strategy, with the localization of
    the solutions the strategy yields when everything holds.

    Conclusions are conditional: the hypothesis checks and index
    inequalities are verified numerically, the topological index itself is
    never computed.
    """

    strategy: str
    levels: tuple[float, ...]
    gap_checks: tuple[GapCheck, ...]
    verdicts: tuple[IndexVerdict, ...]
    conclusion: str  # "one-solution" | "two-solutions" | "not-established"
    localization: tuple[str, ...]

    @property
    def established(self) -> bool:
        return self.conclusion != "not-established"


def _annulus(outer_fn: str, outer_rho: float, inner_fn: str, inner_rho: float) -> str:
    return (
        f"K_alpha^{{{outer_fn},{outer_rho:g}}} \\ K_alpha^{{{inner_fn},{inner_rho:g}}}"
    )


_STRATEGY_ARITY = {"S1": 2, "S2": 2, "S3": 3, "S4": 3}


def certify(p: HammersteinProblem, strategy: str, rho_list: Sequence[float]) -> Certificate:
    """Evaluate a combination strategy:

    S1: index0 at rho1, index1 at rho2,  rho2 > b(rho1)   -> one solution
    S2: index1 at rho1, index0 at rho2,  rho2 > c(rho1)   -> one solution
    S3: index0/index1/index0 at rho1<rho2<rho3, rho2 > b(rho1), rho3 > c(rho2) -> two
    S4: index1/index0/index1, rho2 > c(rho1), rho3 > b(rho2) -> two

    The conclusion is "not-established" unless every gap check and every
    index verdict holds.
    """
    strategy = strategy.upper()
    if strategy not in _STRATEGY_ARITY:
        raise InvalidParameterError(f"unknown strategy {strategy!r}")
    rho = [float(r) for r in rho_list]
    if len(rho) != _STRATEGY_ARITY[strategy]:
        raise InvalidParameterError(
            f"strategy {strategy} needs {_STRATEGY_ARITY[strategy]} levels, got {len(rho)}"
        )
    if any(r <= 0.0 for r in rho):
        raise InvalidParameterError("all levels must be positive")

    gaps: list[GapCheck] = []
    verdicts: list[IndexVerdict] = []
    local: list[str] = []

    def gap(kind: str, hi: float, lo: float) -> None:
        value = growth_b(p.cone, lo) if kind == "b" else growth_c(p.cone, lo)
        gaps.append(
            GapCheck(
                description=f"rho={hi:g} > {kind}(rho={lo:g}) = {value:g}",
                lhs=hi, rhs=value, passed=hi > value,
            )
        )

    if strategy == "S1":
        gap("b", rho[1], rho[0])
        verdicts += [check_index0(p, rho[0]), check_index1(p, rho[1])]
        local.append(_annulus("beta", rho[1], "gamma", rho[0]))
        target = "one-solution"
    elif strategy == "S2":
        gap("c", rho[1], rho[0])
        verdicts += [check_index1(p, rho[0]), check_index0(p, rho[1])]
        local.append(_annulus("gamma", rho[1], "beta", rho[0]))
        target = "one-solution"
    elif strategy == "S3":
        gap("b", rho[1], rho[0])
        gap("c", rho[2], rho[1])
        verdicts += [check_index0(p, rho[0]), check_index1(p, rho[1]), check_index0(p, rho[2])]
        local.append(_annulus("beta", rho[1], "gamma", rho[0]))
        local.append(_annulus("gamma", rho[2], "beta", rho[1]))
        target = "two-solutions"
    else:
        gap("c", rho[1], rho[0])
        gap("b", rho[2], rho[1])
        verdicts += [check_index1(p, rho[0]), check_index0(p, rho[1]), check_index1(p, rho[2])]
        local.append(_annulus("gamma", rho[1], "beta", rho[0]))
        local.append(_annulus("beta", rho[2], "gamma", rho[1]))
        target = "two-solutions"

    ok = all(gc.passed for gc in gaps) and all(v.holds for v in verdicts)
    return Certificate(
        strategy=strategy,
        levels=tuple(rho),
        gap_checks=tuple(gaps),
        verdicts=tuple(verdicts),
        conclusion=target if ok else "not-established",
        localization=tuple(local),
    )
