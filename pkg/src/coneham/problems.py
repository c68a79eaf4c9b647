"""Problem files: a line-oriented, diff-friendly description of one
Hammerstein problem.

Format: ``key = value`` lines under ``[section]`` headers; ``#`` starts a
comment.  Values that describe functions are expressions in the grammar of
:mod:`coneham.expressions` (kernels over t and s, weights over s, the
nonlinearity over t and v, reference elements over t).

Sections and keys::

    [kernel]        kernel = green_dirichlet | expr(<expression in t, s>)
                    g      = <expression in s>
    [nonlinearity]  f      = <expression in t, v>
    [cone]          cone   = concave_dirichlet | nonneg | custom(functional=<label>)
                    beta   = <functional label, optional (args)>
                    gamma  = <functional label, optional (args)>
                    e      = <expression in t>
    [grid]          rule   = trapezoid | gauss        (default trapezoid)
                    n      = <int>                    (default 201)
    [levels]        strategy = S1 | S2 | S3 | S4
                    rho      = <comma-separated positive reals>
    [tolerances]    solve = <float>   margin = <float>   membership = <float>

Functional labels with parameters use ``label(key=value; key=value)`` with
semicolons separating arguments (expression values may contain commas):
``min_window(a=0.25; b=0.75; c=0.5; sigma=1)``,
``stieltjes(h=exp(t)*v; density=1; atoms=0.5:1.0,0.25:2.0)``,
``family_inf(members=t | 1-t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cones, functionals, kernels
from .errors import ProblemFileError
from .expressions import evaluate, parse_expr, vars_used
from .grid import Quadrature, build_quadrature, grid_function
from .hammerstein import HammersteinProblem

DEFAULT_RULE = "trapezoid"
DEFAULT_N = 201
DEFAULT_TOLERANCES = {"solve": 1e-10, "margin": 1e-9, "membership": 1e-9}

_KNOWN_KEYS = {
    ("kernel", "kernel"),
    ("kernel", "g"),
    ("nonlinearity", "f"),
    ("cone", "cone"),
    ("cone", "beta"),
    ("cone", "gamma"),
    ("cone", "e"),
    ("grid", "rule"),
    ("grid", "n"),
    ("levels", "strategy"),
    ("levels", "rho"),
    ("tolerances", "solve"),
    ("tolerances", "margin"),
    ("tolerances", "membership"),
}

_REQUIRED = (
    ("kernel", "kernel"),
    ("kernel", "g"),
    ("nonlinearity", "f"),
    ("cone", "cone"),
    ("cone", "beta"),
    ("cone", "gamma"),
    ("cone", "e"),
)


@dataclass
class ProblemFile:
    kernel: str
    g: str
    f: str
    cone: str
    beta: str
    gamma: str
    e: str
    rule: str = DEFAULT_RULE
    n: int = DEFAULT_N
    strategy: str | None = None
    rho: tuple[float, ...] = ()
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))


def parse_problem_file(text: str) -> ProblemFile:
    entries: dict[tuple[str, str], str] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            continue
        if "=" not in line:
            raise ProblemFileError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if section is None:
            raise ProblemFileError(f"line {lineno}: key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        entry = (section, key.lower())
        if entry not in _KNOWN_KEYS:
            raise ProblemFileError(f"line {lineno}: unknown key {key!r} in section [{section}]")
        if entry in entries:
            raise ProblemFileError(f"line {lineno}: duplicate key {key!r}")
        entries[entry] = value

    for entry in _REQUIRED:
        if entry not in entries:
            raise ProblemFileError(f"missing required field: {entry[1]} (section [{entry[0]}])")

    pf = ProblemFile(
        kernel=entries[("kernel", "kernel")],
        g=entries[("kernel", "g")],
        f=entries[("nonlinearity", "f")],
        cone=entries[("cone", "cone")],
        beta=entries[("cone", "beta")],
        gamma=entries[("cone", "gamma")],
        e=entries[("cone", "e")],
    )
    if ("grid", "rule") in entries:
        pf.rule = entries[("grid", "rule")]
    if ("grid", "n") in entries:
        try:
            pf.n = int(entries[("grid", "n")])
        except ValueError:
            raise ProblemFileError(f"grid n must be an integer, got {entries[('grid', 'n')]!r}")
    if ("levels", "strategy") in entries:
        pf.strategy = entries[("levels", "strategy")].upper()
        if pf.strategy not in ("S1", "S2", "S3", "S4"):
            raise ProblemFileError(f"unknown strategy {pf.strategy!r}")
    if ("levels", "rho") in entries:
        try:
            pf.rho = tuple(float(x) for x in entries[("levels", "rho")].split(","))
        except ValueError:
            raise ProblemFileError(f"rho must be comma-separated reals, got {entries[('levels', 'rho')]!r}")
        if any(r <= 0 for r in pf.rho):
            raise ProblemFileError("all rho levels must be positive")
    for key in ("solve", "margin", "membership"):
        if ("tolerances", key) in entries:
            try:
                pf.tolerances[key] = float(entries[("tolerances", key)])
            except ValueError:
                raise ProblemFileError(f"tolerance {key} must be a real number")

    if pf.strategy is not None:
        want = 2 if pf.strategy in ("S1", "S2") else 3
        if len(pf.rho) != want:
            raise ProblemFileError(
                f"strategy {pf.strategy} needs {want} rho levels, got {len(pf.rho)}"
            )
    return pf


# ---------------------------------------------------------------------------
# label resolution
# ---------------------------------------------------------------------------


def _parse_expression(text: str, allowed_vars: set[str], what: str):
    try:
        ast = parse_expr(text)
    except Exception as exc:
        raise ProblemFileError(f"{what}: {exc}") from exc
    extra = vars_used(ast) - allowed_vars
    if extra:
        raise ProblemFileError(
            f"{what}: variable(s) {sorted(extra)} not allowed (allowed: {sorted(allowed_vars)})"
        )
    return ast


def _split_label(value: str) -> tuple[str, str | None]:
    value = value.strip()
    if "(" in value:
        if not value.endswith(")"):
            raise ProblemFileError(f"unbalanced parentheses in {value!r}")
        label, args = value.split("(", 1)
        return label.strip(), args[:-1]
    return value, None


def _parse_args(argtext: str, what: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for part in argtext.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ProblemFileError(f"{what}: arguments must be key=value, got {part!r}")
        k, v = (x.strip() for x in part.split("=", 1))
        out[k] = v
    return out


def resolve_functional(value: str, q: Quadrature) -> functionals.Functional:
    """Build a functional from a label with optional ``(key=value; ...)``
    arguments; unknown labels and malformed arguments raise named errors."""
    label, argtext = _split_label(value)
    args = _parse_args(argtext, f"functional {label}") if argtext else {}
    try:
        if label == "min_window":
            sigma = None
            if "sigma" in args:
                ast = _parse_expression(args["sigma"], {"t"}, "min_window sigma")
                sigma = grid_function(q, evaluate(ast, {"t": q.nodes}))
            return functionals.min_window(
                a=float(args.get("a", 0.25)),
                b=float(args.get("b", 0.75)),
                sigma=sigma,
                c=float(args.get("c", 0.5)),
            )
        if label == "stieltjes":
            h_ast = _parse_expression(args.get("h", "exp(t)*v"), {"t", "v"}, "stieltjes h")
            density = None
            if "density" in args:
                d_ast = _parse_expression(args["density"], {"t"}, "stieltjes density")
                density = grid_function(q, evaluate(d_ast, {"t": q.nodes}))
            atoms = []
            if "atoms" in args:
                for chunk in args["atoms"].split(","):
                    try:
                        t0, m = chunk.split(":")
                        atoms.append((float(t0), float(m)))
                    except ValueError:
                        raise ProblemFileError(f"stieltjes atoms must be t:mass pairs, got {chunk!r}")
            return functionals.stieltjes(
                h=lambda t, x: evaluate(h_ast, {"t": t, "v": x}), density=density, atoms=atoms
            )
        if label == "family_inf":
            members = []
            for text in args.get("members", "t | 1-t").split("|"):
                ast = _parse_expression(text.strip(), {"t"}, "family_inf member")
                members.append(grid_function(q, evaluate(ast, {"t": q.nodes})))
            return functionals.family_inf(members)
        if args:
            raise ProblemFileError(f"functional {label!r} takes no arguments")
        return functionals.default_functional(label, q)
    except ProblemFileError:
        raise
    except Exception as exc:
        raise ProblemFileError(f"cannot build functional {label!r}: {exc}") from exc


def resolve_cone(value: str, q: Quadrature) -> cones.ConeSpec:
    label, argtext = _split_label(value)
    if label == "concave_dirichlet":
        return cones.concave_dirichlet_cone()
    if label == "nonneg":
        return cones.nonneg_cone()
    if label == "custom":
        args = _parse_args(argtext or "", "cone custom")
        if "functional" not in args:
            raise ProblemFileError("custom cone needs functional=<label>")
        return cones.custom_cone(resolve_functional(args["functional"], q))
    raise ProblemFileError(f"unknown cone label {label!r}")


def resolve_kernel(value: str) -> kernels.Kernel:
    label, argtext = _split_label(value)
    if label == "green_dirichlet":
        if argtext:
            raise ProblemFileError("green_dirichlet takes no arguments")
        return kernels.green_dirichlet()
    if label == "expr":
        if argtext is None:
            raise ProblemFileError("expr kernel needs an expression: expr(...)")
        ast = _parse_expression(argtext, {"t", "s"}, "kernel expression")
        return kernels.expression_kernel(lambda t, s: np.asarray(evaluate(ast, {"t": t, "s": s}), dtype=float))
    raise ProblemFileError(f"unknown kernel label {label!r}")


def build_problem(pf: ProblemFile, n: int | None = None, rule: str | None = None) -> HammersteinProblem:
    """Materialize a parsed problem file on a quadrature grid.  ``n`` and
    ``rule`` override the file's grid section (the CLI flags use this)."""
    try:
        q = build_quadrature(rule or pf.rule, n or pf.n)
    except Exception as exc:
        raise ProblemFileError(f"bad grid: {exc}") from exc

    kernel = resolve_kernel(pf.kernel)
    g_ast = _parse_expression(pf.g, {"s"}, "weight g")
    f_ast = _parse_expression(pf.f, {"t", "v"}, "nonlinearity f")
    e_ast = _parse_expression(pf.e, {"t"}, "reference element e")

    def g_fn(s):
        out = np.asarray(evaluate(g_ast, {"s": s}), dtype=float)
        return np.full(np.shape(s), float(out)) if out.ndim == 0 else out

    cone = resolve_cone(pf.cone, q)
    return HammersteinProblem(
        kernel=kernel,
        g=grid_function(q, g_fn(q.nodes)),
        f=lambda t, v: evaluate(f_ast, {"t": t, "v": v}),
        cone=cone,
        beta=resolve_functional(pf.beta, q),
        gamma=resolve_functional(pf.gamma, q),
        e=grid_function(q, evaluate(e_ast, {"t": q.nodes})),
        q=q,
        g_fn=g_fn,
    )
