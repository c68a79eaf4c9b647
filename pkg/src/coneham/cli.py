"""Command-line interface: verify hypotheses, certify existence, solve.

Subcommands (exit code 0 on success/holds, 1 on fail/not-established, 2 on
usage errors):

* ``verify <file>``   -- run the structural checks C1..C8 and print a table
* ``certify <file>``  -- evaluate the index conditions and the strategy
* ``solve <file>``    -- Picard iteration, localization against the levels,
  and the shooting-method cross-check when the problem supports it
* ``reproduce-paper-example`` -- run the shipped reference problem
  end-to-end and diff every constant against its stored expected value
* ``functional-check <label>`` -- randomized axiom report for a built-in

``--json PATH`` writes a machine report carrying every number of the human
report at full precision (the human table rounds to 12 significant digits).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import functionals
from .cones import verify_growth
from .errors import ConehamError
from .grid import build_quadrature
from .hammerstein import (
    Certificate,
    HammersteinProblem,
    certify,
    check_C4,
    check_C5_C6,
    check_C7,
    check_index0,
    check_index1,
)
from .kernels import check_C1, check_C2_C3
from .problems import ProblemFile, build_problem, parse_problem_file
from .solver import cross_validate, localize, picard_solve, shooting_oracle

SEED_ENV_VAR = "CONEHAM_SEED"
CROSS_VALIDATION_TOL = 1e-6


def _fmt(x: float) -> str:
    return f"{x:.12g}"


class _Report:
    """Accumulates the human-readable lines and the machine document."""

    def __init__(self, quiet: bool):
        self.quiet = quiet
        self.doc: dict = {}

    def say(self, line: str = "") -> None:
        if not self.quiet:
            print(line)


def _emit_json(report: _Report, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(report.doc, fh, indent=2)
            fh.write("\n")


def _load_problem(args, report: _Report) -> tuple[ProblemFile, HammersteinProblem]:
    with open(args.problem_file) as fh:
        pf = parse_problem_file(fh.read())
    problem = build_problem(pf, n=args.grid, rule=args.rule)
    report.doc["problem_file"] = args.problem_file
    report.doc["grid"] = {"rule": problem.q.rule_id, "n": problem.q.n}
    return pf, problem


def _verdict_doc(v) -> dict:
    return {
        "kind": v.kind,
        "rho": v.rho,
        "level_constant": v.level_constant,
        "psi_integral": v.psi_integral,
        "product": v.product,
        "margin": v.margin,
        "holds": v.holds,
        "status": v.status,
        "note": v.note,
    }


def _print_verdict(report: _Report, v) -> None:
    name = "(I1)" if v.kind == "index1" else "(I0)"
    rel = "<" if v.kind == "index1" else ">"
    report.say(
        f"  {name} at rho={_fmt(v.rho)}: level constant {_fmt(v.level_constant)}"
        f" x psi integral {_fmt(v.psi_integral)} = {_fmt(v.product)} {rel} 1 : {v.status}"
    )
    if v.note:
        report.say(f"       note: {v.note}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    report = _Report(args.quiet)
    pf, p = _load_problem(args, report)
    seed = args.seed
    trials = args.trials

    c1 = check_C1(p.kernel)
    c23 = check_C2_C3(p.kernel, p.g, p.cone.alpha, p.q)
    c4 = check_C4(p, r_list=(0.5, 1.0, 2.0))
    c56 = check_C5_C6(p, n_samples=trials, seed=seed)
    c7 = check_C7(p)
    try:
        growth = verify_growth(p.q, p.cone, p.beta, p.gamma, trials=trials, seed=seed)
        c8_passed: bool | None = growth.passed
        c8_doc: dict = dataclasses.asdict(growth)
    except ConehamError as exc:
        growth = None
        c8_passed = False
        c8_doc = {"error": str(exc)}

    rows = [
        ("C1 kernel continuity", c1.passed if c1.certified else None,
         "certified via derivative bound" if c1.certified else "modulus table only"),
        ("C2 psi_alpha >= 0", c23.c2_passed, f"min psi_alpha = {_fmt(c23.psi_min)}"),
        ("C3 weight g", c23.c3_passed, f"min g = {_fmt(c23.g_min)}"),
        ("C4 nonlinearity", c4.passed,
         "sup f by radius: " + ", ".join(f"{r:g}:{_fmt(s)}" for r, s in c4.sup_by_r)),
        ("C5/C6 operator bounds", c56.passed,
         f"worst margins a/b/g = {_fmt(c56.worst_alpha_margin)}/"
         f"{_fmt(c56.worst_beta_margin)}/{_fmt(c56.worst_gamma_margin)}"),
        ("C7 reference element", c7.passed,
         f"membership {c7.membership_verdict}, gamma(e) = {_fmt(c7.gamma_e)}"),
        ("C8 growth maps", c8_passed,
         f"worst margin = {_fmt(growth.worst_margin)}" if growth else c8_doc.get("error", "")),
    ]
    report.say(f"hypothesis checks for {args.problem_file} (n={p.q.n}, {p.q.rule_id}):")
    all_pass = True
    for name, passed, detail in rows:
        if passed is None:
            tag = "info"
        else:
            tag = "pass" if passed else "FAIL"
            all_pass = all_pass and passed
        report.say(f"  [{tag:4}] {name:24} {detail}")

    report.doc["command"] = "verify"
    report.doc["conditions"] = {
        "C1": {"certified": c1.certified, "passed": c1.passed, "modulus": list(c1.table)},
        "C2_C3": dataclasses.asdict(c23),
        "C4": dataclasses.asdict(c4),
        "C5_C6": dataclasses.asdict(c56),
        "C7": dataclasses.asdict(c7),
        "C8": c8_doc,
    }
    report.doc["all_passed"] = all_pass
    _emit_json(report, args.json)
    return 0 if all_pass else 1


def cmd_certify(args) -> int:
    report = _Report(args.quiet)
    pf, p = _load_problem(args, report)
    if pf.strategy is None or not pf.rho:
        report.say("problem file has no [levels] strategy/rho; nothing to certify")
        return 2
    cert = certify(p, pf.strategy, pf.rho)
    _print_certificate(report, cert)
    report.doc["command"] = "certify"
    report.doc["certificate"] = _certificate_doc(cert)
    _emit_json(report, args.json)
    return 0 if cert.established else 1


def _certificate_doc(cert: Certificate) -> dict:
    return {
        "strategy": cert.strategy,
        "levels": list(cert.levels),
        "gap_checks": [dataclasses.asdict(gc) for gc in cert.gap_checks],
        "verdicts": [_verdict_doc(v) for v in cert.verdicts],
        "conclusion": cert.conclusion,
        "localization": list(cert.localization),
    }


def _print_certificate(report: _Report, cert: Certificate) -> None:
    report.say(f"strategy {cert.strategy} at levels {', '.join(_fmt(r) for r in cert.levels)}")
    for gc in cert.gap_checks:
        report.say(f"  gap: {gc.description} : {'pass' if gc.passed else 'FAIL'}")
    for v in cert.verdicts:
        _print_verdict(report, v)
    report.say(f"conclusion: {cert.conclusion}")
    for ann in cert.localization:
        report.say(f"  solution localized in {ann}")


def cmd_solve(args) -> int:
    report = _Report(args.quiet)
    pf, p = _load_problem(args, report)
    tol = args.tol if args.tol is not None else pf.tolerances["solve"]
    sol = picard_solve(p, tol=tol, max_iter=args.max_iter)
    report.say(
        f"picard: converged={sol.converged} iterations={sol.iterations} "
        f"residual_sup={_fmt(sol.residual_sup)}"
    )
    report.doc["command"] = "solve"
    report.doc["solution"] = {
        "converged": sol.converged,
        "iterations": sol.iterations,
        "residual_sup": sol.residual_sup,
        "values": sol.u.values.tolist(),
    }
    ok = sol.converged

    if pf.rho and pf.strategy in (None, "S1", "S3"):
        rho1, rho2 = pf.rho[0], pf.rho[1] if len(pf.rho) > 1 else pf.rho[0]
        loc = localize(p, sol, rho1, rho2)
        report.say(
            f"localization: alpha(u)={_fmt(loc.alpha_margin)} beta(u)={_fmt(loc.beta_value)}"
            f" gamma(u)={_fmt(loc.gamma_value)} in_annulus={loc.in_annulus}"
        )
        report.doc["localization"] = dataclasses.asdict(loc)
        ok = ok and loc.in_annulus
    elif pf.rho:
        # S2/S4 invert the roles of the levels; report values without a verdict
        report.say(
            f"functional values: alpha(u)={_fmt(p.cone.alpha(p.q, sol.u))} "
            f"beta(u)={_fmt(p.beta(p.q, sol.u))} gamma(u)={_fmt(p.gamma(p.q, sol.u))}"
        )

    try:
        oracle_u = shooting_oracle(p)
        cv = cross_validate(sol, oracle_u, tol=args.cross_tol)
        report.say(
            f"shooting oracle: sup difference {_fmt(cv.sup_diff)} "
            f"(tolerance {_fmt(cv.tol)}) : {'pass' if cv.passed else 'FAIL'}"
        )
        report.doc["cross_validation"] = dataclasses.asdict(cv)
        ok = ok and cv.passed
    except ConehamError as exc:
        report.say(f"shooting oracle unavailable: {exc}")
        report.doc["cross_validation"] = {"available": False, "reason": str(exc)}

    _emit_json(report, args.json)
    return 0 if ok else 1


def cmd_functional_check(args) -> int:
    report = _Report(args.quiet)
    q = build_quadrature(args.rule or "trapezoid", args.grid or 201)
    try:
        alpha = functionals.default_functional(args.label, q)
    except ConehamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rep = functionals.check_axioms(q, alpha, trials=args.trials, seed=args.seed)
    report.say(f"axiom report for {args.label!r} ({rep.trials} trials, seed {rep.seed}):")
    report.say(f"  claimed: {sorted(rep.checked) or 'none'}")
    report.say(
        f"  violations: a1={rep.violations_a1} a2={rep.violations_a2} a4={rep.violations_a4}"
    )
    report.say(f"  worst margin: {_fmt(rep.worst_margin)}")
    report.say("  (randomized search: a clean pass is evidence, not proof)")
    report.doc["command"] = "functional-check"
    report.doc["report"] = {
        "label": args.label,
        "trials": rep.trials,
        "violations_a1": rep.violations_a1,
        "violations_a2": rep.violations_a2,
        "violations_a4": rep.violations_a4,
        "worst_margin": rep.worst_margin,
        "seed": rep.seed,
        "checked": sorted(rep.checked),
    }
    _emit_json(report, args.json)
    return 0 if rep.passed else 1


def packaged_problem_path() -> str:
    """Path of the shipped reference problem file."""
    return str(resources.files("coneham").joinpath("data/paper_sec4.problem"))


def reference_expectations() -> list[tuple[str, float, float]]:
    """(name, expected, tolerance) rows for the reference problem."""
    return [
        ("psi_beta_integral", 1.0 / (6.0 * math.sqrt(3.0)), 1e-6),
        ("psi_gamma_integral", 1.0 / 12.0, 1e-8),
        ("psi_alpha_sup", 0.0, 1e-9),
        ("f_lower(0.05)", 800.0 / 41.0, 1e-6),
        ("index0_product", 200.0 / 123.0, 1e-6),
        ("f_upper(0.5)", 2.0, 1e-9),
        ("index1_product", 1.0 / (3.0 * math.sqrt(3.0)), 1e-6),
    ]


def cmd_reproduce(args) -> int:
    report = _Report(args.quiet)
    path = packaged_problem_path()
    with open(path) as fh:
        pf = parse_problem_file(fh.read())
    p = build_problem(pf)

    rho1, rho2 = pf.rho
    v0 = check_index0(p, rho1)
    v1 = check_index1(p, rho2)
    psi_alpha_sup = float(np.max(np.abs(p.psi_alpha)))
    got = {
        "psi_beta_integral": p.psi_beta_integral.value,
        "psi_gamma_integral": p.psi_gamma_integral.value,
        "psi_alpha_sup": psi_alpha_sup,
        "f_lower(0.05)": v0.level_constant,
        "index0_product": v0.product,
        "f_upper(0.5)": v1.level_constant,
        "index1_product": v1.product,
    }

    report.say(f"reference problem: {path}")
    report.say(f"{'constant':22} {'computed':>18} {'expected':>18} {'diff':>12}  verdict")
    all_ok = True
    rows = []
    for name, want, tol in reference_expectations():
        have = got[name]
        diff = abs(have - want)
        ok = diff <= tol
        all_ok = all_ok and ok
        rows.append({"name": name, "computed": have, "expected": want,
                     "tolerance": tol, "ok": ok})
        report.say(f"{name:22} {_fmt(have):>18} {_fmt(want):>18} {diff:12.2e}  {'pass' if ok else 'FAIL'}")

    cert = certify(p, pf.strategy, pf.rho)
    cert_ok = cert.conclusion == "one-solution"
    all_ok = all_ok and cert_ok
    report.say(f"certificate conclusion: {cert.conclusion} ({'pass' if cert_ok else 'FAIL'})")
    for ann in cert.localization:
        report.say(f"  solution localized in {ann}")

    sol = picard_solve(p, tol=pf.tolerances["solve"], max_iter=50)
    loc = localize(p, sol, rho1, rho2)
    sol_ok = sol.converged and loc.in_annulus and loc.alpha_margin >= -1e-7
    all_ok = all_ok and sol_ok
    report.say(
        f"solve: converged={sol.converged} iterations={sol.iterations} "
        f"residual={_fmt(sol.residual_sup)} gamma(u)={_fmt(loc.gamma_value)} "
        f"beta(u)={_fmt(loc.beta_value)} in_annulus={loc.in_annulus} "
        f"({'pass' if sol_ok else 'FAIL'})"
    )

    oracle_u = shooting_oracle(p)
    cv = cross_validate(sol, oracle_u, tol=CROSS_VALIDATION_TOL)
    all_ok = all_ok and cv.passed
    report.say(
        f"oracle: sup difference {_fmt(cv.sup_diff)} <= {_fmt(cv.tol)} "
        f"({'pass' if cv.passed else 'FAIL'})"
    )

    report.doc["command"] = "reproduce-paper-example"
    report.doc["constants"] = rows
    report.doc["certificate"] = _certificate_doc(cert)
    report.doc["solution"] = {
        "converged": sol.converged,
        "iterations": sol.iterations,
        "residual_sup": sol.residual_sup,
        "localization": dataclasses.asdict(loc),
    }
    report.doc["cross_validation"] = dataclasses.asdict(cv)
    report.doc["all_passed"] = all_ok
    _emit_json(report, args.json)
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=None, metavar="N",
                        help="override the grid size of the problem file")
    common.add_argument("--rule", choices=["trapezoid", "gauss"], default=None,
                        help="override the quadrature rule")
    common.add_argument("--tol", type=float, default=None,
                        help="override the solve tolerance")
    common.add_argument("--seed", type=int,
                        default=int(os.environ.get(SEED_ENV_VAR, "0")),
                        help=f"seed for randomized checks (default ${SEED_ENV_VAR} or 0)")
    common.add_argument("--trials", type=int, default=1000,
                        help="sample count for randomized checks")
    common.add_argument("--json", metavar="PATH", default=None,
                        help="write the machine-readable report to PATH")
    common.add_argument("--quiet", action="store_true",
                        help="suppress the human-readable report")

    parser = argparse.ArgumentParser(
        prog="coneham",
        description="cone-functional certificates and solvers for Hammerstein equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", parents=[common], help="run the hypothesis checks C1..C8")
    pv.add_argument("problem_file")
    pv.set_defaults(fn=cmd_verify)

    pc = sub.add_parser("certify", parents=[common], help="evaluate the index conditions")
    pc.add_argument("problem_file")
    pc.set_defaults(fn=cmd_certify)

    ps = sub.add_parser("solve", parents=[common], help="Picard solve + localization + oracle")
    ps.add_argument("problem_file")
    ps.add_argument("--max-iter", type=int, default=200)
    ps.add_argument("--cross-tol", type=float, default=CROSS_VALIDATION_TOL,
                    help="sup-norm tolerance for the oracle cross-check")
    ps.set_defaults(fn=cmd_solve)

    pr = sub.add_parser("reproduce-paper-example", parents=[common],
                        help="run the shipped reference problem and diff its constants")
    pr.set_defaults(fn=cmd_reproduce)

    pf = sub.add_parser("functional-check", parents=[common],
                        help="randomized axiom report for a built-in functional")
    pf.add_argument("label")
    pf.set_defaults(fn=cmd_functional_check)
    return parser


def run_command(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ConehamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
