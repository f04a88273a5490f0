"""Command-line interface: scenario runner, twist checks, ad hoc star
products/projections/curvature tables, deformed-Gauss verification, and a
parse-eval-print loop over the expression grammar."""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from .expr import (ExprTypeError, ParseError, evaluate, format_value,
                   parse_expression)
from .fields import PForm, VectorField
from .geometry import CurvatureData
from .levelset import LevelSetError
from .poly import Polynomial, RatFunc, ideal_reduce
from .scenario import (Report, ScenarioError, ScenarioRunner, emit_report,
                       parse_scenario, run_scenario_file)
from .twisted import TwistedGeometryError


def _shipped_scenario_path(name):
    base = resources.files("twistfold").joinpath("scenarios")
    cand = base.joinpath(name if name.endswith(".tfs") else name + ".tfs")
    return cand


def _load_runner(setup_arg, order=None, seed=None):
    path = setup_arg
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError:
        cand = _shipped_scenario_path(setup_arg)
        try:
            text = cand.read_text(encoding="utf-8")
        except OSError:
            raise ScenarioError(f"cannot read scenario {setup_arg!r}")
    setup, checks = parse_scenario(text)
    if order is not None:
        setup["order"] = order
    if seed is not None:
        setup["seed"] = seed
    return ScenarioRunner(setup), checks


def cmd_run(args):
    runner, checks = _load_runner(args.scenario, args.order, args.seed)
    report = runner.run(checks)
    sys.stdout.write(emit_report(report, args.format))
    return 0 if report.passed else 1


def cmd_check_twist(args):
    runner, _ = _load_runner(args.setup, args.order, args.seed)
    report = Report(runner.setup["name"])
    from .scenario import CHECKS
    ok, resid, note = CHECKS["twist-axioms"](runner, [],
                                             {"degree": str(args.degree)},
                                             None)
    report.add("twist-axioms", ok, resid, note)
    if runner.gens.star is not None:
        got = runner.twist.is_unitary()
        report.add("unitarity", True, "0", f"unitary={got}")
        real = runner.twist.is_real()
        report.add("reality", True, "0", f"real={real}")
    sys.stdout.write(emit_report(report, args.format))
    return 0 if report.passed else 1


def cmd_star(args):
    runner, _ = _load_runner(args.setup, args.order, args.seed)
    a = evaluate(parse_expression(args.lhs), runner.env)
    b = evaluate(parse_expression(args.rhs), runner.env)
    if isinstance(a, PForm) and isinstance(b, PForm):
        out = runner.ctx.star_wedge(a, b)
    else:
        out = runner.ctx.star(a, b)
    sys.stdout.write(format_value(out) + "\n")
    return 0


def cmd_project(args):
    runner, _ = _load_runner(args.setup, args.order, args.seed)
    target = evaluate(parse_expression(args.expr), runner.env)
    ctx = runner.ctx if args.twisted else None
    out = runner.family.project(target, runner.metric, args.part,
                                star_context=ctx)
    sys.stdout.write(format_value(out) + "\n")
    return 0


def cmd_curvature(args):
    runner, _ = _load_runner(args.setup, args.order, args.seed)
    if not runner.frame:
        raise ScenarioError("setup declares no tangent frame")
    lines = []
    data = CurvatureData(runner.family, runner.metric, runner.frame)
    scalar = data.ricci_scalar()
    lines.append(f"ricci-scalar {format_value(scalar)}")
    try:
        pr = data.principal_curvatures()
        kap = ", ".join(format_value(kv) for kv in pr["kappas"])
        lines.append(f"principal [{kap}]")
        lines.append(f"gauss {format_value(pr['gauss'])}")
        lines.append(f"mean {format_value(pr['mean'])}")
    except Exception:
        lines.append("principal unavailable (no rational unit normal)")
    if args.twisted:
        conn = runner.connection()
        tscalar = conn.ricci_scalar_star(runner.frame)
        lines.append(f"twisted-ricci-scalar {format_value(tscalar)}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_verify_gauss(args):
    runner, _ = _load_runner(args.setup, args.order, args.seed)
    from .scenario import CHECKS
    report = Report(runner.setup["name"])
    ok, resid, note = CHECKS["gauss"](runner, [],
                                      {"samples": str(args.samples)}, None)
    report.add("gauss", ok, resid, note)
    sys.stdout.write(emit_report(report, args.format))
    return 0 if report.passed else 1


def cmd_repl(args):
    runner, _ = _load_runner(args.setup, args.order, args.seed)
    env = runner.env
    sys.stdout.write("twistfold repl; :q quits, NAME = EXPR defines\n")
    while True:
        try:
            line = input("tf> ")
        except EOFError:
            break
        line = line.strip()
        if not line:
            continue
        if line in (":q", ":quit", "quit", "exit"):
            break
        try:
            if "=" in line and "==" not in line and \
                    not line.startswith(("(", "-")) and \
                    line.split("=", 1)[0].strip().isidentifier():
                name, src = (s.strip() for s in line.split("=", 1))
                env.define(name, evaluate(parse_expression(src), env))
                sys.stdout.write(f"{name} defined\n")
                continue
            value = evaluate(parse_expression(line), env)
            sys.stdout.write(format_value(value) + "\n")
        except (ParseError, ExprTypeError, ScenarioError, LevelSetError,
                TwistedGeometryError) as exc:
            sys.stdout.write(f"error: {exc}\n")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=None,
                        help="deformation truncation order override")
    common.add_argument("--seed", type=int, default=None,
                        help="seed override for randomized checks")
    common.add_argument("--format", choices=("human", "structured"),
                        default="human")
    ap = argparse.ArgumentParser(
        prog="twistfold",
        description="exact star-product geometry on level-set submanifolds")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add_parser("run", help="run a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_run)

    p = add_parser("check-twist", help="twist axioms for a setup")
    p.add_argument("--setup", default="cylinder_abelian")
    p.add_argument("--degree", type=int, default=2)
    p.set_defaults(func=cmd_check_twist)

    p = add_parser("star", help="star-multiply two expressions")
    p.add_argument("lhs")
    p.add_argument("rhs")
    p.add_argument("--setup", default="cylinder_abelian")
    p.set_defaults(func=cmd_star)

    p = add_parser("project", help="tangent/normal projection")
    p.add_argument("expr")
    p.add_argument("--part", choices=("tangent", "normal"),
                   default="tangent")
    p.add_argument("--twisted", action="store_true")
    p.add_argument("--setup", default="cylinder_abelian")
    p.set_defaults(func=cmd_project)

    p = add_parser("curvature", help="curvature table on the frame")
    p.add_argument("--twisted", action="store_true")
    p.add_argument("--setup", default="cylinder_abelian")
    p.set_defaults(func=cmd_curvature)

    p = add_parser("verify-gauss", help="deformed Gauss residuals")
    p.add_argument("--samples", type=int, default=3)
    p.add_argument("--setup", default="cylinder_abelian")
    p.set_defaults(func=cmd_verify_gauss)

    p = add_parser("repl", help="parse-eval-print loop")
    p.add_argument("--setup", default="cylinder_abelian")
    p.set_defaults(func=cmd_repl)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ParseError, ExprTypeError, LevelSetError,
            TwistedGeometryError) as exc:
        sys.stderr.write(f"twistfold: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
