"""Command-line entry point.

Exit codes: 0 success, 1 ``verify`` found a failing check, 2 bad input
(unreadable or unparsable files or arguments, non-weak wind, points outside
the domain), 3 solver failure (no convergence, unreachable goal, step-size
underflow).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .affine_spray import affine_constants, affine_polynomials, affine_spray_eval
from .checks import run_suite
from .errors import (FieldNotWeak, GoalUnreachable, NoConvergence, ParseError, PointOutsideDomain,
                     StepSizeUnderflow, StrongWind, ZermeloError, ZeroVector)
from .fixtures import PROBLEMS
from .geodesic import Trajectory
from .navigator import NavigationProblem, solve_navigation
from .randers import zeta_spray
from .wind import AffineWind, Domain, affine_fit, load_wind_spec, validate_weak

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


def _num(v):
    """Round-trip a number through 15 significant digits."""
    return float(f"{float(v):.15g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _emit(doc, stream=None):
    (stream or sys.stdout).write(json.dumps(_clean(doc), indent=2) + "\n")


def _pair(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return np.array(vals)


def _rect(text):
    try:
        vals = [float(v) for v in text.split(",")]
        if len(vals) != 4:
            raise ValueError
        return Domain(*vals)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a,b,c,d with a<b and c<d, got {text!r}")


def cmd_plan(args):
    field = load_wind_spec(args.wind)
    problem = NavigationProblem(field, args.start, args.goal, goal_radius=args.goal_radius)
    sol = solve_navigation(problem)
    _emit(sol.summary())
    if args.out:
        fmt = args.format or ("json" if str(args.out).endswith(".json") else "csv")
        if fmt == "csv":
            text = sol.trajectory.to_csv()
        else:
            text = json.dumps(_clean({"summary": sol.summary(),
                                      "trajectory": sol.trajectory.to_json_dict()})) + "\n"
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_spray_dump(args):
    field = load_wind_spec(args.wind)
    x, y = args.at, args.dir
    doc = {"x": x, "y": y, "w": field.value(x), "zeta": zeta_spray(field, x, y)}
    if isinstance(field, AffineWind):
        k = affine_constants(field)
        doc["constants"] = k.as_dict()
        doc["polynomials"] = affine_polynomials(k, x).as_dict()
        doc["affine"] = affine_spray_eval(field, x, y, constants=k)
    _emit(doc)
    return EXIT_OK


def cmd_fit(args):
    field = load_wind_spec(args.wind)
    fitted, resid = affine_fit(field, args.rect, samples_per_axis=args.samples)
    report = validate_weak(fitted, strict=False)
    _emit({"c": fitted.c, "A": fitted.A, "rect": list(args.rect.bounds),
           "max_residual": resid, "max_norm": report.max_norm,
           "max_norm_at": list(report.location), "weak": report.passed})
    return EXIT_OK


def cmd_verify(args):
    problems = PROBLEMS
    if args.fixture:
        problems = [p for p in PROBLEMS if args.fixture in (p.name, p.field_name)]
        if not problems:
            raise ParseError(f"unknown fixture {args.fixture!r}")
    results = run_suite(args.seed, problems)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_export(args):
    text = Trajectory.read(args.traj).to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="zermelo",
                                     description="Time-optimal paths through planar drift fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve a start-to-goal problem")
    p.add_argument("--wind", required=True, help="wind spec JSON file")
    p.add_argument("--start", required=True, type=_pair, help="x1,x2")
    p.add_argument("--goal", required=True, type=_pair, help="x1,x2")
    p.add_argument("--goal-radius", type=float, default=1e-6)
    p.add_argument("--out", help="trajectory output file")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("spray-dump", help="spray coefficients at one phase point")
    p.add_argument("--wind", required=True)
    p.add_argument("--at", required=True, type=_pair, help="x1,x2")
    p.add_argument("--dir", required=True, type=_pair, help="y1,y2")
    p.set_defaults(func=cmd_spray_dump)

    p = sub.add_parser("fit", help="least-squares affine fit over a rectangle")
    p.add_argument("--wind", required=True)
    p.add_argument("--rect", required=True, type=_rect, help="x1min,x1max,x2min,x2max")
    p.add_argument("--samples", type=int, default=5, help="samples per axis")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="run the invariant suite on the bundled fixtures")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixture", help="restrict trajectory checks to one fixture")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="re-emit a stored trajectory as CSV")
    p.add_argument("--traj", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, FieldNotWeak, PointOutsideDomain, StrongWind, ZeroVector, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NoConvergence, GoalUnreachable, StepSizeUnderflow, ZermeloError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
