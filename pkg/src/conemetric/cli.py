"""Command-line front end.

Exit codes: 0 success, 1 axiom/validation failure, 2 input error,
3 solver error or a solve that did not converge.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .cone import Cone
from .cone_metric import (
    AxiomReport,
    FiniteConeSpace,
    all_pass,
    example_space_path,
    load_space,
    reduce,
    validate_cms,
    validate_rcms,
)
from .errors import ConeMetricError, InputError, SolverError
from .formats import validate_document
from .scalarization import ScalarizationContext
from .solver import AffineMap, FiniteTableMap, MapSpec, SolveConfig, banach_solve, kannan_solve, write_trace_csv

EXIT_OK, EXIT_AXIOM, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

BUILTIN_PREFIX = "builtin:"
BUILTINS = {"branciari_akbar": example_space_path}


def _parse_csv(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()], dtype=float)
    except ValueError:
        raise InputError(f"cannot parse {text!r} as comma-separated numbers") from None


def _read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _space(arg: str, strict: bool = True) -> FiniteConeSpace:
    if arg.startswith(BUILTIN_PREFIX):
        name = arg[len(BUILTIN_PREFIX):]
        if name not in BUILTINS:
            raise InputError(f"unknown builtin space {name!r}; known: {sorted(BUILTINS)}")
        return load_space(BUILTINS[name](), strict=strict)
    return load_space(arg, strict=strict)


def _cone(arg: str) -> Cone:
    text = arg.strip()
    obj = json.loads(text) if text.startswith("{") else _read_json(text)
    validate_document(obj, "cone")
    return Cone.from_json(obj)


def _ctx(cone: Cone, e: str | None) -> ScalarizationContext:
    if e is None:
        return ScalarizationContext(cone)
    return ScalarizationContext(cone, tuple(_parse_csv(e)))


def load_map(obj: dict[str, Any], space: FiniteConeSpace | None) -> MapSpec:
    validate_document(obj, "map")
    if obj["type"] == "finite_table":
        if space is None:
            raise InputError("finite_table maps need --space")
        return FiniteTableMap.from_labels(space, obj["targets"])
    box = obj.get("box")
    return AffineMap(obj["A"], obj["b"], grid=obj.get("grid"), box=tuple(box) if box else None)


def _format_vec(v: Sequence[float]) -> str:
    return "(" + ", ".join(f"{x:.12g}" for x in v) + ")"


def _print_reports(reports: list[AxiomReport]) -> None:
    for rep in reports:
        print(f"{rep.axiom} {rep.status.upper()}")
        for w in rep.witnesses:
            pts = "(" + ", ".join(w.points) + ")"
            if w.rhs is None:
                print(f"  witness {pts}: {_format_vec(w.lhs)}")
            else:
                print(f"  witness {pts}: {_format_vec(w.lhs)} not <= {_format_vec(w.rhs)}")


# subcommands ---------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    space = _space(args.space, strict=not args.lenient)
    reports: list[AxiomReport] = []
    if args.mode in ("cms", "both"):
        reports += validate_cms(space)
    if args.mode in ("rcms", "both"):
        reports += validate_rcms(space)
    if args.json:
        print(json.dumps([r.to_json() for r in reports], indent=2))
    else:
        _print_reports(reports)
    return EXIT_OK if all_pass(reports) else EXIT_AXIOM


def cmd_scalarize(args: argparse.Namespace) -> int:
    ctx = _ctx(_cone(args.cone), args.e)
    value = ctx.xi(_parse_csv(args.y)) + 0.0
    print(f"{value:.12g}")
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    space = _space(args.space)
    ctx = _ctx(space.cone, args.e)
    table = reduce(space, ctx)
    doc = {"labels": list(space.labels), "e": list(ctx.e), "table": table.tolist()}
    text = json.dumps(doc, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    space = _space(args.space) if args.space else None
    T = load_map(_read_json(args.map), space)
    x0: Any = args.x0 if T.finite else _parse_csv(args.x0)
    cfg = SolveConfig(
        x0=x0,
        max_iter=args.max_iter,
        tol=args.tol,
        beta_samples=args.beta_samples,
        ctx=_ctx(T.cone, args.e),
        seed=args.seed,
        unsound=args.unsound,
    )
    T.resolve_point(x0)  # fail early on unknown labels
    if args.mode == "banach":
        report = banach_solve(T, cfg)
    else:
        report = kannan_solve(T, cfg)
    if args.trace:
        write_trace_csv(report, args.trace)
    print(json.dumps(report.to_json(), indent=2))
    if not report.converged:
        print(f"solve finished with outcome {report.outcome}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conemetric",
        description="Cone metric validation, scalarization and Kannan fixed-point solving.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check cone metric / rectangular axioms of a finite space")
    p.add_argument("--space", required=True, help=f"space JSON file, or {BUILTIN_PREFIX}NAME")
    p.add_argument("--mode", choices=("cms", "rcms", "both"), default="both")
    p.add_argument("--json", action="store_true", help="emit reports as JSON")
    p.add_argument("--lenient", action="store_true", help="do not reject asymmetric tables at load time")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("scalarize", help="evaluate the nonlinear scalarization xi_e(y)")
    p.add_argument("--cone", required=True, help="cone JSON (inline) or path to a cone JSON file")
    p.add_argument("--e", help="interior direction, comma-separated (default: canonical interior point)")
    p.add_argument("--y", required=True, help="vector, comma-separated")
    p.set_defaults(func=cmd_scalarize)

    p = sub.add_parser("reduce", help="write the scalar table xi_e(p(x, y)) as JSON")
    p.add_argument("--space", required=True)
    p.add_argument("--e")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="run a Kannan or Banach fixed-point solve")
    p.add_argument("--space", help="space JSON file (required for finite_table maps)")
    p.add_argument("--map", required=True, help="map JSON file")
    p.add_argument("--x0", required=True, help="start label (finite) or comma-separated vector (affine)")
    p.add_argument("--e")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--beta-samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--mode", choices=("kannan", "banach"), default="kannan")
    p.add_argument("--unsound", action="store_true", help="iterate even if the map is not certified")
    p.add_argument("--trace", help="write a per-iteration CSV trace to this path")
    p.set_defaults(func=cmd_solve)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConeMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main() -> None:
    sys.exit(run())
