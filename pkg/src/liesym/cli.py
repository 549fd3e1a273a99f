"""Command-line interface.

Every subcommand prints a JSON report (stdout, or ``--output`` for most
commands; ``residual-grid`` sends the CSV field to ``--output`` and the
JSON summary to stdout).  Exit codes: 0 when the checked property is
verified, 1 when it is refuted or inconclusive, 2 on usage errors.
Reports are deterministic for a fixed seed; the timestamp field sits on
its own line so two runs can be compared modulo that line.  The
environment variable LIESYM_SEED, when set, overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
from datetime import datetime, timezone
from fractions import Fraction

from . import __version__
from .errors import LiesymError
from .expr import SampleSpec, equiv_numeric, eval_at, is_zero, to_text
from .family import (
    NAMED_FIELDS,
    PRESETS,
    build_instance,
    check_onshell_symmetry,
    exceptional_exponents,
)
from .orbits import (
    GridSpec,
    ResidualField,
    base_solution,
    conformal_factor,
    family_solution,
    map_point,
    region,
    residual_grid,
    transform_solution,
)
from .reduction import (
    candidate_profile,
    reduce_to_invariant,
    split_by_x2,
    verify_ode,
    weak_cs_report,
)

CSV_HEADER = ("x", "y", "in_domain", "u", "residual")


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def emit_csv(field: ResidualField, sink) -> None:
    """Write a residual field as CSV, row-major by y then x; masked nodes
    leave u and residual empty."""
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for node in field.nodes:
        if node.in_domain:
            writer.writerow((_fmt(node.x), _fmt(node.y), "1",
                             _fmt(node.u), _fmt(node.residual)))
        else:
            writer.writerow((_fmt(node.x), _fmt(node.y), "0", "", ""))


def read_csv_sup_norm(source) -> float | None:
    """Recompute the sup-norm from an emitted CSV stream."""
    reader = csv.reader(source)
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    sup = None
    for row in reader:
        if row[2] == "1":
            r = abs(float(row[4]))
            if sup is None or r > sup:
                sup = r
    return sup


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _print_report(report: dict, out, path: str | None) -> None:
    report["timestamp"] = _timestamp()
    text = json.dumps(report, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        out.write(text + "\n")


def _decimal(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}")


def _instance_from_args(args) -> tuple[object, str]:
    if args.preset:
        try:
            return PRESETS[args.preset](), args.preset
        except KeyError:
            raise argparse.ArgumentTypeError(f"unknown preset {args.preset!r}")
    required = ("a", "r", "c1", "c2", "gamma1", "gamma2")
    missing = [name for name in required if getattr(args, name) is None]
    if missing:
        raise argparse.ArgumentTypeError(
            f"--preset or all of {', '.join('--' + m for m in missing)} required")
    return build_instance(args.a, args.r, args.c1, args.c2,
                          args.gamma1, args.gamma2), "custom"


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    for name in ("a", "r", "c1", "c2", "gamma1", "gamma2"):
        p.add_argument(f"--{name}", type=_decimal, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liesym",
        description="Verification pipelines for the exceptional symmetry "
                    "of the quasi-linear residual family.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", help="exceptional exponent pair for (a, r)")
    p.add_argument("--a", type=_decimal, required=True)
    p.add_argument("--r", type=_decimal, required=True)
    _common_flags(p)

    p = sub.add_parser("check-symmetry", help="on-shell symmetry verdict")
    _add_instance_flags(p)
    p.add_argument("--field", choices=sorted(NAMED_FIELDS), default="X")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9)
    _common_flags(p)

    p = sub.add_parser("transform", help="finite group action on the power solution")
    p.add_argument("--a", type=_decimal, default=Fraction(-1))
    p.add_argument("--lambda", dest="lam", type=_decimal, required=True)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--y", type=float, default=None)
    p.add_argument("--samples", type=int, default=64)
    _common_flags(p)

    p = sub.add_parser("residual-grid", help="residual of a closed-form solution on a grid")
    _add_instance_flags(p)
    p.add_argument("--solution", choices=("base", "family"), default="base")
    p.add_argument("--lambda", dest="lam", type=_decimal, default=Fraction(1))
    p.add_argument("--x-min", type=float, default=None)
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--y-min", type=float, default=None)
    p.add_argument("--y-max", type=float, default=None)
    p.add_argument("--nx", type=int, default=50)
    p.add_argument("--ny", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-9)
    _common_flags(p)

    p = sub.add_parser("region", help="two-disk validity region geometry")
    p.add_argument("--lambda", dest="lam", type=_decimal, required=True)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--y", type=float, default=None)
    p.add_argument("--samples", type=int, default=0,
                   help="check the algebraic membership against the disk "
                        "description on this many random points")
    _common_flags(p)

    p = sub.add_parser("reduce", help="invariant-variable reduction and ODE split")
    _add_instance_flags(p)
    _common_flags(p)

    p = sub.add_parser("weak-cs", help="weak conditional symmetry chain")
    _add_instance_flags(p)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--consequences", action="store_true",
                   help="also impose the differential consequences of the "
                        "invariance condition in the last stage")
    _common_flags(p)

    return parser


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--output", default=None)


def _effective_seed(args) -> int:
    env = os.environ.get("LIESYM_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _frac_fields(name: str, value: Fraction) -> dict:
    return {name: float(value), f"{name}_exact": str(value)}


def _cmd_exponents(args, out) -> int:
    c1, c2 = exceptional_exponents(args.a, args.r)
    report = {"command": "exponents"}
    report.update(_frac_fields("a", args.a))
    report.update(_frac_fields("r", args.r))
    report.update(_frac_fields("c1", c1))
    report.update(_frac_fields("c2", c2))
    _print_report(report, out, args.output)
    return 0


def _cmd_check_symmetry(args, out) -> int:
    inst, label = _instance_from_args(args)
    seed = _effective_seed(args)
    verdict = check_onshell_symmetry(
        NAMED_FIELDS[args.field](), inst,
        n_samples=args.samples, tol=args.tol, seed=seed)
    report = {
        "command": "check-symmetry",
        "instance": label,
        "parameters": {k: str(v) for k, v in inst.params().items()},
        "is_exceptional": inst.is_exceptional,
        "field": args.field,
        "samples": args.samples,
        "seed": seed,
        "tolerance": args.tol,
    }
    report.update(verdict.to_dict())
    _print_report(report, out, args.output)
    return 0 if verdict.admitted else 1


def _cmd_transform(args, out) -> int:
    seed = _effective_seed(args)
    lam = args.lam
    base = base_solution(args.a)
    pushed = transform_solution(base, lam)
    family = family_solution(args.a, lam)
    structural = pushed.expr == family.expr

    equiv_report = None
    if args.samples > 0 and float(lam) > 0:
        geo = region(float(lam))
        spec = SampleSpec(
            count=args.samples, rel_tol=1e-12, seed=seed,
            intervals={
                "x": (geo.center2[0] - geo.radius, geo.center1[0] + geo.radius),
                "y": (geo.center1[1] - geo.radius, geo.center1[1] + geo.radius),
            },
            accept=lambda env: geo.membership(env["x"], env["y"]),
        )
        res = equiv_numeric(pushed.expr, family.expr, spec)
        equiv_report = {"equivalent": res.equivalent, "samples": res.samples}

    report = {
        "command": "transform",
        "a": str(args.a),
        "lambda": str(lam),
        "seed": seed,
        "transformed_expr": to_text(pushed.expr),
        "family_expr": to_text(family.expr),
        "structural_match": structural,
        "equiv": equiv_report,
    }
    if args.x is not None and args.y is not None:
        c = conformal_factor(args.x, args.y, float(lam))
        mapped = map_point(args.x, args.y, float(lam)) if c != 0.0 else None
        in_dom = pushed.domain(args.x, args.y)
        point = {
            "x": args.x, "y": args.y, "C": c,
            "mapped": list(mapped) if mapped else None,
            "in_domain": in_dom,
        }
        if in_dom:
            point["u"] = eval_at(pushed.expr, {"x": args.x, "y": args.y})
        report["point"] = point
    _print_report(report, out, args.output)
    ok = structural and (equiv_report is None or equiv_report["equivalent"])
    return 0 if ok else 1


def _default_grid(args, solution_kind: str, lam: float) -> GridSpec:
    if None not in (args.x_min, args.x_max, args.y_min, args.y_max):
        return GridSpec(args.x_min, args.x_max, args.y_min, args.y_max,
                        args.nx, args.ny)
    if solution_kind == "base":
        return GridSpec(1.0, 2.0, -0.5, 0.5, args.nx, args.ny)
    geo = region(lam)
    return GridSpec(
        geo.center2[0] - geo.radius, geo.center1[0] + geo.radius,
        geo.center1[1] - geo.radius, geo.center1[1] + geo.radius,
        args.nx, args.ny)


def _cmd_residual_grid(args, out) -> int:
    inst, label = _instance_from_args(args)
    lam = float(args.lam)
    if args.solution == "base":
        sol = base_solution(inst.a)
    else:
        sol = family_solution(inst.a, args.lam)
    grid = _default_grid(args, args.solution, lam)
    field = residual_grid(inst, sol, grid)

    report = {
        "command": "residual-grid",
        "instance": label,
        "parameters": {k: str(v) for k, v in inst.params().items()},
        "solution": sol.label,
        "grid": {
            "x_min": grid.x_min, "x_max": grid.x_max,
            "y_min": grid.y_min, "y_max": grid.y_max,
            "nx": grid.nx, "ny": grid.ny,
        },
        "in_domain_nodes": field.n_in_domain,
        "sup_residual": field.sup_norm,
        "tolerance": args.tol,
        "within_tolerance": field.sup_norm is not None and field.sup_norm <= args.tol,
        "csv_path": args.output,
    }
    if args.output:
        with open(args.output, "w") as fh:
            emit_csv(field, fh)
        _print_report(report, out, None)
    else:
        emit_csv(field, out)
        _print_report(report, out, None)
    return 0 if report["within_tolerance"] else 1


def _cmd_region(args, out) -> int:
    lam = float(args.lam)
    geo = region(lam)
    report = {
        "command": "region",
        "lambda": str(args.lam),
        "center1": list(geo.center1),
        "center2": list(geo.center2),
        "radius": geo.radius,
    }
    ok = True
    if args.x is not None and args.y is not None:
        report["point"] = {
            "x": args.x, "y": args.y,
            "member": geo.membership(args.x, args.y),
        }
    if args.samples > 0:
        rng = random.Random(_effective_seed(args))
        span = 1.2 * (geo.center1[0] + geo.radius)
        mismatches = 0
        for _ in range(args.samples):
            x = rng.uniform(-span, span)
            y = rng.uniform(geo.center1[1] - 1.2 * geo.radius,
                            geo.center1[1] + 1.2 * geo.radius)
            if geo.membership(x, y) != geo.xor_disks(x, y):
                mismatches += 1
        report["xor_check"] = {"samples": args.samples, "mismatches": mismatches}
        ok = mismatches == 0
    _print_report(report, out, args.output)
    return 0 if ok else 1


def _cmd_reduce(args, out) -> int:
    inst, label = _instance_from_args(args)
    reduced = reduce_to_invariant(inst)
    ode_a, ode_b = split_by_x2(reduced)
    profile, g1, g2 = candidate_profile(inst.a)
    res_a = verify_ode(ode_a, profile)
    res_b = verify_ode(ode_b, profile)
    verified = is_zero(res_a) and is_zero(res_b)
    report = {
        "command": "reduce",
        "instance": label,
        "parameters": {k: str(v) for k, v in inst.params().items()},
        "reduced": to_text(reduced.expr),
        "ode_a": to_text(ode_a),
        "ode_b": to_text(ode_b),
        "profile": to_text(profile),
        "profile_gamma1": str(g1),
        "profile_gamma2": str(g2),
        "gammas_match_profile": (inst.gamma1 == g1 and inst.gamma2 == g2),
        "residual_a": to_text(res_a),
        "residual_b": to_text(res_b),
        "profile_solves_both": verified,
    }
    _print_report(report, out, args.output)
    return 0 if verified else 1


def _cmd_weak_cs(args, out) -> int:
    inst, label = _instance_from_args(args)
    seed = _effective_seed(args)
    rep = weak_cs_report(inst, n_samples=args.samples, seed=seed,
                         include_consequences=args.consequences)
    report = {
        "command": "weak-cs",
        "instance": label,
        "samples": args.samples,
        "seed": seed,
        "include_consequences": args.consequences,
    }
    report.update(rep.to_dict())
    _print_report(report, out, args.output)
    return 0 if rep.confirmed else 1


_HANDLERS = {
    "exponents": _cmd_exponents,
    "check-symmetry": _cmd_check_symmetry,
    "transform": _cmd_transform,
    "residual-grid": _cmd_residual_grid,
    "region": _cmd_region,
    "reduce": _cmd_reduce,
    "weak-cs": _cmd_weak_cs,
}


def run(argv: list[str], out=None, err=None) -> int:
    """Entry point used by both the console script and the tests."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    env_seed = os.environ.get("LIESYM_SEED")
    if env_seed is not None:
        try:
            int(env_seed)
        except ValueError:
            err.write(f"error: LIESYM_SEED must be an integer, got {env_seed!r}\n")
            return 2
    try:
        return _HANDLERS[args.command](args, out)
    except argparse.ArgumentTypeError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except LiesymError as exc:
        err.write(f"error: {exc}\n")
        return 1
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
