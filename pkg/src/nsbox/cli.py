"""Command-line interface.

Subcommands: measure, decompose, sweep, verify, local-content, box.
Inputs are JSON files holding either a box ({"probs": ...}) or a state
plus settings ({"rho": ..., "settings": {...}}).  All numeric output is
printed to 12 significant digits and is byte-deterministic for identical
inputs and flags.

Exit codes: 0 success, 2 parse/schema, 3 box or state invariant,
4 unknown name, 5 solver stall.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .boxes import (BadWeights, Box, NotABox, deterministic_box, mermin_box,
                    mix, pr_box, random_box, white_noise)
from .decompose import (Decomposition, ResidualInvalid, SolverStalled,
                        bell_canonical, full_canonical, local_content,
                        local_membership)
from .measures import MeasureReport, measure_report
from .quantum import (MeasurementSettings, NotUnit, OutOfRange, TwoQubitState,
                      born_box, random_mixed_state, random_pure_state,
                      random_settings)
from .scenarios import scenario_by_name, scenario_registry, sweep, sweep_csv

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_INVARIANT = 3
EXIT_UNKNOWN_NAME = 4
EXIT_SOLVER = 5

DEVIATION_GATE = 1e-8


class SchemaError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return f"{float(x):.12g}"


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: top-level JSON object expected")
    return data


def _load_box(path: str, tol: float) -> Box:
    data = _load_json(path)
    if "probs" in data:
        return Box(np.asarray(data["probs"], dtype=float), tol=float(data.get("tol", tol)))
    if "rho" in data or "state" in data:
        state_data = data.get("state", data)
        try:
            state = TwoQubitState.from_dict(state_data)
            settings = MeasurementSettings.from_dict(data["settings"])
        except KeyError as exc:
            raise SchemaError(f"{path}: state input needs 'rho' and 'settings' fields ({exc})") from exc
        return born_box(state, settings)
    raise SchemaError(f"{path}: expected a 'probs' field or 'rho'+'settings' fields")


def _report_lines(report: MeasureReport) -> list[str]:
    lines = []
    for a in (0, 1):
        for b in (0, 1):
            lines.append(f"B{a}{b}      {_fmt(report.bell[a, b])}")
    for a in (0, 1):
        for b in (0, 1):
            lines.append(f"M{a}{b}      {_fmt(report.mermin[a, b])}")
    for a in (0, 1):
        for b in (0, 1):
            lines.append(f"Bprod{a}{b}  {_fmt(report.bell_prod[a, b])}")
    lines.append(f"G        {_fmt(report.g)}")
    lines.append(f"Q        {_fmt(report.q)}")
    lines.append(f"T        {_fmt(report.t)}")
    lines.append(f"C_signed {_fmt(report.c_signed)}")
    lines.append(f"C        {_fmt(report.c)}")
    lines.append(f"chsh_violated     {_fmt(report.chsh_violated)}")
    lines.append(f"steering_violated {_fmt(report.steering_violated)}")
    lines.append(f"monogamy_lhs      {_fmt(report.monogamy_lhs)}")
    return lines


def cmd_measure(args) -> int:
    box = _load_box(args.input, args.tol)
    report = measure_report(box)
    if args.format == "json":
        print(json.dumps(report.to_dict()))
    elif args.format == "csv":
        keys = ["B00", "B01", "B10", "B11", "M00", "M01", "M10", "M11",
                "G", "Q", "T", "C_signed", "C"]
        print(",".join(keys + ["chsh_violated", "steering_violated", "monogamy_lhs"]))
        print(",".join([_fmt(report.value(k)) for k in keys]
                       + [_fmt(report.chsh_violated), _fmt(report.steering_violated),
                          _fmt(report.monogamy_lhs)]))
    else:
        print("\n".join(_report_lines(report)))
    return EXIT_OK


def _print_decomposition(deco: Decomposition, fmt: str):
    if fmt == "json":
        print(deco.to_json())
        return
    print(f"degenerate {_fmt(deco.degenerate)}")
    for term in deco.terms:
        print(f"{term.tag.value:14s} weight {_fmt(term.weight)}")


def cmd_decompose(args) -> int:
    box = _load_box(args.input, args.tol)
    deco = bell_canonical(box) if args.mode == "bell" else full_canonical(box)
    _print_decomposition(deco, args.format)
    return EXIT_OK


def cmd_local_content(args) -> int:
    box = _load_box(args.input, args.tol)
    result = local_content(box)
    membership = local_membership(box)
    if args.format == "json":
        data = result.to_dict()
        data["membership_feasible"] = membership.feasible
        print(json.dumps(data))
    else:
        print(f"local_content       {_fmt(result.objective)}")
        print(f"membership_feasible {_fmt(membership.feasible)}")
        print(f"iterations          {result.iterations}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        spec = scenario_by_name(args.scenario)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_UNKNOWN_NAME
    rows = sweep(spec, args.points)
    if args.format == "json":
        print(json.dumps([{k: (v if isinstance(v, bool) else float(_fmt(v)))
                           for k, v in row.items()} for row in rows]))
    else:
        sys.stdout.write(sweep_csv(rows))
    return EXIT_OK


def cmd_verify(args) -> int:
    """Audit every scenario against its closed forms, plus sampled invariants."""
    rng = np.random.default_rng(args.seed)
    failures = 0
    for spec in scenario_registry():
        rows = sweep(spec, args.points)
        dev = max(row["max_abs_deviation"] for row in rows)
        ok = dev <= DEVIATION_GATE
        failures += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'} {spec.name:24s} max_deviation {_fmt(dev)}")

    worst_slack = np.inf
    for _ in range(200):
        state = random_pure_state(rng) if rng.random() < 0.5 else random_mixed_state(rng)
        rep = measure_report(born_box(state, random_settings(rng)))
        worst_slack = min(worst_slack, 4.0 - rep.monogamy_lhs)
    ok = worst_slack >= -1e-7
    failures += 0 if ok else 1
    print(f"{'PASS' if ok else 'FAIL'} {'monogamy-sample':24s} min_slack {_fmt(worst_slack)}")

    disagreements = 0
    for _ in range(200):
        box = random_box(rng)
        max_b = float(np.max(measure_report(box).bell))
        feasible = local_membership(box).feasible
        if abs(max_b - 2.0) > 1e-7 and feasible != (max_b <= 2.0):
            disagreements += 1
    ok = disagreements == 0
    failures += 0 if ok else 1
    print(f"{'PASS' if ok else 'FAIL'} {'facet-lp-sample':24s} disagreements {disagreements}")

    print(f"{'PASS' if failures == 0 else 'FAIL'}: {failures} failing check(s)")
    return EXIT_OK if failures == 0 else 1


def cmd_box(args) -> int:
    bits = {k: getattr(args, k) for k in ("alpha", "beta", "gamma", "epsilon")}
    if args.kind == "pr":
        box = pr_box(bits["alpha"], bits["beta"], bits["gamma"])
    elif args.kind == "deterministic":
        box = deterministic_box(bits["alpha"], bits["beta"], bits["gamma"], bits["epsilon"])
    elif args.kind == "mermin":
        box = mermin_box(bits["alpha"], bits["beta"], bits["gamma"])
    elif args.kind == "noise":
        box = white_noise()
    elif args.kind == "mix":
        if not args.spec:
            raise SchemaError("box mix requires --spec FILE with 'weights' and 'boxes'")
        data = _load_json(args.spec)
        try:
            boxes = [Box(np.asarray(b["probs"], dtype=float)) for b in data["boxes"]]
            box = mix(boxes, data["weights"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"mix spec needs 'boxes' (list of box objects) and 'weights': {exc}") from exc
    else:  # pragma: no cover - argparse restricts choices
        print(f"unknown box kind '{args.kind}'", file=sys.stderr)
        return EXIT_UNKNOWN_NAME
    print(box.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsbox", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"nsbox {__version__}")
    parser.add_argument("--tol", type=float,
                        default=float(os.environ.get("NSBOX_TOL", "1e-9")),
                        help="validation tolerance (env NSBOX_TOL overrides the default)")
    parser.add_argument("--format", choices=("json", "csv", "table"), default="table")
    parser.add_argument("--points", type=int, default=11, help="sweep/verify grid size")
    parser.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="full measure report for a box or state+settings")
    p.add_argument("input")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("decompose", help="canonical convex decomposition")
    p.add_argument("input")
    p.add_argument("--mode", choices=("bell", "full"), default="full")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("sweep", help="parameter sweep of a named scenario (CSV)")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="audit all scenarios against their closed forms")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("local-content", help="maximal local weight under the box (LP)")
    p.add_argument("input")
    p.set_defaults(func=cmd_local_content)

    p = sub.add_parser("box", help="construct reference boxes / mixtures as JSON")
    p.add_argument("kind", choices=("pr", "deterministic", "mermin", "noise", "mix"))
    p.add_argument("--alpha", type=int, default=0, choices=(0, 1))
    p.add_argument("--beta", type=int, default=0, choices=(0, 1))
    p.add_argument("--gamma", type=int, default=0, choices=(0, 1))
    p.add_argument("--epsilon", type=int, default=0, choices=(0, 1))
    p.add_argument("--spec", help="JSON file with 'boxes' and 'weights' (mix only)")
    p.set_defaults(func=cmd_box)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol <= 0:
        print("tolerance must be positive", file=sys.stderr)
        return EXIT_SCHEMA
    if args.points < 2:
        print("--points must be at least 2", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (NotABox, BadWeights, NotUnit, OutOfRange, ResidualInvalid) as exc:
        print(f"invariant error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SolverStalled as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
