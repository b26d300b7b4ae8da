"""Command-line front end.

Exit codes: 0 success or accepted, 1 rejected trace or axiom violations found,
2 unreadable or invalid input, 3 derived value disagrees with the oracle.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ancilla import ExpansionTooLarge, common_denominator, expand_with_plan, plan_blocks
from .axioms import ValueFunctional, audit, generate_suite
from .checker import verify
from .core import (
    GameError,
    born_value,
    numeric_from_json,
    state_from_json,
    state_to_json,
    strip_phases,
    to_rational,
)
from .dominance import EnclosureTooWide, squeeze
from .engine import derive_interval, derive_value
from . import trace as tracefmt

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ORACLE = 0, 1, 2, 3


class InputError(Exception):
    pass


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from exc


def _rational_arg(text: str):
    try:
        return to_rational(text)
    except (GameError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _load_state(path: str):
    try:
        return state_from_json(_load_json(path))
    except GameError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from exc


def cmd_value(args) -> int:
    state = _load_state(args.game)
    try:
        value, trace = derive_value(state)
    except ExpansionTooLarge as exc:
        raise InputError(f"ExpansionTooLarge: {exc}") from exc
    print(value)
    if args.trace:
        Path(args.trace).write_text(tracefmt.dumps(trace), encoding="utf-8")
    if args.oracle:
        oracle = born_value(state)
        print(f"oracle {oracle}")
        if oracle != value:
            print("derived value differs from the oracle", file=sys.stderr)
            return EXIT_ORACLE
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        text = Path(args.trace).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {args.trace}: {exc}") from exc
    try:
        trace = tracefmt.loads(text)
        verdict = verify(trace)
    except tracefmt.MalformedTrace as exc:
        print(f"malformed: {exc}")
        return EXIT_INPUT
    if verdict.accepted:
        print("accepted")
        return EXIT_OK
    print(f"rejected at step {verdict.failing_step}: {verdict.reason}")
    return EXIT_FAIL


def cmd_squeeze(args) -> int:
    try:
        state = numeric_from_json(_load_json(args.game))
    except GameError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from exc
    try:
        if args.trace:
            interval, trace = derive_interval(state, args.eps)
            Path(args.trace).write_text(tracefmt.dumps(trace), encoding="utf-8")
        else:
            interval, _, _ = squeeze(state, args.eps)
    except (EnclosureTooWide, ExpansionTooLarge) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from exc
    print(interval)
    return EXIT_OK


def cmd_ancilla(args) -> int:
    state = strip_phases(_load_state(args.game))
    n = common_denominator(state)
    sizes = [int(b.weight * n) for b in state.branches]
    plan = plan_blocks(state.payoffs, sizes)
    report = {
        "N": n,
        "payoffs": [str(x) for x in state.payoffs],
        "block_sizes": list(plan.block_sizes),
        "offsets": [[str(y) for y in block] for block in plan.offsets],
        "block_sums": [str(sum(block)) for block in plan.offsets],
        "expanded": state_to_json(expand_with_plan(state, plan)),
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_axioms(args) -> int:
    if args.beta <= 0:
        raise InputError("beta must be positive")
    if args.count < 1 or args.max_branches < 2:
        raise InputError("need --count >= 1 and --max-branches >= 2")
    suite = generate_suite(args.seed, args.count, args.max_branches)
    reports = audit(ValueFunctional.power(args.beta), suite)
    print(f"{len(reports)} violations")
    for r in reports[: args.show]:
        print(f"game {r.game_index} {r.axiom} ({r.transformation}): {r.lhs} != {r.rhs}")
    if args.out:
        Path(args.out).write_text(
            json.dumps([r.to_json() for r in reports], indent=2) + "\n", encoding="utf-8"
        )
    return EXIT_FAIL if reports else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgame", description="Exact values of quantum measurement games, with proof traces."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", help="derive a game's value")
    p.add_argument("game", help="game JSON file")
    p.add_argument("--trace", metavar="OUT", help="write the proof trace here")
    p.add_argument("--oracle", action="store_true", help="also print the expected-payoff oracle")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("check", help="verify a proof trace")
    p.add_argument("trace", help="trace JSON file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("squeeze", help="bracket a game with enclosed weights")
    p.add_argument("game", help="numeric game JSON file (weight_lo/weight_hi)")
    p.add_argument("--eps", type=_rational_arg, required=True, help="target width, m/n")
    p.add_argument("--trace", metavar="OUT", help="derive both bounds and write the trace")
    p.set_defaults(func=cmd_squeeze)

    p = sub.add_parser("ancilla", help="show the ancilla plan for a game")
    p.add_argument("game", help="game JSON file")
    p.set_defaults(func=cmd_ancilla)

    p = sub.add_parser("axioms", help="audit a power-family value functional")
    p.add_argument("--beta", type=_rational_arg, default=_rational_arg("1"))
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--max-branches", type=int, default=4)
    p.add_argument("--show", type=int, default=5, help="violations to print")
    p.add_argument("--out", metavar="FILE", help="write all reports as JSON")
    p.set_defaults(func=cmd_axioms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
