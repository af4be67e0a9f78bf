"""Command-line interface.

    qreduction run <file-or-builtin> [--output json|table] [--precision N]
    qreduction verify [--seed S] [--trials N] [--tol T] [--output json|table]
    qreduction list-scenarios

Exit codes: 0 success, 2 input error, 3 invariant or verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .scenarios import BUILTIN_NAMES, ScenarioError, load_scenario, run_scenario
from .verify import run_suite

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FAILED = 3


def _format_complex(z, digits: int) -> str:
    re, im = z
    if im == 0:
        return f"{re:.{digits}f}"
    return f"{re:.{digits}f}{im:+.{digits}f}j"


def render_result_table(result: dict, digits: int) -> str:
    lines = [f"scenario: {result['scenario']['name']} ({result['scenario']['kind']})"]
    for dist in result["distributions"]:
        lines.append(f"\ndistribution {dist['name']}")
        for a, p in zip(dist["labels"], dist["probs"]):
            lines.append(f"  {a:>10g}  {p:.{digits}f}")
    for state in result["states"]:
        lines.append(f"\nstate {state['name']}")
        if state["matrix"] is None:
            lines.append("  (undefined: zero-probability outcome)")
            continue
        for row in state["matrix"]:
            lines.append("  " + "  ".join(_format_complex(z, digits) for z in row))
    for joint in result["joints"]:
        rows, cols = joint["axes"][0], joint["axes"][1]
        lines.append(f"\njoint {joint['name']} (rows {rows}, columns {cols})")
        lines.append("  " + " " * 10 + "".join(f"{b:>{digits + 5}g}" for b in joint["labels"][1]))
        for a, row in zip(joint["labels"][0], joint["probs"]):
            lines.append(f"  {a:>10g}" + "".join(f"{p:>{digits + 5}.{digits}f}" for p in row))
    lines.append("\nchecks")
    for check in result["checks"]:
        mark = "ok  " if check["passed"] else "FAIL"
        lines.append(f"  {mark} {check['name']:<40} {check['value']:.3e}  (tol {check['tol']:.0e})")
    return "\n".join(lines)


def render_verify_table(summary: dict) -> str:
    lines = [f"verify: seed={summary['seed']} trials={summary['trials']}"]
    for prop in summary["properties"]:
        mark = "PASS" if prop["passed"] else "FAIL"
        lines.append(f"  {mark} {prop['name']:<28} max violation {prop['max_violation']:.3e}"
                     f"  (tol {prop['tol']:.0e})")
    lines.append("all properties pass" if summary["passed"] else "some properties FAILED")
    return "\n".join(lines)


def cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
        result = run_scenario(scenario, precision=args.precision)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.output == "json":
        print(json.dumps(result, indent=2))
    else:
        print(render_result_table(result, min(args.precision, 12)))
    if result["violations"]:
        for v in result["violations"]:
            print(f"invariant violated: {v['name']} magnitude {v['magnitude']:.3e} > tol {v['tol']:.0e}",
                  file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 0:
        print("error: --trials must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    if args.tol is not None and not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    if args.trials == 0:
        print("warning: 0 trials requested; every property passes vacuously", file=sys.stderr)
    results = run_suite(seed=args.seed, trials=args.trials, tol=args.tol)
    summary = {
        "seed": args.seed,
        "trials": args.trials,
        "tol_override": args.tol,
        "passed": all(r.passed for r in results),
        "properties": [r.as_dict() for r in results],
    }
    if args.output == "json":
        print(json.dumps(summary, indent=2))
    else:
        print(render_verify_table(summary))
    return EXIT_OK if summary["passed"] else EXIT_FAILED


def cmd_list(args) -> int:
    for name in BUILTIN_NAMES:
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with status 2 on usage errors, the same as EXIT_INPUT
    parser = argparse.ArgumentParser(prog="qreduction", description="Indirect measurement models and state reduction")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or built-in scenario")
    run.add_argument("scenario", help="path to a scenario JSON file, or a built-in name")
    run.add_argument("--output", choices=["json", "table"], default="table")
    run.add_argument("--precision", type=int, default=12, help="digits for matrix entries (default 12)")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run the randomized invariant suite")
    verify.add_argument("--seed", type=int, default=42)
    verify.add_argument("--trials", type=int, default=25)
    verify.add_argument("--tol", type=float, default=None, help="override every property's tolerance")
    verify.add_argument("--output", choices=["json", "table"], default="table")
    verify.set_defaults(func=cmd_verify)

    lst = sub.add_parser("list-scenarios", help="list built-in scenarios")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
