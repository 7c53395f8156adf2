"""Command-line interface.

Subcommands: solve, solve-dist, resources, verify, dist-compare.
Records go out as newline-delimited JSON, tables as CSV. Exit codes:
0 ok, 1 a verified property failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import dist, verify
from .harness import BatchResult, ExperimentConfig, run_batch
from .numtheory import InstanceError, to_fraction, validate_instance
from .resources import (
    communication_qubits,
    per_node_qubits_from_widths,
    per_node_qubits_formula,
    single_node_qubits,
    GATE_COMPLEXITY_CLASS,
    DEPTH_CLASS,
    ANCILLA_NOTE,
)


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True)


def _parse_bigint(text: str) -> int:
    """Plain integers plus the power form 'b**e' for huge symbolic orders."""
    if "**" in text:
        base, _, exponent = text.partition("**")
        return int(base) ** int(exponent)
    return int(text)


def _emit(lines: list[str], output: str | None) -> None:
    if output is None:
        for line in lines:
            print(line)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def _cmd_solve(args: argparse.Namespace, distributed: bool) -> int:
    config = ExperimentConfig(
        N=args.N,
        a=args.a,
        b=args.b,
        algorithm="distributed" if distributed else "shor",
        mode=args.mode,
        epsilon=args.epsilon,
        epsilon_prime=getattr(args, "epsilon_prime", None),
        k=getattr(args, "k", 2),
        h=getattr(args, "h", None),
        trials=args.trials,
        max_retries=args.max_retries,
        seed=args.seed,
        reuse_state=not args.no_reuse,
    )
    result: BatchResult = run_batch(config)
    lines = [_json_line(record.to_json_dict()) for record in result.records]
    lines.append(_json_line({"summary": result.summary}))
    _emit(lines, args.output)
    return 0


def _cmd_resources(args: argparse.Namespace) -> int:
    epsilon = to_fraction(args.epsilon)
    epsilon_prime = to_fraction(args.epsilon_prime)
    rows = [
        [
            "r",
            "L",
            "k",
            "epsilon",
            "epsilon_prime",
            "qubits_single_node_alg2",
            "qubits_per_node_alg4",
            "qubits_per_node_alg4_formula",
            "comm_qubits",
            "gate_complexity_class",
            "depth_class",
            "alg4_less_than_alg2",
        ]
    ]
    for r in args.r:
        L = args.L if args.L is not None else r.bit_length() + 1
        for k in args.k:
            alg2 = single_node_qubits(r, L, epsilon)
            try:
                plan = dist.plan_for_order(r, k, epsilon=epsilon, epsilon_prime=epsilon_prime)
                alg4 = per_node_qubits_from_widths(plan.t, L)
                formula = float(per_node_qubits_formula(r, L, k, epsilon_prime))
                advantage = str(alg4 < alg2).lower()
                comm = communication_qubits(k, L)
            except dist.PlanError as exc:
                alg4, formula, advantage, comm = "", "", f"infeasible: {exc}", ""
            rows.append(
                [
                    str(r),
                    str(L),
                    str(k),
                    str(float(epsilon)),
                    str(float(epsilon_prime)),
                    str(alg2),
                    str(alg4),
                    str(formula),
                    str(comm),
                    GATE_COMPLEXITY_CLASS,
                    DEPTH_CLASS,
                    advantage,
                ]
            )
    if args.output is None:
        writer = csv.writer(sys.stdout)
        writer.writerows(rows)
        print(f"# note: {ANCILLA_NOTE}")
    else:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerows(rows)
            fh.write(f"# note: {ANCILLA_NOTE}\n")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    results = verify.run_suite(
        args.suite, r=args.r, epsilon=args.epsilon, cases=args.cases, seed=args.seed
    )
    failed = 0
    for check in results:
        status = "PASS" if check.ok else "FAIL"
        failed += not check.ok
        print(f"{status} {check.name}: achieved {check.achieved}, bound {check.bound}")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def _cmd_dist_compare(args: argparse.Namespace) -> int:
    instance = validate_instance(args.N, args.a, args.b)
    plan = dist.make_plan(instance, args.k, args.h, args.epsilon, args.epsilon_prime)
    report = dist.compare_step7_state(instance, plan)
    sv = dist.statevector_joint_distribution(instance, plan)
    an = dist.analytic_joint_distribution(instance, plan)
    tv = 0.5 * float(np.abs(sv - an).sum())
    payload = {
        "plan": plan.to_json_dict(),
        "max_amplitude_deviation": report.max_amplitude_deviation,
        "per_branch_deviation": list(report.per_branch_deviation),
        "factorization_residual": report.factorization_residual,
        "basis_residual": report.basis_residual,
        "joint_total_variation": tv,
        "comm_qubits": communication_qubits(plan.k, instance.L),
    }
    _emit([_json_line(payload)], args.output)
    return 0


def _add_instance_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--N", type=int, required=True, help="modulus")
    parser.add_argument("--a", type=int, required=True, help="base")
    parser.add_argument("--b", type=int, required=True, help="target power")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distdlog", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run the single-node solver")
    _add_instance_args(solve)
    solve.add_argument("--epsilon", default="0.25")
    solve.add_argument("--mode", choices=("statevector", "analytic"), default="statevector")
    solve.add_argument("--trials", type=int, default=100)
    solve.add_argument("--seed", type=int, required=True)
    solve.add_argument("--max-retries", type=int, default=64)
    solve.add_argument("--no-reuse", action="store_true",
                       help="rebuild the circuit per attempt instead of reusing its measurement law")
    solve.add_argument("--output", default=None)

    solve_dist = sub.add_parser("solve-dist", help="run the distributed solver")
    _add_instance_args(solve_dist)
    solve_dist.add_argument("--epsilon", default="0.25")
    solve_dist.add_argument("--epsilon-prime", dest="epsilon_prime", default=None)
    solve_dist.add_argument("--k", type=int, default=2)
    solve_dist.add_argument("--h", type=int, default=None)
    solve_dist.add_argument("--mode", choices=("statevector", "analytic"), default="statevector")
    solve_dist.add_argument("--trials", type=int, default=100)
    solve_dist.add_argument("--seed", type=int, required=True)
    solve_dist.add_argument("--max-retries", type=int, default=64)
    solve_dist.add_argument("--no-reuse", action="store_true")
    solve_dist.add_argument("--output", default=None)

    resources = sub.add_parser("resources", help="qubit/communication cost table")
    resources.add_argument("--r", type=_parse_bigint, nargs="+", required=True,
                           help="orders; accepts forms like 5 or 2**1024")
    resources.add_argument("--k", type=int, nargs="+", default=[2])
    resources.add_argument("--L", type=int, default=None,
                           help="synthetic work-register width (default: bits of r plus one)")
    resources.add_argument("--epsilon", default="0.25")
    resources.add_argument("--epsilon-prime", dest="epsilon_prime", default="0.125")
    resources.add_argument("--output", default=None)

    verify_cmd = sub.add_parser("verify", help="run the property suites")
    verify_cmd.add_argument("--suite", choices=verify.SUITES, default="all")
    verify_cmd.add_argument("--r", type=int, default=None)
    verify_cmd.add_argument("--epsilon", default=None)
    verify_cmd.add_argument("--cases", type=int, default=10_000)
    verify_cmd.add_argument("--seed", type=int, default=1)

    compare = sub.add_parser("dist-compare", help="simulated vs closed-form final state")
    _add_instance_args(compare)
    compare.add_argument("--epsilon", default="0.25")
    compare.add_argument("--epsilon-prime", dest="epsilon_prime", default="0.2")
    compare.add_argument("--k", type=int, default=2)
    compare.add_argument("--h", type=int, default=None)
    compare.add_argument("--output", default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args, distributed=False)
        if args.command == "solve-dist":
            return _cmd_solve(args, distributed=True)
        if args.command == "resources":
            return _cmd_resources(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "dist-compare":
            return _cmd_dist_compare(args)
        parser.error(f"unknown command {args.command!r}")
    except (InstanceError, dist.PlanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
