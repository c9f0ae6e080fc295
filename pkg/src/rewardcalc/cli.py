"""Command-line front end.

Every subcommand loads and checks all inputs before computing, writes a
deterministic report to --output (default stdout), and exits with:
0 success / verdict positive, 1 verdict negative (check failed or witness
found), 2 usage or input error, 3 numerical failure.

Scalar values in text format print with 12 digits after the decimal point;
JSON artifacts keep full float precision so they round-trip losslessly.
"""
from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import analysis, fileio, operators
from .decompose import canonicalize, decompose, shaping_distance
from .errors import (
    DomainMismatchError,
    EnumerationCapError,
    GraphInvariantError,
    InputError,
    RewardCalcError,
    SolverError,
)
from .graphs import topology_report, validate
from .tolerance import Tolerance

CHECK_PROPERTIES = (
    "conservative",
    "finitely-conservative",
    "curl-free",
    "action-independent",
    "optimality",
)


def _fmt(x: float) -> str:
    return f"{float(x) + 0.0:.12f}"


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", required=True, help="transition graph JSON file")
    common.add_argument("--tol-abs", type=float, default=1e-9)
    common.add_argument("--tol-rel", type=float, default=1e-9)
    common.add_argument("--max-len", type=int, default=6)
    common.add_argument("--budget", type=int, default=10000)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="rewardcalc",
        description="Discounted calculus, decomposition, and shaping checks "
        "on MDP transition graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common])
    sub.add_parser("topology", parents=[common])

    p = sub.add_parser("grad", parents=[common])
    p.add_argument("--potential", required=True)

    p = sub.add_parser("integrate", parents=[common])
    p.add_argument("--reward", required=True)
    p.add_argument("--trajectory")
    p.add_argument("--lasso")

    for name in ("curl", "div", "canonicalize"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--reward", required=True)

    sub.add_parser("laplacian", parents=[common])

    p = sub.add_parser("decompose", parents=[common])
    p.add_argument("--reward", required=True)

    p = sub.add_parser("distance", parents=[common])
    p.add_argument("--reward", action="append", required=True)

    p = sub.add_parser("check", parents=[common])
    p.add_argument("property", choices=CHECK_PROPERTIES)
    p.add_argument("--reward", required=True)

    p = sub.add_parser("construct-potential", parents=[common])
    p.add_argument("--reward", required=True)
    p.add_argument("--from", dest="from_state", required=True, metavar="STATE")

    p = sub.add_parser("qstar", parents=[common])
    p.add_argument("--reward", required=True)
    p.add_argument("--dynamics", required=True)
    return parser


def run(argv, stdout=None, stderr=None) -> int:
    """Execute one CLI invocation; returns the exit code."""
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code, lines = _dispatch(args, stderr)
    except (
        InputError,
        DomainMismatchError,
        GraphInvariantError,
        EnumerationCapError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except (SolverError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return 3
    except RewardCalcError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def _json_lines(obj) -> list[str]:
    return fileio.dumps(obj).rstrip("\n").split("\n")


def _dispatch(args, stderr) -> tuple[int, list[str]]:
    tol = Tolerance(abs_tol=args.tol_abs, rel_tol=args.tol_rel)
    if tol.abs_tol <= 0 or tol.rel_tol <= 0:
        raise InputError("tolerances must be positive")
    if args.max_len < 1 or args.budget < 1 or args.threads < 1:
        raise InputError("counts (--max-len, --budget, --threads) must be positive")
    graph = fileio.load_graph(args.graph)
    cmd = args.command

    if cmd == "validate":
        violations = validate(graph)
        if args.format == "json":
            return (0 if not violations else 1), _json_lines(
                {"ok": not violations, "violations": violations}
            )
        if not violations:
            return 0, ["ok"]
        return 1, [f"violation: {v}" for v in violations]

    graph.require_valid()

    if cmd == "topology":
        report = topology_report(graph)
        obj = fileio.topology_to_obj(report)
        if args.format == "json":
            return 0, _json_lines(obj)
        keys = (
            "is_complete",
            "has_distinguishing_actions",
            "is_diamond_complete",
            "every_state_in_loop",
        )
        return 0, [f"{k} {'true' if obj[k] else 'false'}" for k in keys]

    if cmd == "grad":
        p = fileio.load_potential(args.potential, graph)
        return 0, _json_lines(fileio.reward_to_obj(operators.grad(graph, p)))

    if cmd == "integrate":
        r = fileio.load_reward(args.reward, graph)
        if (args.trajectory is None) == (args.lasso is None):
            raise InputError("integrate needs exactly one of --trajectory or --lasso")
        if args.trajectory:
            t = fileio.load_trajectory(args.trajectory, graph)
            value = operators.line_integral_finite(graph, r, t)
        else:
            t = fileio.load_lasso(args.lasso, graph)
            value = operators.line_integral_lasso(graph, r, t)
        if args.format == "json":
            return 0, _json_lines({"integral": value})
        return 0, [_fmt(value)]

    if cmd == "curl":
        r = fileio.load_reward(args.reward, graph)
        return 0, _json_lines(fileio.curl_to_obj(operators.curl(graph, r)))

    if cmd == "div":
        r = fileio.load_reward(args.reward, graph)
        return 0, _json_lines(fileio.potential_to_obj(operators.divergence(graph, r)))

    if cmd == "laplacian":
        return 0, _json_lines(fileio.laplacian_to_obj(operators.laplacian_matrix(graph)))

    if cmd == "decompose":
        r = fileio.load_reward(args.reward, graph)
        result = decompose(graph, r)
        return 0, _json_lines(fileio.decomposition_to_obj(result))

    if cmd == "canonicalize":
        r = fileio.load_reward(args.reward, graph)
        return 0, _json_lines(fileio.reward_to_obj(canonicalize(graph, r)))

    if cmd == "distance":
        if len(args.reward) != 2:
            raise InputError("distance needs exactly two --reward files")
        r1 = fileio.load_reward(args.reward[0], graph)
        r2 = fileio.load_reward(args.reward[1], graph)
        value = shaping_distance(graph, r1, r2)
        if args.format == "json":
            return 0, _json_lines({"distance": value})
        return 0, [_fmt(value)]

    if cmd == "check":
        return _dispatch_check(args, graph, tol)

    if cmd == "construct-potential":
        r = fileio.load_reward(args.reward, graph)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = analysis.construct_potential_shortest_path(
                graph, r, args.from_state, tol=tol
            )
        if not result.matches_input:
            print(
                "warning: gradient of the constructed potential does not match "
                f"the reward (residual {_fmt(result.gradient_residual)})",
                file=stderr,
            )
        return 0, _json_lines(fileio.potential_to_obj(result.potential))

    if cmd == "qstar":
        r = fileio.load_reward(args.reward, graph)
        dyn = fileio.load_dynamics(args.dynamics, graph)
        q = analysis.q_star(graph, dyn, r)
        obj = {
            "values": [
                {"state": s, "action": a, "value": v} for (s, a), v in sorted(q.items())
            ]
        }
        return 0, _json_lines(obj)

    raise InputError(f"unknown command: {cmd}")


def _dispatch_check(args, graph, tol) -> tuple[int, list[str]]:
    r = fileio.load_reward(args.reward, graph)
    prop = args.property

    if prop == "conservative":
        verdict = analysis.check_conservative(graph, r, tol=tol, max_len=args.max_len)
        ok = verdict.kind == analysis.CONSERVATIVE
        if args.format == "json":
            return (0 if ok else 1), _json_lines(fileio.conservativeness_to_obj(verdict))
        lines = [verdict.kind, f"residual {_fmt(verdict.residual)}"]
        if verdict.witness_integrals is not None:
            a, b = verdict.witness_integrals
            lines.append(f"witness integrals {_fmt(a)} {_fmt(b)}")
        return (0 if ok else 1), lines

    if prop == "finitely-conservative":
        verdict = analysis.check_finitely_conservative(graph, r, max_len=args.max_len, tol=tol)
        ok = verdict.kind != analysis.NOT_FINITELY_CONSERVATIVE
        if args.format == "json":
            return (0 if ok else 1), _json_lines(fileio.conservativeness_to_obj(verdict))
        if ok:
            return 0, [f"no violation up to length {verdict.horizon}"]
        a, b = verdict.witness_integrals
        return 1, [
            f"violation at length {verdict.horizon}",
            f"witness integrals {_fmt(a)} {_fmt(b)}",
        ]

    if prop == "curl-free":
        worst = operators.max_abs_curl(graph, r)
        ok = worst <= tol.abs_tol
        if args.format == "json":
            return (0 if ok else 1), _json_lines(
                {"curl_free": ok, "max_abs_curl": worst}
            )
        return (0 if ok else 1), [
            f"curl-free {'true' if ok else 'false'}",
            f"max abs curl {_fmt(worst)}",
        ]

    if prop == "action-independent":
        ok, witness = analysis.is_action_independent(graph, r, tol=tol)
        if args.format == "json":
            return (0 if ok else 1), _json_lines(
                {
                    "action_independent": ok,
                    "witness": fileio.action_witness_to_obj(witness),
                }
            )
        if ok:
            return 0, ["action-independent true"]
        return 1, [
            "action-independent false",
            f"witness {witness.first} {_fmt(witness.first_value)} "
            f"vs {witness.second} {_fmt(witness.second_value)}",
        ]

    if prop == "optimality":
        verdict = analysis.check_optimality_preserving(
            graph, r, budget=args.budget, threads=args.threads
        )
        ok = verdict.verdict == analysis.NO_COUNTEREXAMPLE
        if args.format == "json":
            return (0 if ok else 1), _json_lines(fileio.optimality_to_obj(verdict))
        lines = [
            verdict.verdict,
            f"dynamics checked {verdict.dynamics_checked} of {verdict.total_dynamics}",
            f"max q gap {_fmt(verdict.max_gap_seen)}",
        ]
        if verdict.counterexample is not None:
            c = verdict.counterexample
            lines.append(
                f"counterexample at index {c.index}: state {c.state} "
                f"actions {c.action_high}/{c.action_low} gap {_fmt(c.q_gap)}"
            )
            lines.extend(_json_lines(fileio.dynamics_to_obj(c.dynamics)))
        return (0 if ok else 1), lines

    raise InputError(f"unknown check property: {prop}")


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
