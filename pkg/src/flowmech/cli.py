"""Command-line entry point for batch runs and reproduction pipelines.

Subcommands: ``solve`` (ufp|muca|repeat), ``payments``, ``audit``,
``oracle`` (ufp|muca|repeat), ``gen`` (directed-lb|undirected-lb|muca-lb|
random), ``recommend-epsilon``, and ``verify``.  Results go to stdout (or
--output) as JSON with sorted keys; warnings go to stderr as ``warning:``
lines.  Every subcommand is deterministic for fixed inputs and seed.

Exit codes: 0 success, 2 invalid input, 3 parameter infeasibility (capacity
bound below 1), 4 oracle limits exceeded.  A supplied epsilon below the
guarantee threshold sqrt(ln m / B) is not an error: the run proceeds with a
stderr warning and a ``"guarantee": "void"`` field in the result.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .benchgen import gen_directed_lb, gen_muca_lb, gen_random, gen_undirected_lb
from .mechanism import run_mechanism, utility_audit
from .model import (InfeasibleBoundError, InstanceError, MucaInstance,
                    NormalizedInstance, UfpInstance, normalize,
                    parse_muca_instance, parse_ufp_instance, prenormalized,
                    serialize_muca_instance, serialize_ufp_instance)
from .muca import solve_muca
from .oracle import (OracleLimitError, brute_force_opt_muca,
                     brute_force_opt_repeat, brute_force_opt_ufp,
                     check_muca_allocation, check_ufp_allocation)
from .repeat import solve_ufp_repeat
from .ufp import epsilon_max, guarantee_holds, solve_ufp

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_ORACLE_LIMIT = 4


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc


def _emit(doc: dict, output: str | None):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _warn(message: str):
    sys.stderr.write(f"warning: {message}\n")


def _load_ufp(path: str, no_normalize: bool) -> NormalizedInstance:
    inst = parse_ufp_instance(_read_text(path))
    return prenormalized(inst) if no_normalize else normalize(inst)


def _load_any(path: str):
    """Routing or market instance, told apart by their disjoint key sets."""
    text = _read_text(path)
    head = json.loads(text) if text.strip().startswith("{") else None
    if isinstance(head, dict) and "items" in head:
        return parse_muca_instance(text)
    return parse_ufp_instance(text)


def _guarantee_field(m: int, bound: float, epsilon: float) -> str:
    if guarantee_holds(m, bound, epsilon):
        return "holds"
    _warn(f"epsilon {epsilon!r} is below the guarantee threshold "
          f"{epsilon_max(m, bound)!r} for B={bound!r}, m={m}; the certificate "
          "ratio bound is void")
    return "void"


def _write_trace(path: str, records, exit_reason: str, kind: str):
    with open(path, "w", encoding="utf-8") as fh:
        for i, rec in enumerate(records):
            doc = {
                "iteration": rec.iteration,
                "request": rec.request_id,
                "score": rec.score,
                "price_total": rec.price_total,
                "covered_value": rec.covered_value,
                "primal_value": rec.primal_value,
                "threshold_ok": rec.threshold_ok,
            }
            if kind == "muca":
                doc["bundle"] = list(rec.bundle)
            else:
                doc["path"] = list(rec.path)
            if i == len(records) - 1:
                doc["exit_reason"] = exit_reason
            fh.write(json.dumps(doc, sort_keys=True) + "\n")


def _cmd_solve(args) -> int:
    if args.problem == "muca":
        inst = parse_muca_instance(_read_text(args.input))
        sol = solve_muca(inst, args.epsilon)
        by_id = {r.id: r for r in inst.requests}
        doc = {
            "allocated": [{"request": rid,
                           "bundle": sorted(by_id[rid].bundle),
                           "value": by_id[rid].value} for rid in sol.winners],
            "primal_value": sol.primal_value,
            "dual_certificate": sol.dual_certificate,
            "exit_reason": sol.exit_reason,
            "epsilon": sol.epsilon,
            "B": sol.bound,
            "guarantee": _guarantee_field(len(inst.items), sol.bound, args.epsilon),
        }
        if args.trace:
            _write_trace(args.trace, sol.trace, sol.exit_reason, "muca")
        _emit(doc, args.output)
        return EXIT_OK

    ninst = _load_ufp(args.input, args.no_normalize)
    graph = ninst.inner
    by_id = {r.id: r for r in graph.requests}
    if args.problem == "ufp":
        sol = solve_ufp(ninst, args.epsilon)
        allocated = [{"request": rid, "path": list(p.edges), "value": by_id[rid].value}
                     for rid, p in sol.allocation]
    else:
        sol = solve_ufp_repeat(ninst, args.epsilon)
        allocated = [{"request": rid, "path": list(edges), "count": count,
                      "value": by_id[rid].value}
                     for rid, edges, count in sol.allocation]
    for w in sol.warnings:
        _warn(w)
    doc = {
        "allocated": allocated,
        "primal_value": sol.primal_value,
        "dual_certificate": sol.dual_certificate,
        "exit_reason": sol.exit_reason,
        "epsilon": sol.epsilon,
        "B": sol.bound,
        "guarantee": _guarantee_field(len(graph.edges), sol.bound, args.epsilon),
    }
    if args.trace:
        _write_trace(args.trace, sol.trace, sol.exit_reason, args.problem)
    _emit(doc, args.output)
    return EXIT_OK


def _cmd_payments(args) -> int:
    inst = _load_any(args.input)
    if isinstance(inst, UfpInstance):
        inst = normalize(inst)
        requests = inst.inner.requests
    else:
        requests = inst.requests
    by_id = {r.id: r for r in requests}
    _sol, profile = run_mechanism(inst, args.epsilon, args.tolerance)
    doc = {
        "winners": [{"request": rid, "value": by_id[rid].value, "payment": theta}
                    for rid, theta in profile.payments],
        "tolerance": profile.tolerance,
    }
    _emit(doc, args.output)
    return EXIT_OK


def _cmd_audit(args) -> int:
    inst = _load_any(args.input)
    if isinstance(inst, UfpInstance):
        inst = normalize(inst)
        requests = inst.inner.requests
    else:
        requests = inst.requests
    ids = {r.id for r in requests}
    if args.request not in ids:
        raise InstanceError(f"unknown request {args.request!r}")
    r = next(q for q in requests if q.id == args.request)
    # evenly spaced value reports in (0, 2v], always containing v itself
    n = args.grid
    grid = [r.value * (2.0 * k / n) for k in range(1, n + 1)]
    if r.value not in grid:
        grid.append(r.value)
    report = utility_audit(inst, args.epsilon, args.request, grid,
                           tolerance=args.tolerance)
    doc = {
        "request": report.request_id,
        "truthful_utility": report.truthful_utility,
        "best_gain": report.best_gain,
        "best_report": None if report.best_report is None else
            {"value": report.best_report[0], "demand": report.best_report[1]},
        "reports_evaluated": report.reports_evaluated,
    }
    _emit(doc, args.output)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.problem == "muca":
        inst = parse_muca_instance(_read_text(args.input))
        opt, winners = brute_force_opt_muca(inst, max_requests=args.max_requests)
        doc = {"opt": opt, "witness": list(winners)}
    elif args.problem == "ufp":
        inst = parse_ufp_instance(_read_text(args.input))
        opt, witness = brute_force_opt_ufp(inst, max_requests=args.max_requests,
                                           max_paths=args.max_paths)
        doc = {"opt": opt,
               "witness": [{"request": rid, "path": list(p.edges)} for rid, p in witness]}
    else:
        inst = parse_ufp_instance(_read_text(args.input))
        if args.max_copies is None:
            total_cap = sum(e.capacity for e in inst.edges)
            d_min = min((r.demand for r in inst.requests), default=1.0)
            max_copies = int(total_cap // d_min)
        else:
            max_copies = args.max_copies
        opt, witness, capped = brute_force_opt_repeat(
            inst, max_copies, max_requests=args.max_requests, max_paths=args.max_paths)
        doc = {"opt": opt, "capped": capped,
               "witness": [{"request": rid, "path": list(edges), "count": count}
                           for rid, edges, count in witness]}
    _emit(doc, args.output)
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.family == "directed-lb":
        inst = gen_directed_lb(int(args.B), args.ell, subdivide=args.subdivide)
        text = serialize_ufp_instance(inst)
    elif args.family == "undirected-lb":
        inst = gen_undirected_lb(int(args.B))
        text = serialize_ufp_instance(inst)
    elif args.family == "muca-lb":
        inst = gen_muca_lb(args.p, int(args.B), args.m)
        text = serialize_muca_instance(inst)
    else:
        inst = gen_random(args.n, args.m, args.requests, args.B, seed=args.seed)
        text = serialize_ufp_instance(inst)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_recommend_epsilon(args) -> int:
    inst = _load_any(args.input)
    if isinstance(inst, MucaInstance):
        m = len(inst.items)
        bound = float(inst.bound)
    else:
        ninst = normalize(inst)
        m = len(ninst.inner.edges)
        bound = ninst.bound
    doc = {
        "epsilon_max": epsilon_max(m, bound) if bound > 0 else None,
        "B": bound,
        "m": m,
        "note": ("the certificate ratio bound (1+6*eps)*e/(e-1) needs "
                 "B >= ln(m)/eps^2, i.e. eps at least epsilon_max; to target "
                 "a (1+eps)*e/(e-1) ratio, run the solver at accuracy eps/6"),
    }
    _emit(doc, args.output)
    return EXIT_OK


def _cmd_verify(args) -> int:
    with open(args.solution, "r", encoding="utf-8") as fh:
        sol = json.load(fh)
    inst = _load_any(args.input)
    problems: list[str] = []
    allocated = sol.get("allocated", [])
    if isinstance(inst, MucaInstance):
        problems += check_muca_allocation(inst, [a["request"] for a in allocated])
        values = {r.id: r.value for r in inst.requests}
        total = sum(values.get(a["request"], 0.0) for a in allocated)
    else:
        ninst = normalize(inst) if not args.no_normalize else prenormalized(inst)
        graph = ninst.inner
        repeats = any("count" in a for a in allocated)
        if repeats:
            entries = [(a["request"], tuple(a["path"]), a.get("count", 1))
                       for a in allocated]
        else:
            entries = [(a["request"], tuple(a["path"])) for a in allocated]
        problems += check_ufp_allocation(graph, entries, allow_repeats=repeats)
        values = {r.id: r.value for r in graph.requests}
        total = sum(values.get(a["request"], 0.0) * a.get("count", 1) for a in allocated)
    if not math.isclose(total, sol.get("primal_value", total),
                        rel_tol=1e-9, abs_tol=1e-9):
        problems.append(f"primal_value {sol.get('primal_value')!r} does not match "
                        f"allocated total {total!r}")
    cert = sol.get("dual_certificate")
    if cert is not None and cert < sol.get("primal_value", 0.0) - 1e-9:
        problems.append(f"dual_certificate {cert!r} below primal_value")
    _emit({"ok": not problems, "problems": problems}, args.output)
    return EXIT_OK if not problems else EXIT_INVALID_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowmech")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a solver on an instance file")
    p.add_argument("problem", choices=["ufp", "muca", "repeat"])
    p.add_argument("--input", required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--trace", help="write per-iteration records to this file")
    p.add_argument("--no-normalize", action="store_true",
                   help="demands are already in (0,1]; do not rescale")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("payments", help="critical-value payment per winner")
    p.add_argument("--input", required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_payments)

    p = sub.add_parser("audit", help="misreport-grid utility audit for one agent")
    p.add_argument("--input", required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--request", required=True)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("oracle", help="exhaustive optimum for a small instance")
    p.add_argument("problem", choices=["ufp", "muca", "repeat"])
    p.add_argument("--input", required=True)
    p.add_argument("--max-requests", type=int, default=10)
    p.add_argument("--max-paths", type=int, default=20)
    p.add_argument("--max-copies", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("gen", help="write a benchmark instance file")
    p.add_argument("family", choices=["directed-lb", "undirected-lb", "muca-lb", "random"])
    p.add_argument("--B", type=float, required=True)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--subdivide", action="store_true")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--m", type=int, default=12)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--requests", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("recommend-epsilon",
                       help="smallest accuracy with a valid certificate ratio bound")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_recommend_epsilon)

    p = sub.add_parser("verify", help="re-check a solution file against its instance")
    p.add_argument("--input", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_verify)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleBoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INFEASIBLE
    except OracleLimitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ORACLE_LIMIT
    except (InstanceError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID_INPUT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
