"""Command-line interface: constants, run, bench, compare, isu-diagnostic."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .adaptive import AdaptiveOptions, run_adaptive
from .constants import h, schedule_integral, solve_alpha
from .core import parse_function_spec
from .engine import EngineOptions, run_ea
from .harness import (
    BenchReport,
    ConfigError,
    ExperimentConfig,
    _dump_json,
    compare_policies,
    parse_policy,
    run_grid,
)
from .isu import lower_bound_diagnostic, make_rates, parse_isu_spec, run_isu
from .policies import constant_policy, make_rate_stream


def _cmd_constants(args) -> int:
    tol = args.tol
    consts = solve_alpha(tol)
    residual = schedule_integral(consts.alpha, tol / 10.0) - 1.0
    out = {
        "alpha": consts.alpha,
        "beta": consts.beta,
        "h_alpha_beta": h(consts.alpha, consts.beta, tol / 10.0),
        "eq1_residual": residual,
        "tolerance": tol,
    }
    print(_dump_json(out))
    return 0


def _cmd_run(args) -> int:
    f = parse_function_spec(args.fn)
    policy = parse_policy(args.policy)
    trace_path = Path(args.trace) if args.trace else None

    if policy.kind == "adaptive":
        opts = AdaptiveOptions(epsilon=policy.epsilon, max_evals=args.max_evals)
        result, trace = run_adaptive(f, opts, seed=args.seed)
        if trace_path:
            with trace_path.open("w") as fh:
                for r in trace.rounds:
                    fh.write(
                        _dump_json(
                            {
                                "m": r.m,
                                "S": r.S,
                                "m_prime": r.m_prime,
                                "estimation_evals": r.estimation_evals,
                                "optimization_executed": r.optimization_executed,
                                "optimization_evals": r.optimization_evals,
                            }
                        )
                        + "\n"
                    )
    else:
        stride = args.trace_stride if trace_path else None
        opts = EngineOptions(max_evals=args.max_evals, trajectory_stride=stride)
        if policy.kind == "isu":
            rates = make_rates(policy.isu_spec, f.n)
            result = run_isu(f, rates, opts, seed=args.seed)
        else:
            spec = constant_policy(1.0 / f.n) if policy.kind == "known-n" else policy.stream_spec
            result = run_ea(f, make_rate_stream(spec), opts, seed=args.seed)
        if trace_path and result.trajectory is not None:
            with trace_path.open("w") as fh:
                for evals, fit in result.trajectory:
                    fh.write(_dump_json({"evaluations": evals, "fitness": fit}) + "\n")

    print(
        _dump_json(
            {
                "function": args.fn,
                "policy": args.policy,
                "seed": result.seed,
                "evaluations": result.evaluations,
                "found": result.found,
            }
        )
    )
    return 0


def _cmd_bench(args) -> int:
    try:
        config = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    report = run_grid(config)
    if not config.report_path:
        print(report.to_json(), end="")
    return 0


def _cmd_compare(args) -> int:
    a = BenchReport.from_json(Path(args.a).read_text())
    b = BenchReport.from_json(Path(args.b).read_text())
    rec = compare_policies(a, b, args.n, args.policy_a, args.policy_b)
    print(_dump_json(rec.to_dict()))
    return 0


def _cmd_isu_diagnostic(args) -> int:
    token = args.spec
    if token.startswith("isu:"):
        token = token[4:]
    spec = parse_isu_spec(token)
    rates = make_rates(spec, args.n)
    out = {
        "spec": args.spec,
        "n": args.n,
        "S_n": sum(rates.rates),
        "M_n": lower_bound_diagnostic(rates, args.n),
    }
    print(_dump_json(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hsea",
        description="(1+1) EA on linear functions with hidden support: "
        "simulation, schedules, adaptive estimation, ISU model.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="solve for alpha/beta and print them as JSON")
    c.add_argument("--tol", type=float, default=1e-8)
    c.set_defaults(fn_=_cmd_constants)

    r = sub.add_parser("run", help="single seeded run")
    r.add_argument("--fn", required=True, help="onemax:<n> | binval:<n> | random:<n>:<w_max>:<seed>")
    r.add_argument(
        "--policy",
        required=True,
        help="constant:<p> | optimal | scaled:<c> | known-n | table:<path> | "
        "adaptive[:<eps>] | isu:iterlog:<k> | isu:custom:<path>",
    )
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--max-evals", type=int, default=None, dest="max_evals")
    r.add_argument("--trace", default=None, help="write trace as JSON lines")
    r.add_argument("--trace-stride", type=int, default=1000, dest="trace_stride")
    r.set_defaults(fn_=_cmd_run)

    b = sub.add_parser("bench", help="run an experiment grid from a JSON config")
    b.add_argument("--config", required=True)
    b.set_defaults(fn_=_cmd_bench)

    cmp_ = sub.add_parser("compare", help="ratio of mean runtimes from two reports")
    cmp_.add_argument("--a", required=True)
    cmp_.add_argument("--b", required=True)
    cmp_.add_argument("--n", type=int, required=True)
    cmp_.add_argument("--policy-a", default=None, dest="policy_a")
    cmp_.add_argument("--policy-b", default=None, dest="policy_b")
    cmp_.set_defaults(fn_=_cmd_compare)

    d = sub.add_parser("isu-diagnostic", help="lower-bound diagnostic M_n for a rate sequence")
    d.add_argument("--spec", required=True, help="isu:iterlog:<k> | isu:custom:<path>")
    d.add_argument("--n", type=int, required=True)
    d.set_defaults(fn_=_cmd_isu_diagnostic)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn_(args)
    except (ConfigError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
