"""Command-line entry point."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import benchgen
from .config import ConfigError, dump_config, instance_to_config, load_config
from .grounding import ground, prune
from .heuristics import HEURISTICS
from .model import ProblemInstance
from .pddl import PddlError, emit_domain, read_domain, read_problem
from .planner import SearchConfig
from .report import (
    EXIT_INVALID,
    EXIT_OK,
    EXIT_USAGE,
    render_dot,
    run_pipeline,
    stats_rows,
    write_pddl,
)
from .validator import PlanParseError, parse_plan, validate


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_instance(path: str, domain: str | None = None) -> ProblemInstance:
    p = Path(path)
    try:
        if p.suffix == ".pddl":
            read_domain(Path(domain).read_text() if domain else emit_domain())
            return read_problem(p.read_text())
        return load_config(p)
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror}") from None
    except ConfigError as e:
        raise UsageError(f"config: {e}") from None
    except PddlError as e:
        raise UsageError(f"pddl: {path}: {e}") from None


def _search_config(args) -> SearchConfig:
    try:
        return SearchConfig.parse_strategy(
            args.strategy, heuristic=args.heuristic, time_budget=args.time_budget,
            memory_budget=args.mem_budget, seed=args.seed, max_expansions=args.max_expansions,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_plan(args) -> int:
    inst = load_instance(args.problem, args.domain)
    out = Path(args.out)
    if args.emit_pddl:
        for f in write_pddl(inst, out):
            print(f)
        return EXIT_OK
    res = run_pipeline(inst, _search_config(args), out, dot=args.dot, timings=not args.no_timings)
    print(f"{inst.name}: {res.status}")
    for w in res.witness:
        print(f"  unreachable: {w}")
    if res.report is not None and not res.report.valid:
        print(res.report.to_kv(), end="")
    for f in res.files:
        print(f"  wrote {f}")
    return res.exit_code


def cmd_validate(args) -> int:
    inst = load_instance(args.problem, args.domain)
    try:
        text = Path(args.plan).read_text()
    except OSError as e:
        raise UsageError(f"{args.plan}: {e.strerror}") from None
    try:
        steps = parse_plan(text)
    except PlanParseError as e:
        print(f"{args.plan}:{e.line}: {e}", file=sys.stderr)
        print("valid: false")
        return EXIT_INVALID
    report = validate(ground(inst), steps)
    _write(args.out, report.to_kv())
    return EXIT_OK if report.valid else EXIT_INVALID


def cmd_emit_pddl(args) -> int:
    inst = load_instance(args.problem)
    for f in write_pddl(inst, Path(args.out)):
        print(f)
    return EXIT_OK


def _params(pairs: list[str]) -> dict[str, str]:
    out = {}
    for p in pairs:
        key, sep, value = p.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {p!r}")
        out[key.strip()] = value.strip()
    return out


def _int(params: dict, key: str, default: int | None = None) -> int:
    if key not in params:
        if default is None:
            raise UsageError(f"missing --param {key}=...")
        return default
    try:
        return int(params[key])
    except ValueError:
        raise UsageError(f"--param {key} must be an integer") from None


def cmd_gen(args) -> int:
    params = _params(args.param or [])
    try:
        if args.family == "vary":
            kind = params.get("kind", "sites")
            inst = benchgen.gen_vary(kind, _int(params, "n"), seed=args.seed)
        elif args.family == "complex":
            inst = benchgen.gen_complex(_int(params, "length"), seed=args.seed)
        else:
            inst = benchgen.gen_calibration(_int(params, "wfc", 2), _int(params, "sites", 1))
    except ValueError as e:
        raise UsageError(str(e)) from None
    _write(args.out, dump_config(instance_to_config(inst)))
    return EXIT_OK


def cmd_stats(args) -> int:
    rows = []
    for path in args.problems:
        inst = load_instance(path)
        rows.append((inst.name, prune(ground(inst)).stats))
    _write(args.out, stats_rows(rows))
    return EXIT_OK


def cmd_viz(args) -> int:
    inst = load_instance(args.problem)
    report = None
    if args.plan:
        try:
            report = validate(ground(inst), parse_plan(Path(args.plan).read_text()))
        except (OSError, PlanParseError) as e:
            raise UsageError(f"{args.plan}: {e}") from None
    _write(args.out, render_dot(inst, report))
    return EXIT_OK


def _write(out: str | None, text: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="worksworld", description="Plan workflow placement over a resource graph.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan", help="run ground, prune, search and validate")
    p.add_argument("problem", help="YAML config or .pddl problem")
    p.add_argument("--domain", help="domain file when the problem is PDDL")
    p.add_argument("--out", default="out", help="artifact directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-budget", type=float, default=300.0, help="seconds")
    p.add_argument("--mem-budget", type=float, default=4096.0, help="MB of peak resident memory")
    p.add_argument("--strategy", default="gbfs", help="gbfs | weighted-astar(W)")
    p.add_argument("--heuristic", default="relaxed-plan-length", choices=HEURISTICS)
    p.add_argument("--max-expansions", type=int, default=1_000_000)
    p.add_argument("--emit-pddl", action="store_true", help="only write domain and problem files")
    p.add_argument("--dot", action="store_true", help="also write DOT views")
    p.add_argument("--no-timings", action="store_true", help="write zero timings for byte-stable metrics")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="check a plan file against a problem")
    p.add_argument("problem")
    p.add_argument("plan")
    p.add_argument("--domain")
    p.add_argument("--out", help="report file (default stdout)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("emit-pddl", help="write domain.pddl and <name>.problem.pddl")
    p.add_argument("problem")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_emit_pddl)

    p = sub.add_parser("gen", help="generate a benchmark config")
    p.add_argument("--family", required=True, choices=("vary", "complex", "calibration"))
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="vary: kind, n; complex: length; calibration: wfc, sites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output YAML (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats", help="grounding counts before and after pruning")
    p.add_argument("problems", nargs="+")
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("viz", help="DOT view of an instance, or of a plan's result")
    p.add_argument("problem")
    p.add_argument("--plan")
    p.add_argument("--out", help="DOT file (default stdout)")
    p.set_defaults(func=cmd_viz)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"worksworld {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
