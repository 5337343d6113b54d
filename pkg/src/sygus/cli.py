"""Command-line frontend.

Exit codes: 0 ok, 1 diagnostics / failed check, 2 usage, 3 internal or
oracle failure, 4 unknown verdict.
"""

from __future__ import annotations

import argparse
import json
import sys

from .diagnostics import Diagnostic
from .errors import SygusError
from .grammar import Enumerator, weight_sets
from .oracle import OracleSession, Resolver, stub_oracle_main
from .reader import read_one
from .session import desugar_text, load, load_state
from .solver import solve_enumerative
from .syntax import parse_term, print_term
from .verify import (
    DomainSpec,
    OptSolution,
    Solution,
    check_optimize,
    check_semantic_bounded,
    check_syntactic,
    emit_smt,
    parse_response,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL, EXIT_UNKNOWN = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _print_diags(diags, as_json: bool, out):
    for d in diags:
        out.write((d.json() if as_json else d.line()) + "\n")


def _report_error(err: SygusError, as_json: bool = False) -> int:
    _print_diags([Diagnostic.from_error(err)], as_json, sys.stderr)
    return EXIT_INTERNAL if err.code.startswith("E-ORACLE") else EXIT_FAIL


def _load_state(args):
    return load_state(_read(args.file), permissive=args.permissive)


def cmd_validate(args) -> int:
    res = load(_read(args.file), permissive=args.permissive and not args.strict)
    _print_diags(res.diagnostics, args.json, sys.stdout)
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_desugar(args) -> int:
    sys.stdout.write(desugar_text(_read(args.file), permissive=args.permissive, expand=args.expand))
    return EXIT_OK


def _domain(args) -> DomainSpec:
    kw = {"bound": args.bound, "samples": args.samples, "seed": args.seed}
    if args.fuel is not None:
        kw["fuel"] = args.fuel
    return DomainSpec(**kw)


def cmd_check(args) -> int:
    state = _load_state(args)
    resp = parse_response(_read(args.solution), state)
    if not isinstance(resp, (Solution, OptSolution)):
        print(f"no solution to check: {resp}")
        return EXIT_UNKNOWN
    syn = check_syntactic(state, resp)
    print(f"syntactic: {syn}")
    if not syn.ok:
        return EXIT_FAIL
    domain = _domain(args)
    if isinstance(resp, OptSolution):
        verdict = check_optimize(state, resp, domain)
    else:
        verdict = check_semantic_bounded(state, resp, domain)
    print(f"semantic: {verdict}")
    return {"passed-bounded": EXIT_OK, "refuted": EXIT_FAIL}.get(verdict.status, EXIT_UNKNOWN)


def cmd_emit_smt(args) -> int:
    state = _load_state(args)
    resp = parse_response(_read(args.solution), state)
    if not isinstance(resp, (Solution, OptSolution)):
        print(f"no solution to emit: {resp}", file=sys.stderr)
        return EXIT_FAIL
    text = emit_smt(state, resp, allow_pump_truncation=args.allow_pump_truncation)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def _grammar_of(state, name):
    rs = state.grammars.get(name)
    if rs is None:
        raise SygusError("E-UNBOUND", f"no grammar for function {name}")
    return rs


def cmd_enumerate(args) -> int:
    state = _load_state(args)
    rs = _grammar_of(state, args.fun)
    for t in Enumerator(rs).enumerate(rs.start, args.max_size):
        print(print_term(t))
    return EXIT_OK


def cmd_weights(args) -> int:
    state = _load_state(args)
    rs = _grammar_of(state, args.fun)
    term = parse_term(read_one(args.term))
    print(weight_sets(rs, args.keyword, term).render())
    return EXIT_OK


def _resolver(pairs) -> Resolver:
    mapping = {}
    for p in pairs or ():
        name, sep, path = p.partition("=")
        if not sep or not name or not path:
            raise SygusError("E-SYNTAX", f"--oracle expects name=path, got {p!r}")
        mapping[name] = path
    return Resolver(mapping)


def cmd_solve(args) -> int:
    state = _load_state(args)
    session = None
    if state.oracle_bindings:
        session = OracleSession(state, _resolver(args.oracle))
    resp = solve_enumerative(
        state, max_size=args.max_size, time_budget=args.timeout, domain=DomainSpec(seed=args.seed),
        oracle_session=session,
    )
    print(resp)
    return EXIT_OK if isinstance(resp, Solution) else EXIT_FAIL


def cmd_oracle_stub(args) -> int:
    code, out, err = stub_oracle_main(args.table, args.file_mode, args.args)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sygus", description="SyGuS-IF toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_file(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("file")
        sp.add_argument("--permissive", action="store_true", help="enable documented relaxations")
        return sp

    sp = with_file("validate", "parse, sort-check and validate a script")
    sp.add_argument("--strict", action="store_true", help="exact mode without relaxations (the default)")
    sp.add_argument("--json", action="store_true", help="one JSON object per diagnostic")
    sp.set_defaults(run=cmd_validate)

    sp = with_file("desugar", "print the core-form script")
    sp.add_argument("--expand", action="store_true", help="expand sugar-introduced macros")
    sp.set_defaults(run=cmd_desugar)

    sp = with_file("check", "check a response against a script")
    sp.add_argument("--solution", required=True)
    sp.add_argument("--bound", type=int, default=50)
    sp.add_argument("--samples", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--fuel", type=int, default=None)
    sp.set_defaults(run=cmd_check)

    sp = with_file("emit-smt", "write the verification query as SMT-LIB")
    sp.add_argument("--solution", required=True)
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--allow-pump-truncation", action="store_true")
    sp.set_defaults(run=cmd_emit_smt)

    sp = with_file("enumerate", "list the terms of a grammar by size")
    sp.add_argument("--fun", required=True)
    sp.add_argument("--max-size", type=int, default=4)
    sp.set_defaults(run=cmd_enumerate)

    sp = with_file("weights", "weight set of a term w.r.t. a keyword")
    sp.add_argument("--fun", required=True)
    sp.add_argument("--keyword", required=True)
    sp.add_argument("--term", required=True)
    sp.set_defaults(run=cmd_weights)

    sp = with_file("solve", "enumerative solver")
    sp.add_argument("--max-size", type=int, default=8)
    sp.add_argument("--timeout", type=float, default=60.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--oracle", action="append", metavar="NAME=PATH")
    sp.set_defaults(run=cmd_solve)

    sp = sub.add_parser("oracle-stub", help="table-driven oracle for testing")
    sp.add_argument("--table", required=True)
    sp.add_argument("--file-mode", action="store_true")
    sp.add_argument("args", nargs=argparse.REMAINDER)
    sp.set_defaults(run=cmd_oracle_stub)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.run(args)
    except SygusError as e:
        return _report_error(e, getattr(args, "json", False))
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
