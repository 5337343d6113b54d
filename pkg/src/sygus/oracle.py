"""External oracles: process invocation over the command-line and
query-file transports, transcripts, template instantiation and a
table-driven stub oracle."""

from __future__ import annotations

import os
import shlex
import shutil
import stat
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field

from .errors import SygusError
from .evaluator import EvalIssue, Evaluator, evaluate, expand_macros, make_env, substitute
from .reader import SExpr, print_sexpr, read_all
from .syntax import App, Id, Term, parse_term, strip_annotations, subterms
from .values import format_value, parse_value, parse_value_untyped, value_to_term

DEFAULT_TIMEOUT = 10.0


class Resolver:
    """Map oracle names to executables: explicit mapping, then path, then PATH."""

    def __init__(self, mapping: dict | None = None):
        self.mapping = dict(mapping or {})

    def resolve(self, name: str) -> str:
        if name in self.mapping:
            return self.mapping[name]
        if os.sep in name or os.path.exists(name):
            if os.path.isfile(name) and os.access(name, os.X_OK):
                return os.path.abspath(name)
        found = shutil.which(name)
        if found is None:
            raise SygusError("E-ORACLE-SPAWN", f"cannot find an executable for oracle {name}")
        return found


@dataclass(frozen=True)
class OracleCall:
    binding: object  # session.OracleBinding
    inputs: tuple
    outputs: tuple
    raw_request: str
    raw_reply: str


def format_tuple(values) -> str:
    return "(" + " ".join(format_value(v) for v in values) + ")"


def _run(argv, timeout):
    try:
        return subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        raise SygusError("E-ORACLE-TIMEOUT", f"oracle {argv[0]} did not answer within {timeout} s") from None
    except OSError as e:
        raise SygusError("E-ORACLE-SPAWN", f"cannot run oracle {argv[0]}: {e}") from None


def parse_reply(text: str, outvars, sig=None) -> tuple:
    try:
        exprs = read_all(text)
    except SygusError as e:
        raise SygusError("E-ORACLE-REPLY", f"unreadable oracle reply: {e.message}") from None
    if len(exprs) != 1 or not exprs[0].is_list:
        raise SygusError("E-ORACLE-REPLY", f"oracle reply must be one parenthesized tuple, got {text.strip()!r}")
    items = exprs[0].children
    if len(items) != len(outvars):
        raise SygusError("E-ORACLE-REPLY", f"oracle replied with {len(items)} values, expected {len(outvars)}")
    out = []
    for e, (name, s) in zip(items, outvars):
        try:
            out.append(parse_value(e, s, sig))
        except SygusError as err:
            raise SygusError("E-ORACLE-SORT", f"output {name}: {err.message}") from None
    return tuple(out)


def invoke(
    binding,
    inputs,
    resolver: Resolver | None = None,
    timeout: float = DEFAULT_TIMEOUT,
    sig=None,
    keep_files: bool = False,
) -> OracleCall:
    """Run the oracle of ``binding`` on ``inputs`` and parse its reply."""
    resolver = resolver or Resolver()
    if len(inputs) != len(binding.invars):
        raise SygusError("E-ORACLE-SORT", f"oracle {binding.oracle_name} expects {len(binding.invars)} inputs")
    exe = resolver.resolve(binding.oracle_name)
    request = format_tuple(inputs)
    if binding.transport == "file":
        tmp = tempfile.mkdtemp(prefix="sygus-oracle-")
        path = os.path.join(tmp, "input.query")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(request + "\n")
        try:
            proc = _run([exe, path], timeout)
        finally:
            if not keep_files:
                shutil.rmtree(tmp, ignore_errors=True)
    else:
        proc = _run([exe, *(format_value(v) for v in inputs)], timeout)
    if proc.returncode != 0:
        raise SygusError(
            "E-ORACLE-EXIT", f"oracle {binding.oracle_name} exited with status {proc.returncode}: {proc.stderr.strip()}"
        )
    outputs = parse_reply(proc.stdout, binding.outvars, sig)
    return OracleCall(binding, tuple(inputs), outputs, request, proc.stdout)


def instantiate(call: OracleCall) -> Term:
    """The template with inputs and outputs substituted by their values."""
    b = call.binding
    names = [n for n, _ in b.invars] + [n for n, _ in b.outvars]
    values = list(call.inputs) + list(call.outputs)
    return substitute(b.template, {n: value_to_term(v) for n, v in zip(names, values)})


def pinned_function(binding, oracle_vars):
    """Name of the oracle-valued symbol a binding pins pointwise, if any."""
    t = strip_annotations(binding.template)
    if binding.kind != "assume" or len(binding.outvars) != 1:
        return None
    if not (isinstance(t, App) and t.head.symbol == "=" and len(t.args) == 2):
        return None
    lhs, rhs = t.args
    ins = [n for n, _ in binding.invars]
    if not (isinstance(rhs, Id) and rhs.name == binding.outvars[0][0]):
        return None
    if isinstance(lhs, App) and not lhs.head.indices and lhs.head.symbol in oracle_vars:
        if [a.name if isinstance(a, Id) else None for a in lhs.args] == ins:
            return lhs.head.symbol
    if isinstance(lhs, Id) and lhs.name in oracle_vars and not ins:
        return lhs.name
    return None


@dataclass
class Transcript:
    calls: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    pins: list = field(default_factory=list)  # (name, args, result)

    def record(self, call: OracleCall, oracle_vars=()):
        self.calls.append(call)
        t = instantiate(call)
        if call.binding.kind == "constraint":
            self.constraints.append(t)
        else:
            self.assumptions.append(t)
        f = pinned_function(call.binding, oracle_vars)
        if f is not None:
            self.pins.append((f, tuple(call.inputs), call.outputs[0]))
        return t

    def function_points(self):
        return list(self.pins)

    def dump(self, state) -> str:
        """Text form: one ``(call k (inputs) (outputs))`` per call."""
        lines = []
        for c in self.calls:
            k = state.oracle_bindings.index(c.binding)
            lines.append(f"(call {k} {format_tuple(c.inputs)} {format_tuple(c.outputs)})")
        return "\n".join(lines) + ("\n" if lines else "")

    @staticmethod
    def load(text: str, state) -> "Transcript":
        tr = Transcript()
        for e in read_all(text):
            if not (e.is_list and len(e) == 4 and e[0].text == "call"):
                raise SygusError("E-SYNTAX", f"malformed transcript entry {print_sexpr(e)}")
            b = state.oracle_bindings[int(e[1].text)]
            ins = tuple(parse_value(v, s, state.signature) for v, (_, s) in zip(e[2].children, b.invars))
            outs = tuple(parse_value(v, s, state.signature) for v, (_, s) in zip(e[3].children, b.outvars))
            tr.record(OracleCall(b, ins, outs, format_tuple(ins), format_tuple(outs)), state.oracle_vars)
        return tr


def replay(state, transcript: Transcript):
    """A copy of ``state`` with the transcript's formulas appended, no invocation."""
    st = state.copy()
    st.constraints.extend(transcript.constraints)
    st.constraint_origins.extend(["oracle"] * len(transcript.constraints))
    st.assumptions.extend(transcript.assumptions)
    return st


class OracleSession:
    """Drives the oracles of a state, appending derived formulas to it."""

    def __init__(self, state, resolver: Resolver | None = None, timeout: float = DEFAULT_TIMEOUT, keep_files=False):
        self.state = state
        self.resolver = resolver or Resolver()
        self.timeout = timeout
        self.keep_files = keep_files
        self.transcript = Transcript()

    def query(self, binding, inputs) -> Term:
        call = invoke(binding, inputs, self.resolver, self.timeout, self.state.signature, self.keep_files)
        t = self.transcript.record(call, self.state.oracle_vars)
        if binding.kind == "constraint":
            self.state.constraints.append(t)
            self.state.constraint_origins.append("oracle")
        else:
            self.state.assumptions.append(t)
        return t

    def bindings(self, kind=None):
        return [b for b in self.state.oracle_bindings if kind is None or b.kind == kind]

    def ground_applications(self, name: str) -> list[tuple]:
        """Argument tuples of closed applications of ``name`` in the state."""
        st = self.state
        env = make_env(st.signature)
        seen = []
        for t in list(st.constraints) + list(st.assumptions):
            for s in subterms(expand_macros(t, st.signature)):
                if isinstance(s, App) and not s.head.indices and s.head.symbol == name:
                    try:
                        args = tuple(evaluate(a, env) for a in s.args)
                    except EvalIssue:
                        continue
                    if args not in seen:
                        seen.append(args)
        return seen

    def saturate_oracle_funs(self) -> int:
        """Query every oracle-valued function at its closed applications."""
        n = 0
        done = {(f, args) for f, args, _ in self.transcript.pins}
        for b in self.bindings("assume"):
            f = pinned_function(b, self.state.oracle_vars)
            if f is None:
                continue
            for args in self.ground_applications(f):
                if (f, args) in done:
                    continue
                self.query(b, list(args))
                done.add((f, args))
                n += 1
        return n


# ---------------------------------------------------------------------------
# Stub oracle


@dataclass
class StubTable:
    entries: list  # (inputs tuple, raw output SExpr)
    fallback: tuple | None = None  # terms

    @staticmethod
    def parse(text: str) -> "StubTable":
        entries = []
        fallback = None
        for e in read_all(text):
            if e.is_list and len(e) >= 1 and e[0].kind == "symbol" and e[0].text == "fallback":
                fallback = tuple(parse_term(t) for t in e.children[1:])
                continue
            if not (e.is_list and len(e) == 2 and e[0].is_list and e[1].is_list):
                raise SygusError("E-SYNTAX", f"stub table entries are ((inputs) (outputs)) pairs: {print_sexpr(e)}")
            ins = tuple(parse_value_untyped(v) for v in e[0].children)
            entries.append((ins, e[1]))
        return StubTable(entries, fallback)

    def answer(self, inputs: tuple) -> str | None:
        for ins, out in self.entries:
            if ins == inputs:
                return print_sexpr(out)
        if self.fallback is None:
            return None
        local = {f"x{i + 1}": v for i, v in enumerate(inputs)}
        if inputs:
            local["x"] = inputs[0]
        env = make_env(values=local)
        vals = [Evaluator(env).eval(t, local) for t in self.fallback]
        return format_tuple(vals)


def stub_oracle_main(table_file: str, file_mode: bool, argv) -> tuple[int, str, str]:
    """Run the stub oracle; returns (exit code, stdout, stderr)."""
    try:
        with open(table_file, encoding="utf-8") as fh:
            table = StubTable.parse(fh.read())
        if file_mode:
            if len(argv) != 1:
                return 2, "", "file mode expects exactly one query file\n"
            with open(argv[0], encoding="utf-8") as fh:
                exprs = read_all(fh.read())
            if len(exprs) != 1 or not exprs[0].is_list:
                return 2, "", "query file must hold one parenthesized tuple\n"
            inputs = tuple(parse_value_untyped(e) for e in exprs[0].children)
        else:
            inputs = tuple(parse_value_untyped(read_one_value(a)) for a in argv)
        out = table.answer(inputs)
    except (SygusError, EvalIssue, OSError) as e:
        return 3, "", f"{e}\n"
    if out is None:
        return 3, "", "no table entry matches the input\n"
    return 0, out + "\n", ""


def read_one_value(text: str) -> SExpr:
    exprs = read_all(text)
    if len(exprs) != 1:
        raise SygusError("E-VALUE", f"expected one value, got {text!r}")
    return exprs[0]


def write_stub_script(directory: str, name: str, table_file: str, file_mode: bool = False) -> str:
    """Create an executable wrapper that runs the stub oracle on ``table_file``."""
    path = os.path.join(directory, name)
    mode = " --file-mode" if file_mode else ""
    cmd = f"{shlex.quote(sys.executable)} -m sygus.cli oracle-stub --table {shlex.quote(table_file)}{mode}"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f'#!/bin/sh\nexec {cmd} "$@"\n')
    os.chmod(path, os.stat(path).st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return path
