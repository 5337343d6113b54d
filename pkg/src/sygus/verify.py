"""Solver responses: parsing, syntactic and bounded semantic checking,
objective comparison and SMT-LIB emission."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import SygusError
from .evaluator import (
    DEFAULT_FUEL,
    Definition,
    EvalIssue,
    Evaluator,
    OutOfFuel,
    TableFun,
    Undefined,
    Unsupported,
    expand_macros,
    free_symbols,
    make_env,
    substitute,
)
from .grammar import first_underivable, generates, weight_sets
from .logics import check_term_in_logic
from .reader import SExpr, print_sexpr, read_all
from .syntax import (
    BOOL,
    INT,
    REAL,
    STRING,
    Annot,
    Assume,
    CheckSynth,
    Command,
    Constraint,
    DeclareDatatype,
    DeclareDatatypes,
    DeclareSort,
    DeclareVar,
    DeclareWeight,
    DefineFun,
    DefineFunRec,
    DefineSort,
    Id,
    Identifier,
    Lit,
    OptimizeSynth,
    Sort,
    SynthFun,
    Term,
    app,
    bv_width,
    conj,
    parse_command,
    print_term,
    subterms,
    sym,
)
from .theories import is_weight_symbol, sort_check
from .values import BitVec, DTValue, coerce, format_value, parse_value, parse_value_untyped

# ---------------------------------------------------------------------------
# Responses


@dataclass(frozen=True)
class FunDef:
    kind: str  # define-fun | define-fun-rec
    name: str
    params: tuple[tuple[str, Sort], ...]
    sort: Sort
    body: Term

    def __str__(self):
        ps = " ".join(f"({n} {s})" for n, s in self.params)
        return f"({self.kind} {self.name} ({ps}) {self.sort} {print_term(self.body)})"


@dataclass(frozen=True)
class Solution:
    defs: tuple[FunDef, ...]

    def __str__(self):
        return "(" + "\n".join(["", *(f"  {d}" for d in self.defs), ""]) + ")"


@dataclass(frozen=True)
class OptSolution:
    values: tuple
    defs: tuple[FunDef, ...]

    def __str__(self):
        vals = "(" + " ".join(format_value(v) for v in self.values) + ")"
        return "(" + "\n".join(["", vals, *(f"  {d}" for d in self.defs), ""]) + ")"


@dataclass(frozen=True)
class Infeasible:
    def __str__(self):
        return "infeasible"


@dataclass(frozen=True)
class Fail:
    def __str__(self):
        return "fail"


Response = Solution | OptSolution | Infeasible | Fail


def _is_def(e: SExpr) -> bool:
    return e.is_list and len(e) > 0 and e[0].kind == "symbol" and e[0].text in ("define-fun", "define-fun-rec")


def parse_response(text: str, state=None) -> Response:
    """Parse a solver response; with ``state``, also check it is well formed."""
    try:
        exprs = read_all(text)
    except SygusError as e:
        raise SygusError("E-RESPONSE", f"unreadable response: {e.message}") from None
    if len(exprs) != 1:
        raise SygusError("E-RESPONSE", f"expected one response, found {len(exprs)} expressions")
    e = exprs[0]
    if e.kind == "symbol" and e.text == "fail":
        return Fail()
    if e.kind == "symbol" and e.text == "infeasible":
        return Infeasible()
    if not e.is_list:
        raise SygusError("E-RESPONSE", f"unexpected response {print_sexpr(e)}")
    items = list(e.children)
    values = None
    if items and items[0].is_list and not _is_def(items[0]):
        values = items.pop(0)
    defs = []
    for d in items:
        if not _is_def(d):
            raise SygusError("E-RESPONSE", f"expected a function definition, found {print_sexpr(d)}")
        c = parse_command(d)
        defs.append(FunDef(c.head, c.name, c.params, c.sort, c.body))
    defs = tuple(defs)
    if values is None and state is not None and state.objective is not None:
        raise SygusError("E-RESPONSE", "optimize-synth expects a tuple of objective values first")
    if values is not None:
        vals = _parse_values(values, state)
        resp = OptSolution(vals, defs)
    else:
        resp = Solution(defs)
    if state is not None:
        check_well_formed(state, resp)
    return resp


def _parse_values(e: SExpr, state):
    if state is None:
        return tuple(parse_value_untyped(v) for v in e.children)
    if state.objective is None:
        raise SygusError("E-RESPONSE", "objective values given, but the problem has no optimize-synth")
    terms = state.objective.terms
    if len(terms) != len(e.children):
        raise SygusError("E-RESPONSE", f"expected {len(terms)} objective values, found {len(e.children)}")
    out = []
    for t, v in zip(terms, e.children):
        s = sort_check(t, state.signature)
        try:
            out.append(parse_value(v, s, state.signature))
        except SygusError as err:
            raise SygusError("E-RESPONSE", err.message) from None
    return tuple(out)


def check_well_formed(state, resp):
    defs = resp.defs
    funs = state.funs
    names = [d.name for d in defs]
    want = [f.name for f in funs]
    if names != want:
        raise SygusError("E-RESPONSE", f"definitions ({' '.join(names)}) do not match functions ({' '.join(want)})")
    for f, d in zip(funs, defs):
        if tuple(d.params) != tuple(f.params):
            raise SygusError("E-RESPONSE", f"argument list of {d.name} differs from its synth-fun declaration")
        if d.sort != f.sort:
            raise SygusError("E-RESPONSE", f"{d.name} returns {d.sort}, expected {f.sort}")
        recursive = d.name in free_symbols(d.body)
        if recursive and d.kind == "define-fun":
            raise SygusError("E-RESPONSE", f"{d.name} is recursive and must use define-fun-rec")
        if not recursive and d.kind == "define-fun-rec":
            raise SygusError("E-RESPONSE", f"{d.name} is not recursive and must use define-fun")
        try:
            s = sort_check(d.body, state.signature, dict(d.params))
        except SygusError as err:
            raise SygusError("E-RESPONSE", f"body of {d.name}: {err.message}") from None
        if s != f.sort:
            raise SygusError("E-RESPONSE", f"body of {d.name} has sort {s}, expected {f.sort}")


# ---------------------------------------------------------------------------
# Syntactic check


@dataclass(frozen=True)
class SyntacticResult:
    ok: bool
    failures: tuple[tuple[str, str], ...] = ()

    def __str__(self):
        if self.ok:
            return "pass"
        return "fail: " + "; ".join(f"{n}: {r}" for n, r in self.failures)


def check_syntactic(state, resp) -> SyntacticResult:
    failures = []
    for f, d in zip(state.funs, resp.defs):
        rs = state.grammars.get(f.name)
        if rs is not None:
            stray = free_symbols(d.body) & rs.nt_names - {n for n, _ in f.params}
            if stray:
                failures.append((f.name, f"body mentions non-terminal {sorted(stray)[0]}"))
                continue
            if not generates(rs, rs.start, d.body):
                bad = first_underivable(rs, rs.start, d.body)
                where = f"; {print_term(bad)} is not derivable" if bad is not None else ""
                failures.append((f.name, f"body is not generated by the grammar{where}"))
            continue
        try:
            s = sort_check(d.body, state.signature, dict(f.params))
        except SygusError as e:
            failures.append((f.name, e.message))
            continue
        if s != f.sort:
            failures.append((f.name, f"body has sort {s}, expected {f.sort}"))
            continue
        out = state.logic.output
        if out.flavor != "core":
            bad = check_term_in_logic(out.spec, expand_macros(d.body, state.signature), state.signature, False)
            if bad is not None:
                failures.append((f.name, bad.message))
    return SyntacticResult(not failures, tuple(failures))


# ---------------------------------------------------------------------------
# Bounded semantic check


@dataclass(frozen=True)
class DomainSpec:
    bound: int = 50
    samples: int = 500
    seed: int = 0
    fuel: int = DEFAULT_FUEL
    exhaustive_limit: int = 20000
    alphabet: str = "abc"
    max_string: int = 3
    bv_exhaustive: int = 8
    dt_depth: int = 3
    dt_limit: int = 2000
    pump_bound: int = 3


@dataclass(frozen=True)
class SemanticVerdict:
    status: str  # refuted | passed-bounded | unknown
    points: int = 0
    counterexample: tuple = ()
    failed: int | None = None  # 1-based index of a false constraint
    failed_term: Term | None = None
    reason: str = ""
    sigma: tuple = ()

    def __str__(self):
        if self.status == "passed-bounded":
            extra = ""
            if self.sigma:
                extra = ", " + ", ".join(f"(_ {w} {f})={k}" for (w, f), k in self.sigma)
            return f"passed-bounded ({self.points} points{extra})"
        if self.status == "refuted":
            at = ", ".join(f"{n}={format_value(v)}" for n, v in self.counterexample)
            parts = ["refuted"]
            if at:
                parts.append(f"at {at}")
            if self.failed_term is not None:
                parts.append(f"constraint {self.failed} {print_term(self.failed_term)} is false")
            elif self.reason:
                parts.append(self.reason)
            return ": ".join([parts[0], " ".join(parts[1:])]) if len(parts) > 1 else parts[0]
        return f"unknown ({self.reason})"


def _int_domain(spec):
    return list(range(-spec.bound, spec.bound + 1))


def _strings(spec):
    out = [""]
    for n in range(1, spec.max_string + 1):
        out += ["".join(p) for p in itertools.product(spec.alphabet, repeat=n)]
    return out


def _dt_values(sort: Sort, sig, spec, depth: int, small: bool = True):
    """Datatype values up to ``depth`` with small leaf domains."""
    dt = sig.datatypes[sort.name]
    out = []
    for cname, sels in dt.constructors:
        if not sels:
            out.append(DTValue(cname))
    if depth <= 1:
        return out
    for cname, sels in dt.constructors:
        if not sels:
            continue
        fields = []
        for _, s in sels:
            if s.name in sig.datatypes:
                fields.append(_dt_values(s, sig, spec, depth - 1))
            else:
                fields.append(_leaf_values(s, spec))
        for combo in itertools.product(*fields):
            out.append(DTValue(cname, tuple(combo)))
            if len(out) >= spec.dt_limit:
                return out
    return out


def _leaf_values(s: Sort, spec):
    if s == INT:
        return [-2, -1, 0, 1, 2, 4]
    if s == BOOL:
        return [False, True]
    if s == STRING:
        return ["", "a", "ab"]
    if s == REAL:
        return [Fraction(-1), Fraction(0), Fraction(1, 2), Fraction(1)]
    w = bv_width(s)
    if w is not None:
        return [BitVec(w, 0), BitVec(w, 1), BitVec(w, (1 << w) - 1)]
    raise Unsupported(f"no values for sort {s}")


def value_domain(s: Sort, sig, spec: DomainSpec):
    """A finite list of values for ``s``, or None when ``s`` must be sampled."""
    if s == BOOL:
        return [False, True]
    if s == INT:
        return _int_domain(spec)
    if s == REAL:
        return [Fraction(k, 2) for k in range(-2 * spec.bound, 2 * spec.bound + 1)]
    if s == STRING:
        return _strings(spec)
    w = bv_width(s)
    if w is not None:
        if w <= spec.bv_exhaustive:
            return [BitVec(w, v) for v in range(1 << w)]
        return None
    if s.name in sig.datatypes and not s.args:
        return _dt_values(s, sig, spec, spec.dt_depth)
    raise Unsupported(f"cannot enumerate values of sort {s}")


def _sample_bv(w, rng):
    r = rng.random()
    if r < 0.15:
        return BitVec(w, rng.choice([0, 1, (1 << w) - 1, 1 << (w - 1), (1 << (w - 1)) - 1]))
    return BitVec(w, rng.getrandbits(w))


def assignments(vars_, sig, spec: DomainSpec):
    """Yield tuples of values for ``vars_``: exhaustive when small, else sampled."""
    doms = [value_domain(s, sig, spec) for _, s in vars_]
    total = 1
    for d in doms:
        total = total * len(d) if d is not None and total is not None else None
    if total is not None and total <= spec.exhaustive_limit:
        yield from itertools.product(*doms)
        return
    rng = random.Random(spec.seed)
    for _ in range(spec.samples):
        pt = []
        for (_, s), d in zip(vars_, doms):
            pt.append(rng.choice(d) if d is not None else _sample_bv(bv_width(s), rng))
        yield tuple(pt)


def solution_defs(resp) -> dict:
    out = {}
    for d in resp.defs:
        out[d.name] = Definition(tuple(d.params), d.body, d.kind == "define-fun-rec")
    return out


def weight_occurrences(terms, state) -> list[tuple[str, str]]:
    """Distinct (keyword, function) pairs of weight symbols, in first-use order."""
    sig = state.signature
    seen = []
    pool = list(terms) + [m.body for m in sig.macros.values()]
    for t in pool:
        for s in subterms(t):
            if is_weight_symbol(s, sig):
                key = (s.ident.symbol, s.ident.indices[0])
                if key not in seen:
                    seen.append(key)
    return seen


def weight_choices(state, resp, keys, spec: DomainSpec):
    """Per weight symbol, the finite list of candidate interpretations."""
    bodies = {d.name: d.body for d in resp.defs}
    out = []
    for w, f in keys:
        rs = state.grammars.get(f)
        if rs is None or f not in bodies:
            raise Unsupported(f"weight of {f} is undefined without a grammar")
        ws = weight_sets(rs, w, bodies[f])
        if ws.empty:
            out.append([])
            continue
        top = max(ws.bases) + spec.pump_bound * max(ws.pumps, default=0)
        out.append(ws.values_up_to(top))
    return out


def _tables_from(transcript, state) -> dict:
    tables = {n: TableFun(n) for n in state.oracle_vars}
    if transcript is not None:
        for name, args, result in transcript.function_points():
            if name in tables:
                tables[name].table[tuple(args)] = result
    return tables


def check_semantic_bounded(
    state, resp, domain: DomainSpec | None = None, extra_constraints=(), transcript=None
) -> SemanticVerdict:
    """Falsify the conjecture instance on a bounded set of points."""
    spec = domain or DomainSpec()
    sig = state.signature
    constraints = list(state.constraints) + list(extra_constraints)
    assumptions = list(state.assumptions)
    defs = solution_defs(resp)
    tables = _tables_from(transcript, state)
    vars_ = [(n, s) for n, s in state.universal_vars if n not in tables]
    try:
        keys = weight_occurrences(constraints + assumptions, state)
        choices = weight_choices(state, resp, keys, spec) if keys else []
    except Unsupported as e:
        return SemanticVerdict("unknown", reason=f"unsupported: {e.reason}")
    if keys and any(not c for c in choices):
        return SemanticVerdict("refuted", reason="some weight symbol has no consistent interpretation")
    sigmas = list(itertools.product(*choices)) if keys else [()]
    verdicts = []
    for combo in sigmas:
        weights = dict(zip(keys, combo))
        v = _check_points(state, sig, defs, tables, vars_, constraints, assumptions, weights, spec)
        if v.status == "passed-bounded":
            return SemanticVerdict(v.status, v.points, sigma=tuple(weights.items()))
        verdicts.append(v)
    unknown = [v for v in verdicts if v.status == "unknown"]
    return unknown[0] if unknown else verdicts[0]


def _check_points(state, sig, defs, tables, vars_, constraints, assumptions, weights, spec) -> SemanticVerdict:
    env = make_env(sig, defs, dict(tables), weights)
    alpha = conj(assumptions) if assumptions else None
    phis = constraints
    points = 0
    unknown = None
    try:
        pts = assignments(vars_, sig, spec)
        for pt in pts:
            points += 1
            local = dict(tables)
            local.update({n: v for (n, _), v in zip(vars_, pt)})
            try:
                if alpha is not None:
                    ev = Evaluator(env, spec.fuel)
                    if ev.eval(alpha, local) is False:
                        continue
                for i, phi in enumerate(phis):
                    ev = Evaluator(env, spec.fuel)
                    if ev.eval(phi, local) is False:
                        cex = tuple((n, v) for (n, _), v in zip(vars_, pt))
                        return SemanticVerdict("refuted", points, cex, i + 1, phi)
            except OutOfFuel as e:
                unknown = unknown or f"out-of-fuel: {e.reason}"
            except Undefined as e:
                unknown = unknown or f"undefined: {e.reason}"
            except Unsupported as e:
                unknown = unknown or f"unsupported: {e.reason}"
    except Unsupported as e:
        return SemanticVerdict("unknown", points, reason=f"unsupported: {e.reason}")
    if unknown is not None:
        return SemanticVerdict("unknown", points, reason=unknown)
    return SemanticVerdict("passed-bounded", points)


# ---------------------------------------------------------------------------
# Optimization


def objective_equalities(state, resp: OptSolution) -> list[Term]:
    from .values import value_to_term

    obj = state.objective
    if obj is None:
        raise SygusError("E-RESPONSE", "the problem has no optimize-synth command")
    if len(resp.values) != len(obj.terms):
        raise SygusError("E-RESPONSE", f"expected {len(obj.terms)} objective values, got {len(resp.values)}")
    out = []
    for t, v in zip(obj.terms, resp.values):
        s = sort_check(t, state.signature)
        v = coerce(v, s, state.signature)
        out.append(app("=", _strip_outer(t), value_to_term(v)))
    return out


def _strip_outer(t):
    return t.body if isinstance(t, Annot) else t


def check_optimize(state, resp: OptSolution, domain: DomainSpec | None = None, transcript=None) -> SemanticVerdict:
    return check_semantic_bounded(state, resp, domain, objective_equalities(state, resp), transcript)


def objective_directions(objective) -> tuple[list, bool]:
    """Per-term direction (min, max or None) and whether :lexico is given."""
    dirs = []
    for t in objective.terms:
        d = None
        if isinstance(t, Annot):
            kws = {a.keyword for a in t.attrs}
            if ":min" in kws:
                d = "min"
            elif ":max" in kws:
                d = "max"
        dirs.append(d)
    lexico = any(a.keyword == ":lexico" for a in objective.attrs)
    return dirs, lexico


def _cmp_position(a, b, d):
    if a == b:
        return "="
    if d is None:
        return None
    ordered = (int, Fraction)
    if isinstance(a, bool) or isinstance(b, bool) or not isinstance(a, ordered) or not isinstance(b, ordered):
        raise SygusError("E-OPT", f"no standard order for values {format_value(a)} and {format_value(b)}")
    better = a < b if d == "min" else a > b
    return ">" if better else "<"


def compare_values(a, b, dirs, lexico: bool) -> str:
    """Compare objective tuples: a-preferred, b-preferred, equal or incomparable."""
    if len(a) != len(b) or len(a) != len(dirs):
        raise SygusError("E-OPT", "objective tuples differ in length")
    cmps = [_cmp_position(x, y, d) for x, y, d in zip(a, b, dirs)]
    if lexico:
        for c in cmps:
            if c == "=":
                continue
            if c is None:
                return "incomparable"
            return "a-preferred" if c == ">" else "b-preferred"
        return "equal"
    if any(c is None for c in cmps):
        return "incomparable"
    if all(c == "=" for c in cmps):
        return "equal"
    if all(c in (">", "=") for c in cmps):
        return "a-preferred"
    if all(c in ("<", "=") for c in cmps):
        return "b-preferred"
    return "incomparable"


def compare_solutions(a, b, objective) -> str:
    dirs, lexico = objective_directions(objective)
    av = a.values if isinstance(a, OptSolution) else tuple(a)
    bv = b.values if isinstance(b, OptSolution) else tuple(b)
    return compare_values(av, bv, dirs, lexico)


# ---------------------------------------------------------------------------
# SMT-LIB emission


def smt_logic_name(state) -> str:
    lg = state.logic.input
    if lg.flavor == "core":
        return "ALL"
    spec = lg.spec
    uf = spec.uf or bool(state.oracle_vars)
    return (
        ("A" if spec.arrays else "")
        + ("UF" if uf else "")
        + ("DT" if spec.dt else "")
        + ("S" if spec.strings else "")
        + ("BV" if spec.bv else "")
        + (spec.arith or "")
    ) or "ALL"


def _weight_const_name(w, f, avoid):
    base = f"{w}!{f}"
    name = base
    k = 0
    while name in avoid:
        name = f"{base}!{k}"
        k += 1
    avoid.add(name)
    return name


def _replace_weights(t: Term, names: dict, sig) -> Term:
    if is_weight_symbol(t, sig):
        return sym(names[(t.ident.symbol, t.ident.indices[0])])
    from .syntax import App, Lambda, Let, Quant

    if isinstance(t, App):
        return App(t.head, tuple(_replace_weights(a, names, sig) for a in t.args))
    if isinstance(t, Annot):
        return Annot(_replace_weights(t.body, names, sig), t.attrs)
    if isinstance(t, Quant):
        return Quant(t.kind, t.binders, _replace_weights(t.body, names, sig))
    if isinstance(t, Lambda):
        return Lambda(t.params, _replace_weights(t.body, names, sig))
    if isinstance(t, Let):
        return Let(tuple((n, _replace_weights(b, names, sig)) for n, b in t.bindings), _replace_weights(t.body, names, sig))
    return t


def emit_smt(state, resp, allow_pump_truncation: bool = False, extra_constraints=()) -> str:
    """SMT-LIB 2.6 query that is unsat iff the solution is valid."""
    sig = state.signature
    constraints = list(state.constraints) + list(extra_constraints)
    assumptions = list(state.assumptions)
    keys = weight_occurrences(constraints + assumptions, state)
    bodies = {d.name: d for d in resp.defs}
    avoid = set(sig.symbols) | set(sig.sorts)
    names = {k: _weight_const_name(k[0], k[1], avoid) for k in keys}
    weight_decls = {}
    for (w, f), n in names.items():
        rs = state.grammars.get(f)
        if rs is None:
            raise SygusError("E-UNSUPPORTED", f"weight symbol (_ {w} {f}) needs a grammar for {f}")
        ws = weight_sets(rs, w, bodies[f].body)
        lines = [f"(declare-const {n} Int)"]
        if ws.pumps:
            if not allow_pump_truncation:
                raise SygusError(
                    "E-UNSUPPORTED",
                    f"weights of (_ {w} {f}) form an infinite set ({ws.render()}); pass --allow-pump-truncation",
                )
            lines.append(f"; pumps {{{','.join(map(str, sorted(ws.pumps)))}}} truncated to bases")
        opts = [f"(= {n} {b})" for b in sorted(ws.bases)]
        if not opts:
            lines.append("(assert false)")
        else:
            lines.append(f"(assert {opts[0] if len(opts) == 1 else '(or ' + ' '.join(opts) + ')'})")
        weight_decls.setdefault(f, []).extend(lines)

    def rw(t):
        return _replace_weights(t, names, sig) if names else t

    out = [f"(set-logic {smt_logic_name(state)})"]
    oracle_vars = state.oracle_vars
    for c in state.core:
        if isinstance(c, (DeclareDatatype, DeclareDatatypes, DeclareSort, DefineSort)):
            out.append(str(c))
        elif isinstance(c, DefineFun):
            out.append(str(DefineFun(c.name, c.params, c.sort, rw(c.body))))
        elif isinstance(c, SynthFun):
            d = bodies[c.name]
            if d.kind == "define-fun-rec":
                out.append(str(DefineFunRec(d.name, d.params, d.sort, d.body)))
            else:
                out.append(str(DefineFun(d.name, d.params, d.sort, d.body)))
            out.extend(weight_decls.get(c.name, []))
        elif isinstance(c, DeclareVar):
            if c.name in oracle_vars and c.sort.is_function:
                args = " ".join(map(str, c.sort.args[:-1]))
                out.append(f"(declare-fun {c.name} ({args}) {c.sort.args[-1]})")
            else:
                out.append(f"(declare-const {c.name} {c.sort})")
    phi = [rw(t) for t in constraints]
    alpha = [rw(t) for t in assumptions]
    goal = conj(phi)
    if alpha:
        goal = app("=>", conj(alpha), goal)
    out.append(f"(assert (not {print_term(goal)}))")
    out.append("(check-sat)")
    return "\n".join(out) + "\n"
