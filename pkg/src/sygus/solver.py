"""Baseline enumerative solver: bottom-up enumeration with observational
equivalence over the inputs the constraints feed each function, inside a
counterexample-guided loop."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from .evaluator import (
    Definition,
    EvalIssue,
    Evaluator,
    TableFun,
    expand_macros,
    free_symbols,
    make_env,
)
from .grammar import Enumerator, compositions, constant_sample, template_slots, unit_closure
from .syntax import (
    App,
    ConstantClass,
    Id,
    Identifier,
    Term,
    VariableClass,
    conj,
    subterms,
    term_size,
)
from .verify import (
    DomainSpec,
    Fail,
    FunDef,
    Solution,
    assignments,
    check_semantic_bounded,
    weight_occurrences,
)

ERR = ("<error>",)


class _Budget(Exception):
    pass


class _Err(Exception):
    pass


@dataclass
class SolverStats:
    candidates: int = 0
    rounds: int = 0
    points: int = 0


def _placeholder(k: int) -> str:
    return f"\x00{k}"


def _slot_template(t: Term, nts):
    """Replace nonterminal leaves by placeholders, returning the new template."""
    counter = itertools.count()

    def go(u):
        if isinstance(u, Id) and not u.ident.indices and u.name in nts:
            return Id(Identifier(_placeholder(next(counter))))
        if isinstance(u, App):
            return App(u.head, tuple(go(a) for a in u.args))
        return u

    return go(t)


def _fill(t: Term, children) -> Term:
    if isinstance(t, Id) and t.name.startswith("\x00"):
        return children[int(t.name[1:])]
    if isinstance(t, App):
        return App(t.head, tuple(_fill(a, children) for a in t.args))
    return t


class OEEnumerator:
    """Size-indexed enumeration keeping one term per behaviour on ``inputs``."""

    def __init__(self, rs, inputs, env, deadline):
        self.rs = rs
        self.nts = rs.nt_names
        self.inputs = inputs
        self.params = [n for n, _ in rs.params]
        self.env = env
        self.deadline = deadline
        self.reach = unit_closure(rs)
        self.levels = {y: [[]] for y in self.nts}
        self.seen = {y: set() for y in self.nts}
        self.built = 0
        self.locals = [dict(zip(self.params, inp)) for inp in inputs]
        self.plans = {}
        for y in self.nts:
            plans = []
            for rule in rs.rules[y]:
                if rule.unit is not None:
                    continue
                if isinstance(rule.rhs, ConstantClass):
                    plans.append(("leaves", list(constant_sample(rule.rhs.sort, rs.sig))))
                elif isinstance(rule.rhs, VariableClass):
                    plans.append(("leaves", [Id(Identifier(v)) for v in rule.matching_vars]))
                else:
                    slots = template_slots(rule.rhs, self.nts)
                    if not slots:
                        plans.append(("leaves", [rule.rhs]))
                    else:
                        base = term_size(rule.rhs) - len(slots)
                        plans.append(("template", (_slot_template(rule.rhs, self.nts), slots, base)))
            self.plans[y] = plans

    def _eval_leaf(self, t):
        out = []
        for loc in self.locals:
            try:
                out.append(Evaluator(self.env).eval(t, loc))
            except (EvalIssue, TypeError, ValueError, ZeroDivisionError, OverflowError):
                out.append(ERR)
        return tuple(out)

    def _eval_template(self, tmpl, child_vals):
        out = []
        for i, loc in enumerate(self.locals):
            vals = [cv[i] for cv in child_vals]
            try:
                out.append(self._lazy(tmpl, loc, vals))
            except (_Err, EvalIssue, TypeError, ValueError, ZeroDivisionError, OverflowError, MemoryError):
                out.append(ERR)
        return tuple(out)

    def _lazy(self, t, loc, vals):
        """Evaluate a template; an undefined child only matters if reached."""
        if isinstance(t, Id) and t.name.startswith("\x00"):
            v = vals[int(t.name[1:])]
            if v is ERR:
                raise _Err()
            return v
        if isinstance(t, App) and not t.head.indices and t.head.symbol == "ite" and len(t.args) == 3:
            c = self._lazy(t.args[0], loc, vals)
            return self._lazy(t.args[1] if c is True else t.args[2], loc, vals)
        used = [int(s.name[1:]) for s in subterms(t) if isinstance(s, Id) and s.name.startswith("\x00")]
        if any(vals[k] is ERR for k in used):
            raise _Err()
        inner = dict(loc)
        inner.update({_placeholder(k): vals[k] for k in used})
        return Evaluator(self.env).eval(t, inner)

    def _check_time(self):
        if time.monotonic() > self.deadline:
            raise _Budget()

    def _build(self, s: int):
        base = {}
        for y in self.nts:
            found = {}
            for kind, plan in self.plans[y]:
                if kind == "leaves":
                    for t in plan:
                        if term_size(t) == s:
                            sig = self._eval_leaf(t)
                            found.setdefault(sig, t)
                    continue
                tmpl, slots, c = plan
                for sizes in compositions(s - c, len(slots)):
                    pools = [self.levels[z][k] for z, k in zip(slots, sizes)]
                    if any(not p for p in pools):
                        continue
                    for n, combo in enumerate(itertools.product(*pools)):
                        if n % 256 == 0:
                            self._check_time()
                        sig = self._eval_template(tmpl, [cv for _, cv in combo])
                        if sig in found:
                            continue
                        found[sig] = _fill(tmpl, [t for t, _ in combo])
            base[y] = found
        for y in self.nts:
            level = []
            for z in sorted(self.reach[y]):
                for sig, t in base[z].items():
                    if sig in self.seen[y]:
                        continue
                    self.seen[y].add(sig)
                    level.append((t, sig))
            self.levels[y].append(level)

    def terms_of_size(self, y, s):
        while self.built < s:
            self.built += 1
            self._build(self.built)
        return self.levels[y][s]


def _f_inputs(f, terms, points, env, tables):
    """Argument tuples of ``f`` reached by the constraints at ``points``.

    Returns None when some argument depends on ``f`` itself or cannot be
    evaluated, in which case observational equivalence is unsound.
    """
    apps = []
    for t in terms:
        for s in subterms(t):
            if isinstance(s, App) and not s.head.indices and s.head.symbol == f:
                if any(f in free_symbols(a) for a in s.args):
                    return None
                apps.append(s.args)
            elif isinstance(s, Id) and not s.ident.indices and s.name == f and f in free_symbols(t):
                pass
    out = []
    for pt in points:
        local = dict(tables)
        local.update(pt)
        for args in apps:
            try:
                key = tuple(Evaluator(env).eval(a, local) for a in args)
            except EvalIssue:
                return None
            if key not in out:
                out.append(key)
    return out


def _bare_use(f, terms) -> bool:
    for t in terms:
        for s in subterms(t):
            if isinstance(s, Id) and not s.ident.indices and s.name == f:
                return True
    return False


def _holds(formula, env, points, tables, fuel=2000) -> bool:
    for pt in points:
        local = dict(tables)
        local.update(pt)
        try:
            if Evaluator(env, fuel).eval(formula, local) is False:
                return False
        except EvalIssue:
            return False
    return True


def solve_enumerative(
    state,
    max_size: int = 8,
    time_budget: float = 60.0,
    domain: DomainSpec | None = None,
    oracle_session=None,
    stats: SolverStats | None = None,
):
    """Search the grammars for a solution; returns Solution or Fail."""
    stats = stats or SolverStats()
    domain = domain or DomainSpec()
    deadline = time.monotonic() + time_budget
    funs = state.funs
    if not funs or any(f.name not in state.grammars for f in funs):
        return Fail()
    transcript = None
    if oracle_session is not None:
        _query_oracles(oracle_session, state, domain)
        transcript = oracle_session.transcript
    try:
        if len(funs) == 1:
            return _solve_single(state, funs[0], max_size, deadline, domain, transcript, stats)
        return _solve_multi(state, max_size, deadline, domain, transcript, stats)
    except _Budget:
        return Fail()


def _query_oracles(session, state, domain):
    session.saturate_oracle_funs()
    spec = DomainSpec(samples=10, exhaustive_limit=0, seed=domain.seed)
    for b in session.bindings("constraint"):
        if not b.invars or any(s.is_function for _, s in b.invars):
            continue
        for pt in assignments(list(b.invars), state.signature, spec):
            session.query(b, list(pt))


def _tables(state, transcript):
    tables = {n: TableFun(n) for n in state.oracle_vars}
    if transcript is not None:
        for name, args, result in transcript.function_points():
            if name in tables:
                tables[name].table[tuple(args)] = result
    return tables


def _formula(state):
    phi = conj(state.constraints)
    if state.assumptions:
        return App(Identifier("=>"), (conj(state.assumptions), phi))
    return phi


def _solve_single(state, f, max_size, deadline, domain, transcript, stats):
    sig = state.signature
    rs = state.grammars[f.name]
    formula = expand_macros(_formula(state), sig)
    tables = _tables(state, transcript)
    vars_ = [(n, s) for n, s in state.universal_vars if n not in tables]
    points = [{}] if not vars_ else []
    weighted = bool(weight_occurrences(list(state.constraints) + list(state.assumptions), state))
    base_env = make_env(sig, {}, dict(tables))
    bare = _bare_use(f.name, [formula])
    tried = set()
    while True:
        stats.rounds += 1
        if time.monotonic() > deadline:
            raise _Budget()
        inputs = None if bare or weighted else _f_inputs(f.name, [formula], points, base_env, tables)
        if inputs is not None:
            enum = OEEnumerator(rs, inputs, base_env, deadline)
            stream = ((t, sig_) for s in range(1, max_size + 1) for t, sig_ in enum.terms_of_size(rs.start, s))
        else:
            plain = Enumerator(rs)
            stream = ((t, None) for t in plain.enumerate(rs.start, max_size))
        restarted = False
        for n, (t, vals) in enumerate(stream):
            if n % 64 == 0 and time.monotonic() > deadline:
                raise _Budget()
            if t in tried:
                continue
            stats.candidates += 1
            if vals is not None and any(v is ERR for v in vals):
                continue
            d = Definition(tuple(f.params), t, False)
            if not weighted and points:
                env = make_env(sig, {f.name: d}, dict(tables))
                if not _holds(formula, env, points, tables):
                    continue
            resp = Solution((FunDef("define-fun", f.name, tuple(f.params), f.sort, t),))
            v = check_semantic_bounded(state, resp, domain, transcript=transcript)
            tried.add(t)
            if v.status == "passed-bounded":
                return resp
            if v.status == "refuted" and v.counterexample:
                pt = dict(v.counterexample)
                if pt not in points:
                    points.append(pt)
                    stats.points = len(points)
                    restarted = True
                    break
        if not restarted:
            return Fail()


def _solve_multi(state, max_size, deadline, domain, transcript, stats):
    funs = state.funs
    enums = [Enumerator(state.grammars[f.name]) for f in funs]
    n = len(funs)
    for total in range(n, max_size * n + 1):
        for sizes in compositions(total, n):
            if max(sizes) > max_size:
                continue
            pools = [e.terms_of_size(state.grammars[f.name].start, s) for e, f, s in zip(enums, funs, sizes)]
            if any(not p for p in pools):
                continue
            for combo in itertools.product(*pools):
                if time.monotonic() > deadline:
                    raise _Budget()
                stats.candidates += 1
                resp = Solution(
                    tuple(FunDef("define-fun", f.name, tuple(f.params), f.sort, t) for f, t in zip(funs, combo))
                )
                v = check_semantic_bounded(state, resp, domain, transcript=transcript)
                if v.status == "passed-bounded":
                    return resp
    return Fail()
