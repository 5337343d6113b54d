"""The synthesis state machine: command ordering, state updates and the
desugaring of every sugar command into core form."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .diagnostics import Diagnostic
from .errors import SygusError
from .evaluator import expand_macros, fresh_name, substitute
from .grammar import RuleSet, SynthFunEntry, compile_grammar
from .logics import (
    SygusLogic,
    check_constraint_allowed,
    check_grammar_allowed,
    check_special_logic,
    check_term_in_logic,
    logic_from_name,
    weight_symbol_in,
)
from .reader import SExpr, read_all
from .syntax import (
    BOOL,
    App,
    Assume,
    ChcConstraint,
    CheckSynth,
    Command,
    Constraint,
    DeclareDatatype,
    DeclareDatatypes,
    DeclareOracleFun,
    DeclareSort,
    DeclareVar,
    DeclareWeight,
    DefineFun,
    DefineFunRec,
    DefineSort,
    Id,
    Identifier,
    InvConstraint,
    OptimizeSynth,
    OracleAssume,
    OracleConstraint,
    OracleSugar,
    SetFeature,
    SetInfo,
    SetLogic,
    SetOption,
    Sort,
    SynthFun,
    Term,
    app,
    function_sort,
    parse_command,
    print_term,
    sym,
)
from .theories import (
    FunDecl,
    Macro,
    Signature,
    SortDecl,
    check_sort,
    declare_datatypes,
    sort_check,
    theory_signature,
)


@dataclass(frozen=True)
class OracleBinding:
    kind: str  # constraint | assume
    invars: tuple[tuple[str, Sort], ...]
    outvars: tuple[tuple[str, Sort], ...]
    template: Term
    oracle_name: str
    transport: str = "command-line"  # or file


@dataclass(frozen=True)
class Conjecture:
    funs: tuple[SynthFunEntry, ...]
    vars: tuple[tuple[str, Sort], ...]
    assumptions: tuple[Term, ...]
    constraints: tuple[Term, ...]

    @property
    def formula(self) -> Term:
        """The universally quantified body: (and alpha) => (and phi)."""
        from .syntax import conj

        body = conj(self.constraints)
        if self.assumptions:
            body = app("=>", conj(self.assumptions), body)
        return body


@dataclass
class SynthState:
    funs: list = field(default_factory=list)
    universal_vars: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    oracle_bindings: list = field(default_factory=list)
    signature: Signature = field(default_factory=Signature)
    logic: SygusLogic = field(default_factory=SygusLogic)
    phase: str = "start"
    info: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    grammars: dict = field(default_factory=dict)
    constraint_origins: list = field(default_factory=list)
    chc_clauses: list = field(default_factory=list)
    inv_count: int = 0
    objective: OptimizeSynth | None = None
    has_check: bool = False
    core: list = field(default_factory=list)

    @property
    def weight_keywords(self) -> set:
        return {":" + w for w in self.signature.weights}

    @property
    def oracle_vars(self) -> set:
        return {d.name for d in self.signature.symbols.values() if d.kind == "oracle-var"}

    def fun(self, name: str) -> SynthFunEntry | None:
        for f in self.funs:
            if f.name == name:
                return f
        return None

    def copy(self) -> "SynthState":
        return replace(
            self,
            funs=list(self.funs),
            universal_vars=list(self.universal_vars),
            constraints=list(self.constraints),
            assumptions=list(self.assumptions),
            oracle_bindings=list(self.oracle_bindings),
            constraint_origins=list(self.constraint_origins),
            chc_clauses=list(self.chc_clauses),
            core=list(self.core),
            info=dict(self.info),
            options=dict(self.options),
            grammars=dict(self.grammars),
        )


def build_conjecture(state: SynthState) -> Conjecture:
    return Conjecture(
        tuple(state.funs), tuple(state.universal_vars), tuple(state.assumptions), tuple(state.constraints)
    )


SETTERS = (SetFeature, SetOption)


def _attr_transport(attrs) -> str:
    kws = {a.keyword for a in attrs}
    return "file" if ":file" in kws else "command-line"


class Session:
    """Consumes commands in order and maintains a SynthState.

    ``expand`` beta-reduces macro applications in desugared constraints;
    ``strict`` selects the exact signature (binary ``=`` and
    comparisons).  ``reserved`` lists symbols that fresh names must avoid
    in addition to everything already in the signature.
    """

    def __init__(self, expand: bool = False, strict: bool = True, reserved=()):
        self.state = SynthState(signature=Signature(strict=strict))
        self.expand = expand
        self.strict = strict
        self.reserved = set(reserved)
        self.diagnostics: list[Diagnostic] = []

    # -- fresh names ------------------------------------------------------

    def _avoid(self) -> set:
        sig = self.state.signature
        return self.reserved | set(sig.symbols) | set(sig.sorts)

    def fresh(self, base: str) -> str:
        name = fresh_name(base, self._avoid())
        self.reserved.add(name)
        return name

    def fresh_local(self, base: str) -> str:
        """Fresh name for a locally bound variable."""
        name = fresh_name(base, self._avoid())
        return name

    # -- driver -----------------------------------------------------------

    def run(self, commands) -> SynthState:
        for c in commands:
            self.process_safely(c)
        self.finish()
        return self.state

    def process_safely(self, c: Command) -> bool:
        try:
            self.process(c)
        except SygusError as e:
            self.diagnostics.append(Diagnostic.from_error(e, c.span))
            return False
        return True

    def finish(self):
        for v in check_special_logic(self.state):
            self.diagnostics.append(Diagnostic.from_error(v))

    # -- dispatch ---------------------------------------------------------

    def process(self, c: Command):
        st = self.state
        if isinstance(c, SetInfo):
            st.info[c.keyword] = c.value
            st.core.append(c)
            return
        if isinstance(c, SetLogic):
            if st.phase != "start":
                raise SygusError("E-ORDER", "set-logic must be the first command")
            logic = logic_from_name(c.logic)
            st.logic = SygusLogic(logic.input, logic.output, st.logic.features)
            st.signature = replace(st.signature, logic=logic.spec)
            st.phase = "setters"
            st.core.append(c)
            return
        if isinstance(c, SETTERS):
            if st.phase == "body":
                raise SygusError("E-ORDER", f"{c.head} must precede all other commands except set-logic")
            st.phase = "setters"
            if isinstance(c, SetFeature):
                st.logic = st.logic.with_feature(c.feature, c.value)
                st.signature = replace(st.signature, oracles=st.logic.has("oracles"))
            else:
                st.options[c.keyword] = c.value
            st.core.append(c)
            return
        st.phase = "body"
        handler = getattr(self, "_cmd_" + type(c).__name__)
        handler(c)

    # -- declarations -----------------------------------------------------

    def _cmd_DeclareVar(self, c: DeclareVar, oracle_valued: bool = False):
        st = self.state
        fun_sorted = c.sort.is_function
        if fun_sorted and not st.logic.has("oracles"):
            raise SygusError("E-SORT", f"declare-var {c.name}: function sorts need the oracles feature")
        s = check_sort(c.sort, st.signature, allow_function=fun_sorted)
        kind = "oracle-var" if fun_sorted or oracle_valued else "var"
        if fun_sorted:
            decl = FunDecl(c.name, kind, s.args[:-1], s.args[-1])
        else:
            decl = FunDecl(c.name, kind, (), s)
        st.signature = st.signature.with_symbol(decl)
        st.universal_vars.append((c.name, s))
        st.core.append(c)

    def _cmd_DeclareWeight(self, c: DeclareWeight):
        st = self.state
        if not st.logic.has("weights"):
            raise SygusError("E-FEATURE-GATED", "declare-weight requires the weights feature")
        default = 0
        for a in c.attrs:
            if a.keyword == ":default":
                n = a.numeral()
                if n is None:
                    raise SygusError("E-SYNTAX", f"declare-weight {c.name}: :default expects a numeral")
                default = n
        st.signature = st.signature.with_weight(c.name, default)
        st.core.append(c)

    def _cmd_SynthFun(self, c: SynthFun):
        st = self.state
        sig = st.signature
        params = tuple((n, check_sort(s, sig)) for n, s in c.params)
        names = [n for n, _ in params]
        if len(set(names)) != len(names):
            raise SygusError("E-DUP-SYMBOL", f"synth-fun {c.name} repeats a parameter name")
        ret = check_sort(c.sort, sig)
        entry = SynthFunEntry(c.name, params, ret, c.grammar)
        new_sig = sig.with_symbol(FunDecl(c.name, "synth", tuple(s for _, s in params), ret))
        rs = None
        if c.grammar is not None:
            rs = compile_grammar(c.grammar, entry, new_sig)
            st.signature = new_sig
            try:
                bad = check_grammar_allowed(st.logic, rs, entry, st)
            finally:
                st.signature = sig
            if bad is not None:
                raise bad
        st.signature = new_sig
        st.funs.append(entry)
        if rs is not None:
            st.grammars[c.name] = rs
        st.core.append(c)

    def _cmd_DefineFun(self, c: DefineFun):
        st = self.state
        sig = st.signature
        params = tuple((n, check_sort(s, sig)) for n, s in c.params)
        ret = check_sort(c.sort, sig)
        got = sort_check(c.body, sig, dict(params))
        if got != ret:
            raise SygusError("E-SORT", f"define-fun {c.name}: body has sort {got}, expected {ret}")
        st.signature = sig.with_macro(Macro(c.name, params, ret, c.body))
        st.core.append(c)

    def _cmd_DefineFunRec(self, c: DefineFunRec):
        raise SygusError("E-UNSUPPORTED", "define-fun-rec is only supported in solver responses")

    def _cmd_DefineSort(self, c: DefineSort):
        st = self.state
        body = check_sort(c.sort, st.signature, params=c.params)
        st.signature = st.signature.with_sort(c.name, SortDecl("alias", len(c.params), c.params, body))
        st.core.append(c)

    def _cmd_DeclareSort(self, c: DeclareSort):
        st = self.state
        st.signature = st.signature.with_sort(c.name, SortDecl("uninterpreted", c.arity))
        st.core.append(c)

    def _require_datatypes(self):
        lg = self.state.signature.logic
        if not lg.dt and self.state.logic.flavor != "core":
            raise SygusError("E-SORT", f"datatypes are not part of logic {lg.name}")

    def _cmd_DeclareDatatype(self, c: DeclareDatatype):
        self._require_datatypes()
        st = self.state
        st.signature = declare_datatypes(st.signature, ((c.name, 0),), (c.constructors,))
        st.core.append(c)

    def _cmd_DeclareDatatypes(self, c: DeclareDatatypes):
        self._require_datatypes()
        st = self.state
        st.signature = declare_datatypes(st.signature, c.sort_decls, c.datatypes)
        st.core.append(c)

    # -- constraints ------------------------------------------------------

    def _bool_term(self, t: Term, what: str, env=None):
        s = sort_check(t, self.state.signature, env)
        if s != BOOL:
            raise SygusError("E-SORT", f"{what} has sort {s}, expected Bool: {print_term(t)}")

    def _add_formula(self, c, origin: str):
        st = self.state
        self._bool_term(c.term, c.head)
        logic = st.logic
        if origin != "constraint" and logic.flavor == "pbe":
            logic = SygusLogic(logic.output, logic.output, logic.features)
        bad = check_constraint_allowed(logic, c.term, st)
        if bad is not None:
            raise bad
        if isinstance(c, Constraint):
            st.constraints.append(c.term)
            st.constraint_origins.append(origin)
        else:
            st.assumptions.append(c.term)
        st.core.append(c)

    def _cmd_Constraint(self, c: Constraint):
        self._add_formula(c, "constraint")

    def _cmd_Assume(self, c: Assume):
        self._add_formula(c, "assume")

    def _cmd_InvConstraint(self, c: InvConstraint):
        cmds = self.desugar_inv_constraint(c)
        self.state.inv_count += 1
        self._replay(cmds, "inv-constraint")

    def _cmd_ChcConstraint(self, c: ChcConstraint):
        cmds = self.desugar_chc_constraint(c)
        self.state.chc_clauses.append((c.params, c.body, c.head_term))
        self._replay(cmds, "chc-constraint")

    def _replay(self, cmds, origin: str):
        for d in cmds:
            if isinstance(d, Constraint):
                self._add_formula(d, origin)
            else:
                self.process(d)

    def _cmd_CheckSynth(self, c: CheckSynth):
        self.state.has_check = True
        self.state.core.append(c)

    def _cmd_OptimizeSynth(self, c: OptimizeSynth):
        st = self.state
        uvars = {n for n, _ in st.universal_vars}
        from .evaluator import free_symbols

        for t in c.terms:
            sort_check(t, st.signature)
            used = free_symbols(t) & uvars
            if used:
                raise SygusError("E-OPT", f"objective {print_term(t)} mentions universal variable {sorted(used)[0]}")
            ws = weight_symbol_in(t, st.signature)
            if ws is not None and not st.logic.has("weights"):
                raise SygusError("E-FEATURE-GATED", "weight symbols require the weights feature")
        st.objective = c
        st.has_check = True
        st.core.append(c)

    # -- oracles ----------------------------------------------------------

    def _require_oracles(self, what: str):
        if not self.state.logic.has("oracles"):
            raise SygusError("E-FEATURE-GATED", f"{what} requires the oracles feature")

    def _binding(self, c, kind: str):
        st = self.state
        self._require_oracles(c.head)
        sig = st.signature
        ins = tuple((n, check_sort(s, sig, allow_function=True)) for n, s in c.inputs)
        outs = tuple((n, check_sort(s, sig, allow_function=True)) for n, s in c.outputs)
        names = [n for n, _ in ins + outs]
        if len(set(names)) != len(names):
            raise SygusError("E-DUP-SYMBOL", f"{c.head} binds a variable twice")
        self._bool_term(c.template, f"{c.head} template", dict(ins + outs))
        if st.logic.flavor != "core":
            bad = check_term_in_logic(st.logic.output.spec, expand_macros(c.template, sig), sig, quantifiers=False)
            if bad is not None:
                raise bad
        st.oracle_bindings.append(OracleBinding(kind, ins, outs, c.template, c.oracle, _attr_transport(c.attrs)))
        st.core.append(c)

    def _cmd_OracleConstraint(self, c: OracleConstraint):
        self._binding(c, "constraint")

    def _cmd_OracleAssume(self, c: OracleAssume):
        self._binding(c, "assume")

    def _cmd_DeclareOracleFun(self, c: DeclareOracleFun):
        self._require_oracles("declare-oracle-fun")
        for d in self.desugar_declare_oracle_fun(c):
            if isinstance(d, DeclareVar):
                self._cmd_DeclareVar(d, oracle_valued=True)
            else:
                self.process(d)

    def _cmd_OracleSugar(self, c: OracleSugar):
        self._require_oracles(c.kind)
        for d in self.desugar_oracle_sugar(c):
            if isinstance(d, DeclareOracleFun):
                self._cmd_DeclareOracleFun(d)
            else:
                self.process(d)

    # -- desugaring -------------------------------------------------------

    def desugar_inv_constraint(self, c: InvConstraint) -> list[Command]:
        st = self.state
        f = st.fun(c.inv)
        if f is None:
            raise SygusError("E-DESUGAR", f"inv-constraint: {c.inv} is not a function-to-synthesize")
        if f.sort != BOOL:
            raise SygusError("E-DESUGAR", f"inv-constraint: {c.inv} must return Bool")
        sorts = [s for _, s in f.params]
        n = len(sorts)
        macros = st.signature.macros
        for name, arity in ((c.pre, n), (c.trans, 2 * n), (c.post, n)):
            m = macros.get(name)
            if m is None:
                raise SygusError("E-DESUGAR", f"inv-constraint: {name} is not a defined function")
            want = sorts if arity == n else sorts + sorts
            if [s for _, s in m.params] != want or m.result != BOOL:
                raise SygusError(
                    "E-DESUGAR",
                    f"inv-constraint: {name} must have sort ({' '.join(map(str, want))}) -> Bool",
                )
        trans = macros[c.trans]
        cur_bases = [p for p, _ in trans.params[:n]]
        nxt_bases = [p for p, _ in trans.params[n:]]
        decls = []
        vs, ps = [], []
        for i, s in enumerate(sorts):
            v = self.fresh(cur_bases[i])
            vp = self.fresh(nxt_bases[i])
            vs.append(v)
            ps.append(vp)
            decls += [DeclareVar(v, s), DeclareVar(vp, s)]
        v_terms = [sym(v) for v in vs]
        p_terms = [sym(v) for v in ps]

        def call(name, args):
            return app(name, *args) if args else sym(name)

        pre = call(c.pre, v_terms)
        inv_v = call(c.inv, v_terms)
        inv_p = call(c.inv, p_terms)
        tr = call(c.trans, v_terms + p_terms)
        post = call(c.post, v_terms)
        if self.expand:
            pre, tr, post = (expand_macros(t, macros) for t in (pre, tr, post))
        cons = [
            Constraint(app("=>", pre, inv_v)),
            Constraint(app("=>", app("and", inv_v, tr), inv_p)),
            Constraint(app("=>", inv_v, post)),
        ]
        return decls + cons

    def desugar_chc_constraint(self, c: ChcConstraint) -> list[Command]:
        st = self.state
        sig = st.signature
        params = tuple((n, check_sort(s, sig)) for n, s in c.params)
        env = dict(params)
        self._bool_term(c.body, "chc-constraint body", env)
        self._bool_term(c.head_term, "chc-constraint head", env)
        decls = []
        vs = []
        for n, s in params:
            v = self.fresh(n)
            vs.append(sym(v))
            decls.append(DeclareVar(v, s))
        binding = {n: v for (n, _), v in zip(params, vs)}
        if self.expand:
            body = substitute(c.body, binding)
            head = substitute(c.head_term, binding)
            return decls + [Constraint(app("=>", body, head))]
        fb = self.fresh("F_body")
        fh = self.fresh("F_head")

        def call(name):
            return app(name, *vs) if vs else sym(name)

        return decls + [
            DefineFun(fb, params, BOOL, c.body),
            DefineFun(fh, params, BOOL, c.head_term),
            Constraint(app("=>", call(fb), call(fh))),
        ]

    def desugar_declare_oracle_fun(self, c: DeclareOracleFun) -> list[Command]:
        sig = self.state.signature
        arg_sorts = tuple(check_sort(s, sig, allow_function=True) for s in c.arg_sorts)
        ret = check_sort(c.sort, sig)
        s = function_sort(arg_sorts, ret) if arg_sorts else ret
        xs = [self.fresh_local(f"x{i + 1}") for i in range(len(arg_sorts))]
        x = self.fresh_local("x")
        lhs = app(c.name, *map(sym, xs)) if xs else sym(c.name)
        return [
            DeclareVar(c.name, s),
            OracleAssume(tuple(zip(xs, arg_sorts)), ((x, ret),), app("=", lhs, sym(x)), c.oracle, c.attrs),
        ]

    def desugar_oracle_sugar(self, c: OracleSugar) -> list[Command]:
        st = self.state
        f = st.fun(c.fun)
        if f is None:
            if c.fun in st.signature.symbols:
                raise SygusError("E-DESUGAR", f"{c.kind}: {c.fun} is not a function-to-synthesize")
            raise SygusError("E-UNBOUND", f"{c.kind}: unknown function {c.fun}")
        sorts = [s for _, s in f.params]
        sigma = f.sort
        xs = [self.fresh_local(f"x{i + 1}") for i in range(len(sorts))]
        xvars = list(zip(xs, sorts))
        fx = app(f.name, *map(sym, xs)) if xs else sym(f.name)
        fsort = function_sort(sorts, sigma) if sorts else sigma
        kind = c.kind
        attrs = c.attrs
        if kind in ("oracle-constraint-io", "oracle-constraint-poswitness", "oracle-constraint-negwitness"):
            x = self.fresh_local("x")
            eq = app("=", fx, sym(x))
            if kind == "oracle-constraint-io":
                return [OracleConstraint(tuple(xvars), ((x, sigma),), eq, c.oracle, attrs)]
            tmpl = eq if kind == "oracle-constraint-poswitness" else app("not", eq)
            return [OracleConstraint((), tuple(xvars) + ((x, sigma),), tmpl, c.oracle, attrs)]
        if kind == "oracle-constraint-membership":
            x = self.fresh_local("x")
            r = self.fresh_local("R")
            tmpl = app("=", app("=", fx, sym(x)), sym(r))
            return [OracleConstraint(tuple(xvars) + ((x, sigma),), ((r, BOOL),), tmpl, c.oracle, attrs)]
        cex = []
        if kind in ("oracle-constraint-cex", "declare-correctness-cex-oracle"):
            fc = self.fresh_local("F_c")
            r = self.fresh_local("R")
            fcx = app(fc, *map(sym, xs)) if xs else sym(fc)
            tmpl = app("=>", sym(r), app("not", app("=", fx, fcx)))
            cex = [OracleConstraint(((fc, fsort),), ((r, BOOL),) + tuple(xvars), tmpl, c.oracle, attrs)]
            if kind == "oracle-constraint-cex":
                return cex
        s = self.fresh("s")
        corr = [
            DeclareOracleFun(s, (fsort,), BOOL, c.oracle, attrs),
            Constraint(app(s, sym(f.name))),
        ]
        return cex + corr


# ---------------------------------------------------------------------------
# Convenience entry points


def _symbols_in(exprs) -> set:
    out = set()
    stack = list(exprs)
    while stack:
        e = stack.pop()
        if e.is_list:
            stack.extend(e.children)
        elif e.kind == "symbol":
            out.add(e.text)
    return out


@dataclass
class ValidationResult:
    state: SynthState
    diagnostics: list

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)


def load(text: str, permissive: bool = False, expand: bool = False) -> ValidationResult:
    """Read, parse and process a whole script, collecting diagnostics."""
    try:
        exprs = read_all(text)
    except SygusError as e:
        return ValidationResult(SynthState(), [Diagnostic.from_error(e)])
    sess = Session(expand=expand, strict=not permissive, reserved=_symbols_in(exprs))
    for e in exprs:
        try:
            c = parse_command(e, permissive)
        except SygusError as err:
            sess.diagnostics.append(Diagnostic.from_error(err, e.span))
            continue
        sess.process_safely(c)
    sess.finish()
    return ValidationResult(sess.state, sess.diagnostics)


def load_file(path, permissive: bool = False, expand: bool = False) -> ValidationResult:
    with open(path, encoding="utf-8") as fh:
        return load(fh.read(), permissive, expand)


def load_state(text: str, permissive: bool = False) -> SynthState:
    """Like load, but raise the first error diagnostic."""
    res = load(text, permissive)
    for d in res.diagnostics:
        if d.severity == "error":
            raise SygusError(d.code, d.message, d.span)
    return res.state


def core_logic_name(state: SynthState) -> str | None:
    """Logic name for desugared output: special logics fall back to their base."""
    lg = state.logic.input
    if lg.flavor == "core":
        return None
    return lg.spec.name


def desugar_text(text: str, permissive: bool = False, expand: bool = False) -> str:
    """Core-form rendering of a script."""
    res = load(text, permissive, expand)
    errs = [d for d in res.diagnostics if d.severity == "error"]
    if errs:
        d = errs[0]
        raise SygusError(d.code, d.message, d.span)
    lines = []
    for c in res.state.core:
        if isinstance(c, SetLogic):
            c = SetLogic(core_logic_name(res.state) or c.logic)
        lines.append(str(c))
    return "\n".join(lines) + "\n"
