"""SyGuS logics: input/output logics, features, and the restrictions they
impose on constraints and grammars."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SygusError
from .evaluator import expand_macros, free_symbols
from .syntax import (
    Annot,
    App,
    ConstantClass,
    Id,
    Lambda,
    Let,
    Lit,
    Quant,
    Term,
    VariableClass,
    print_term,
    strip_annotations,
    subterms,
)
from .theories import CORE, LogicSpec, builtin_symbols, is_weight_symbol, parse_logic_name
from .values import NotAValue, term_to_value

DEFAULT_FEATURES = frozenset({"grammars"})


@dataclass(frozen=True)
class BaseLogic:
    name: str
    flavor: str  # core | smtlib | pbe | inv | chc
    spec: LogicSpec = CORE

    def __str__(self):
        if self.flavor == "core":
            return "Core"
        if self.flavor == "pbe":
            return f"PBE_{self.spec.name}"
        if self.flavor == "inv":
            return f"Inv_QF_{self.spec.name}"
        if self.flavor == "chc":
            return f"CHC_QF_{self.spec.name}"
        return f"QF_{self.spec.name}"


@dataclass(frozen=True)
class SygusLogic:
    input: BaseLogic = BaseLogic("Core", "core")
    output: BaseLogic = BaseLogic("Core", "core")
    features: frozenset = field(default=DEFAULT_FEATURES)

    @property
    def spec(self) -> LogicSpec:
        return self.input.spec

    @property
    def flavor(self) -> str:
        return self.input.flavor

    def has(self, feature: str) -> bool:
        return feature in self.features

    def with_feature(self, feature: str, on: bool) -> "SygusLogic":
        fs = set(self.features)
        if on:
            fs.add(feature)
        else:
            fs.discard(feature)
        return SygusLogic(self.input, self.output, frozenset(fs))


def logic_from_name(name: str) -> SygusLogic:
    """The SyGuS logic selected by ``(set-logic name)``."""
    flavor, spec = parse_logic_name(name)
    out = BaseLogic(name, "smtlib", spec)
    return SygusLogic(BaseLogic(name, flavor, spec), out, DEFAULT_FEATURES)


def _violation(code, msg, t=None):
    return SygusError(code, msg if t is None else f"{msg}: {print_term(t)}")


# ---------------------------------------------------------------------------
# Term-level checks


ARITH_CONST_OPS = {"+", "-", "*", "/", "div", "mod", "abs"}


def is_constant_term(t: Term) -> bool:
    """Closed arithmetic over literals only."""
    t = strip_annotations(t)
    if isinstance(t, Lit):
        return True
    if isinstance(t, App) and not t.head.indices and t.head.symbol in ARITH_CONST_OPS:
        return all(is_constant_term(a) for a in t.args)
    return False


def nonlinear_subterm(t: Term, const=is_constant_term):
    """First subterm breaking linear arithmetic, or None."""
    for s in subterms(t):
        if not isinstance(s, App) or s.head.indices:
            continue
        op = s.head.symbol
        if op == "*":
            if sum(1 for a in s.args if not const(a)) > 1:
                return s
        elif op in ("div", "mod", "/"):
            if not all(const(a) for a in s.args[1:]):
                return s
    return None


def int_literal_subterm(t: Term):
    for s in subterms(t):
        if isinstance(s, Lit) and s.kind == "int":
            return s
    return None


def has_quantifier(t: Term) -> bool:
    return any(isinstance(s, Quant) for s in subterms(t))


def weight_symbol_in(t: Term, sig):
    for s in subterms(t):
        if is_weight_symbol(s, sig):
            return s
    return None


def is_value_term(t: Term, sig) -> bool:
    try:
        term_to_value(strip_annotations(t), sig)
    except NotAValue:
        return False
    return not isinstance(t, Lambda)


def is_pbe_equality(t: Term, sig) -> bool:
    t = strip_annotations(t)
    if not (isinstance(t, App) and t.head.symbol == "=" and not t.head.indices and len(t.args) == 2):
        return False
    lhs, rhs = (strip_annotations(a) for a in t.args)
    synth = {d.name for d in sig.synth_funs()}
    if isinstance(lhs, App) and not lhs.head.indices and lhs.head.symbol in synth:
        args = lhs.args
    elif isinstance(lhs, Id) and lhs.name in synth:
        args = ()
    else:
        return False
    return all(is_value_term(a, sig) for a in args) and is_value_term(rhs, sig)


def is_pbe_formula(t: Term, sig) -> bool:
    t = strip_annotations(t)
    if isinstance(t, App) and t.head.symbol == "and" and not t.head.indices:
        return all(is_pbe_formula(a, sig) for a in t.args)
    return is_pbe_equality(t, sig)


def check_term_in_logic(spec: LogicSpec, t: Term, sig, quantifiers: bool):
    """Shared quantifier, literal and linearity checks on an expanded term."""
    if not quantifiers and has_quantifier(t):
        return _violation("E-LOGIC-TERM", "quantifiers are not allowed in a quantifier-free logic", t)
    if spec.strings and not spec.ints:
        lit = int_literal_subterm(t)
        if lit is not None:
            return _violation("E-LOGIC-TERM", f"logic {spec.name} has no integer constants", lit)
    if spec.linear:
        bad = nonlinear_subterm(t)
        if bad is not None:
            return _violation("E-LOGIC-TERM", f"term is not linear, as required by {spec.name}", bad)
    return None


def check_constraint_allowed(logic: SygusLogic, t: Term, state):
    """None if ``t`` may appear in a constraint under ``logic``, else a violation."""
    sig = state.signature
    inp = logic.input
    if inp.flavor == "pbe" and not is_pbe_formula(t, sig):
        return _violation("E-LOGIC-TERM", f"constraints in {inp} must be conjunctions of PBE equalities", t)
    ws = weight_symbol_in(t, sig)
    if ws is not None and not logic.has("weights"):
        return _violation("E-FEATURE-GATED", "weight symbols require the weights feature", ws)
    e = expand_macros(t, sig)
    ws = weight_symbol_in(e, sig)
    if ws is not None and not logic.has("weights"):
        return _violation("E-FEATURE-GATED", "weight symbols require the weights feature", ws)
    if inp.flavor == "core":
        return None
    return check_term_in_logic(inp.spec, e, sig, quantifiers=False)


# ---------------------------------------------------------------------------
# Grammar-level checks


def constancy(rs) -> dict:
    """Per-nonterminal constant-valuedness (fixpoint from above)."""
    const = {y: True for y in rs.nt_names}
    changed = True
    while changed:
        changed = False
        for y in rs.nt_names:
            if not const[y]:
                continue
            if not all(_rule_constant(r, const, rs) for r in rs.rules[y]):
                const[y] = False
                changed = True
    return const


def _rule_constant(rule, const, rs):
    if isinstance(rule.rhs, ConstantClass):
        return True
    if isinstance(rule.rhs, VariableClass):
        return not rule.matching_vars
    return _template_constant(rule.rhs, const, rs)


def _template_constant(t, const, rs):
    t = strip_annotations(t)
    if isinstance(t, Lit):
        return True
    if isinstance(t, Id) and not t.ident.indices and t.name in rs.nt_names:
        return const[t.name]
    if isinstance(t, App) and not t.head.indices and t.head.symbol in ARITH_CONST_OPS:
        return all(_template_constant(a, const, rs) for a in t.args)
    return False


def check_grammar_allowed(logic: SygusLogic, rs, f, state):
    """None if the grammar for ``f`` is allowed under ``logic``, else a violation."""
    sig = state.signature
    if not logic.has("grammars"):
        return _violation("E-FEATURE-GATED", f"grammar for {f.name} requires the grammars feature")
    synth = {d.name for d in sig.synth_funs()} | {f.name}
    weight_keys = set(sig.weights)
    params = {n for n, _ in f.params}
    nts = rs.nt_names
    for rule in rs.all_rules():
        if not logic.has("weights"):
            for a in rule.attrs:
                if a.keyword.lstrip(":") in weight_keys:
                    return _violation(
                        "E-FEATURE-GATED", f"weight attribute {a.keyword} in the grammar of {f.name} requires the weights feature"
                    )
        if not rule.is_concrete:
            continue
        body = expand_macros(rule.rhs, sig)
        if not logic.has("weights"):
            ws = weight_symbol_in(body, sig)
            if ws is not None:
                return _violation("E-FEATURE-GATED", "weight symbols require the weights feature", ws)
        used = free_symbols(body) - nts
        others = (used & synth) - {f.name}
        if others and not logic.has("fwd-decls"):
            return _violation(
                "E-FEATURE-GATED",
                f"rule of {rule.lhs} uses function-to-synthesize {sorted(others)[0]}; enable fwd-decls",
                rule.rhs,
            )
        if f.name in used and not logic.has("recursion"):
            return _violation(
                "E-FEATURE-GATED", f"rule of {rule.lhs} mentions {f.name} itself; enable recursion", rule.rhs
            )
        for s in sorted(used - params - synth):
            d = sig.symbols.get(s)
            if d is not None and d.kind in ("var", "oracle-var"):
                return _violation("E-LOGIC-GRAMMAR", f"grammar of {f.name} mentions universal variable {s}", rule.rhs)
        spec = logic.output.spec
        if logic.output.flavor != "core" and spec.strings and not spec.ints:
            lit = int_literal_subterm(body)
            if lit is not None:
                return _violation("E-LOGIC-GRAMMAR", f"rule of {rule.lhs}: logic {spec.name} has no integer constants", lit)
    out = logic.output
    if out.flavor != "core" and out.spec.linear:
        const = constancy(rs)
        for rule in rs.all_rules():
            if not rule.is_concrete:
                continue
            body = expand_macros(rule.rhs, sig)
            bad = nonlinear_subterm(body, lambda a: _template_constant(a, const, rs))
            if bad is not None:
                witness = linearity_witness(rs, sig)
                tag = f"witness {print_term(witness)}" if witness is not None else "conservative"
                return SygusError(
                    "E-LOGIC-GRAMMAR",
                    f"rule {print_term(rule.rhs)} of {rule.lhs} may generate nonlinear terms under {out.spec.name} ({tag})",
                )
    return None


WITNESS_MAX_SIZE = 7
WITNESS_MAX_TERMS = 20000


def linearity_witness(rs, sig):
    """A generated term violating linearity, searched up to size 7."""
    from .grammar import Enumerator

    en = Enumerator(rs)
    count = 0
    for s in range(1, WITNESS_MAX_SIZE + 1):
        for t in en.terms_of_size(rs.start, s):
            if nonlinear_subterm(expand_macros(t, sig)) is not None:
                return t
            count += 1
            if count > WITNESS_MAX_TERMS:
                return None
    return None


# ---------------------------------------------------------------------------
# Special logics


def is_s_atomic(t: Term, preds: set, variables: set) -> bool:
    t = strip_annotations(t)
    if not (free_symbols(t) & preds):
        return True
    if isinstance(t, Id):
        return t.name in preds
    if isinstance(t, App) and not t.head.indices and t.head.symbol in preds:
        return all(
            isinstance(a, Id) and not a.ident.indices and a.name in variables
            for a in map(strip_annotations, t.args)
        )
    return False


def is_s_atomic_conj(t: Term, preds, variables) -> bool:
    t = strip_annotations(t)
    if isinstance(t, App) and t.head.symbol == "and" and not t.head.indices:
        return all(is_s_atomic(a, preds, variables) for a in t.args)
    return is_s_atomic(t, preds, variables)


def check_special_logic(state) -> list:
    """Whole-file restrictions of the PBE, Inv and CHC logics."""
    logic = state.logic
    flavor = logic.flavor
    out = []
    funs = state.funs
    origins = [o for o in state.constraint_origins]
    if flavor == "inv":
        if len(funs) != 1 or funs[0].sort.name != "Bool":
            out.append(SygusError("E-LOGIC-SPECIAL", "Inv logics need exactly one Bool-valued function-to-synthesize"))
        if state.inv_count != 1:
            out.append(SygusError("E-LOGIC-SPECIAL", f"Inv logics need exactly one inv-constraint, found {state.inv_count}"))
        if any(o != "inv-constraint" for o in origins):
            out.append(SygusError("E-LOGIC-SPECIAL", "Inv logics allow constraints only from inv-constraint"))
    elif flavor == "chc":
        preds = {f.name for f in funs}
        for f in funs:
            if f.sort.name != "Bool":
                out.append(SygusError("E-LOGIC-SPECIAL", f"CHC logics need Bool-valued predicates, {f.name} is not"))
        if not state.chc_clauses:
            out.append(SygusError("E-LOGIC-SPECIAL", "CHC logics need at least one chc-constraint"))
        if any(o != "chc-constraint" for o in origins):
            out.append(SygusError("E-LOGIC-SPECIAL", "CHC logics allow constraints only from chc-constraint"))
        queries = 0
        for i, (params, body, head) in enumerate(state.chc_clauses):
            variables = {n for n, _ in params}
            h = strip_annotations(head)
            if isinstance(h, Lit) and h.value is False:
                queries += 1
            elif not is_s_atomic(h, preds, variables):
                out.append(_violation("E-LOGIC-SPECIAL", f"head of chc-constraint {i + 1} is not S-atomic", head))
            if not is_s_atomic_conj(body, preds, variables):
                out.append(_violation("E-LOGIC-SPECIAL", f"body of chc-constraint {i + 1} is not a conjunction of S-atomic terms", body))
        if state.chc_clauses and queries != 1:
            out.append(SygusError("E-LOGIC-SPECIAL", f"CHC logics need exactly one query clause, found {queries}"))
    elif flavor == "pbe":
        for t, o in zip(state.constraints, origins):
            if o != "constraint" or not is_pbe_formula(t, state.signature):
                out.append(_violation("E-LOGIC-SPECIAL", "PBE logics allow only PBE-equality constraints", t))
    return out


def logic_allows_symbol(spec: LogicSpec, name: str) -> bool:
    return name in builtin_symbols(spec)
