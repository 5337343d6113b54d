"""Typed AST for SyGuS sorts, terms, grammars and commands, with a parser
from S-expressions and a printer back to concrete syntax."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import SygusError
from .reader import SExpr, Span, encode_string, is_reserved, print_sexpr, read_all


# ---------------------------------------------------------------------------
# Identifiers and sorts


@dataclass(frozen=True)
class Identifier:
    symbol: str
    indices: tuple = ()

    def __str__(self):
        if not self.indices:
            return self.symbol
        return "(_ " + " ".join([self.symbol, *map(str, self.indices)]) + ")"


@dataclass(frozen=True)
class Sort:
    head: Identifier
    args: tuple["Sort", ...] = ()

    @property
    def name(self) -> str:
        return self.head.symbol

    @property
    def is_function(self) -> bool:
        return self.head.symbol == "->"

    def __str__(self):
        if not self.args:
            return str(self.head)
        return "(" + " ".join([str(self.head), *map(str, self.args)]) + ")"


def simple_sort(name: str) -> Sort:
    return Sort(Identifier(name))


def bv_sort(width: int) -> Sort:
    return Sort(Identifier("BitVec", (width,)))


def function_sort(args, result: Sort) -> Sort:
    return Sort(Identifier("->"), (*args, result))


BOOL = simple_sort("Bool")
INT = simple_sort("Int")
REAL = simple_sort("Real")
STRING = simple_sort("String")
REGLAN = simple_sort("RegLan")


def bv_width(sort: Sort) -> int | None:
    if sort.head.symbol == "BitVec" and len(sort.head.indices) == 1 and not sort.args:
        return sort.head.indices[0]
    return None


# ---------------------------------------------------------------------------
# Attributes and terms


@dataclass(frozen=True)
class Attribute:
    keyword: str
    value: SExpr | None = None

    def numeral(self) -> int | None:
        if self.value is not None and self.value.kind == "numeral":
            return int(self.value.text)
        return None

    def __str__(self):
        if self.value is None:
            return self.keyword
        return f"{self.keyword} {print_sexpr(self.value)}"


class Term:
    __slots__ = ()

    def __str__(self):
        return print_term(self)


@dataclass(frozen=True, repr=False)
class Lit(Term):
    """Literal constant. ``value`` is int, Fraction, bool, str, or a
    ``(width, value)`` pair for bit-vectors."""

    kind: str
    value: object
    text: str | None = field(default=None, compare=False)

    def __repr__(self):
        return f"Lit({print_term(self)})"


@dataclass(frozen=True, repr=False)
class Id(Term):
    ident: Identifier

    @property
    def name(self) -> str:
        return self.ident.symbol

    def __repr__(self):
        return f"Id({self.ident})"


@dataclass(frozen=True, repr=False)
class App(Term):
    head: Identifier
    args: tuple[Term, ...]

    def __repr__(self):
        return f"App({print_term(self)})"


@dataclass(frozen=True, repr=False)
class Annot(Term):
    body: Term
    attrs: tuple[Attribute, ...]

    def __repr__(self):
        return f"Annot({print_term(self)})"


@dataclass(frozen=True, repr=False)
class Quant(Term):
    kind: str  # "forall" | "exists"
    binders: tuple[tuple[str, Sort], ...]
    body: Term

    def __repr__(self):
        return f"Quant({print_term(self)})"


@dataclass(frozen=True, repr=False)
class Let(Term):
    bindings: tuple[tuple[str, Term], ...]
    body: Term

    def __repr__(self):
        return f"Let({print_term(self)})"


@dataclass(frozen=True, repr=False)
class Lambda(Term):
    """Closed function value, printed as ``(lambda ((x S) ...) body)``."""

    params: tuple[tuple[str, Sort], ...]
    body: Term

    def __repr__(self):
        return f"Lambda({print_term(self)})"


def sym(name: str) -> Id:
    return Id(Identifier(name))


def app(name: str, *args: Term) -> Term:
    if not args:
        return sym(name)
    return App(Identifier(name), tuple(args))


TRUE = Lit("bool", True)
FALSE = Lit("bool", False)


def int_lit(n: int) -> Term:
    if n < 0:
        return App(Identifier("-"), (Lit("int", -n),))
    return Lit("int", n)


def conj(terms) -> Term:
    terms = list(terms)
    if not terms:
        return TRUE
    if len(terms) == 1:
        return terms[0]
    return App(Identifier("and"), tuple(terms))


def strip_annotations(t: Term) -> Term:
    while isinstance(t, Annot):
        t = t.body
    return t


def term_size(t: Term) -> int:
    if isinstance(t, App):
        return 1 + sum(term_size(a) for a in t.args)
    if isinstance(t, Annot):
        return term_size(t.body)
    if isinstance(t, Quant):
        return 1 + term_size(t.body)
    if isinstance(t, Let):
        return 1 + sum(term_size(b) for _, b in t.bindings) + term_size(t.body)
    if isinstance(t, Lambda):
        return 1 + term_size(t.body)
    return 1


def is_binder_free(t: Term) -> bool:
    if isinstance(t, (Quant, Let, Lambda)):
        return False
    if isinstance(t, App):
        return all(is_binder_free(a) for a in t.args)
    if isinstance(t, Annot):
        return is_binder_free(t.body)
    return True


def subterms(t: Term):
    """Pre-order traversal, descending through every term position."""
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, Annot):
        yield from subterms(t.body)
    elif isinstance(t, (Quant, Lambda)):
        yield from subterms(t.body)
    elif isinstance(t, Let):
        for _, b in t.bindings:
            yield from subterms(b)
        yield from subterms(t.body)


def symbols_of(t: Term) -> set[str]:
    """All plain symbols used as identifiers or application heads."""
    out = set()
    for s in subterms(t):
        if isinstance(s, Id) and not s.ident.indices:
            out.add(s.ident.symbol)
        elif isinstance(s, App):
            out.add(s.head.symbol)
    return out


# ---------------------------------------------------------------------------
# Grammars


@dataclass(frozen=True)
class ConstantClass:
    sort: Sort

    def __str__(self):
        return f"(Constant {self.sort})"


@dataclass(frozen=True)
class VariableClass:
    sort: Sort

    def __str__(self):
        return f"(Variable {self.sort})"


GTerm = Union[ConstantClass, VariableClass, Term]


@dataclass(frozen=True)
class GrammarDef:
    nonterminals: tuple[tuple[str, Sort], ...]
    rules: tuple[tuple[str, Sort, tuple[GTerm, ...]], ...]

    @property
    def start(self) -> str:
        return self.nonterminals[0][0]


# ---------------------------------------------------------------------------
# Commands

SortedVars = tuple[tuple[str, Sort], ...]
Constructor = tuple[str, SortedVars]


@dataclass(frozen=True)
class Command:
    span: Span | None = field(default=None, compare=False, kw_only=True, repr=False)
    head = ""

    def __str__(self):
        return print_command(self)


@dataclass(frozen=True)
class SetLogic(Command):
    logic: str
    head = "set-logic"


@dataclass(frozen=True)
class SetFeature(Command):
    feature: str
    value: bool
    head = "set-feature"


@dataclass(frozen=True)
class SetOption(Command):
    keyword: str
    value: SExpr
    head = "set-option"


@dataclass(frozen=True)
class SetInfo(Command):
    keyword: str
    value: SExpr
    head = "set-info"


@dataclass(frozen=True)
class DeclareVar(Command):
    name: str
    sort: Sort
    head = "declare-var"


@dataclass(frozen=True)
class DeclareWeight(Command):
    name: str
    attrs: tuple[Attribute, ...] = ()
    head = "declare-weight"


@dataclass(frozen=True)
class SynthFun(Command):
    name: str
    params: SortedVars
    sort: Sort
    grammar: GrammarDef | None = None
    head = "synth-fun"


@dataclass(frozen=True)
class DefineFun(Command):
    name: str
    params: SortedVars
    sort: Sort
    body: Term
    head = "define-fun"


@dataclass(frozen=True)
class DefineFunRec(Command):
    name: str
    params: SortedVars
    sort: Sort
    body: Term
    head = "define-fun-rec"


@dataclass(frozen=True)
class DefineSort(Command):
    name: str
    params: tuple[str, ...]
    sort: Sort
    head = "define-sort"


@dataclass(frozen=True)
class DeclareSort(Command):
    name: str
    arity: int
    head = "declare-sort"


@dataclass(frozen=True)
class DeclareDatatype(Command):
    name: str
    constructors: tuple[Constructor, ...]
    head = "declare-datatype"


@dataclass(frozen=True)
class DeclareDatatypes(Command):
    sort_decls: tuple[tuple[str, int], ...]
    datatypes: tuple[tuple[Constructor, ...], ...]
    head = "declare-datatypes"


@dataclass(frozen=True)
class Constraint(Command):
    term: Term
    head = "constraint"


@dataclass(frozen=True)
class Assume(Command):
    term: Term
    head = "assume"


@dataclass(frozen=True)
class InvConstraint(Command):
    inv: str
    pre: str
    trans: str
    post: str
    head = "inv-constraint"


@dataclass(frozen=True)
class ChcConstraint(Command):
    params: SortedVars
    body: Term
    head_term: Term
    head = "chc-constraint"


@dataclass(frozen=True)
class CheckSynth(Command):
    head = "check-synth"


@dataclass(frozen=True)
class OptimizeSynth(Command):
    terms: tuple[Term, ...]
    attrs: tuple[Attribute, ...] = ()
    head = "optimize-synth"


@dataclass(frozen=True)
class OracleConstraint(Command):
    inputs: SortedVars
    outputs: SortedVars
    template: Term
    oracle: str
    attrs: tuple[Attribute, ...] = ()
    head = "oracle-constraint"


@dataclass(frozen=True)
class OracleAssume(Command):
    inputs: SortedVars
    outputs: SortedVars
    template: Term
    oracle: str
    attrs: tuple[Attribute, ...] = ()
    head = "oracle-assume"


@dataclass(frozen=True)
class DeclareOracleFun(Command):
    name: str
    arg_sorts: tuple[Sort, ...]
    sort: Sort
    oracle: str
    attrs: tuple[Attribute, ...] = ()
    head = "declare-oracle-fun"


ORACLE_SUGARS = (
    "oracle-constraint-io",
    "oracle-constraint-cex",
    "oracle-constraint-membership",
    "oracle-constraint-poswitness",
    "oracle-constraint-negwitness",
    "declare-correctness-oracle",
    "declare-correctness-cex-oracle",
)


@dataclass(frozen=True)
class OracleSugar(Command):
    kind: str  # one of ORACLE_SUGARS
    fun: str
    oracle: str
    attrs: tuple[Attribute, ...] = ()

    @property
    def head(self):
        return self.kind


ORACLE_COMMANDS = (OracleConstraint, OracleAssume, DeclareOracleFun, OracleSugar)

FEATURES = ("grammars", "fwd-decls", "recursion", "oracles", "weights")


# ---------------------------------------------------------------------------
# Parsing


def _err(code, msg, e: SExpr | None):
    return SygusError(code, msg, e.span if e is not None else None)


def parse_symbol(e: SExpr, what="symbol") -> str:
    if e.kind != "symbol":
        raise _err("E-SYNTAX", f"expected {what}, found {print_sexpr(e)!r}", e)
    if is_reserved(e.text):
        raise _err("E-RESERVED", f"reserved word {e.text!r} used as {what}", e)
    return e.text


def parse_numeral(e: SExpr, what="numeral") -> int:
    if e.kind != "numeral":
        raise _err("E-SYNTAX", f"expected {what}, found {print_sexpr(e)!r}", e)
    return int(e.text)


def _expect_list(e: SExpr, what: str) -> SExpr:
    if not e.is_list:
        raise _err("E-SYNTAX", f"expected {what}, found {print_sexpr(e)!r}", e)
    return e


def parse_identifier(e: SExpr) -> Identifier:
    if e.is_list:
        if len(e) >= 3 and e[0].kind == "symbol" and e[0].text == "_":
            base = parse_symbol(e[1], "identifier")
            idx = []
            for i in e.children[2:]:
                if i.kind == "numeral":
                    idx.append(int(i.text))
                elif i.kind == "symbol":
                    idx.append(i.text)
                else:
                    raise _err("E-SYNTAX", f"bad index {print_sexpr(i)!r}", i)
            return Identifier(base, tuple(idx))
        raise _err("E-SYNTAX", f"expected identifier, found {print_sexpr(e)!r}", e)
    return Identifier(parse_symbol(e, "identifier"))


def parse_sort(e: SExpr) -> Sort:
    if e.is_list and len(e) >= 1 and not (e[0].kind == "symbol" and e[0].text == "_"):
        if len(e) < 2:
            raise _err("E-SYNTAX", f"malformed sort {print_sexpr(e)!r}", e)
        if e[0].kind == "symbol" and e[0].text == "->":
            return Sort(Identifier("->"), tuple(parse_sort(a) for a in e.children[1:]))
        return Sort(parse_identifier(e[0]), tuple(parse_sort(a) for a in e.children[1:]))
    return Sort(parse_identifier(e))


def parse_sorted_vars(e: SExpr) -> SortedVars:
    _expect_list(e, "sorted variable list")
    out = []
    for sv in e:
        if not sv.is_list or len(sv) != 2:
            raise _err("E-SYNTAX", f"malformed sorted variable {print_sexpr(sv)!r}", sv)
        out.append((parse_symbol(sv[0], "variable"), parse_sort(sv[1])))
    return tuple(out)


def parse_attributes(items) -> tuple[Attribute, ...]:
    items = list(items)
    out = []
    i = 0
    while i < len(items):
        k = items[i]
        if k.kind != "keyword":
            raise _err("E-SYNTAX", f"expected attribute keyword, found {print_sexpr(k)!r}", k)
        if i + 1 < len(items) and items[i + 1].kind != "keyword":
            out.append(Attribute(k.text, items[i + 1]))
            i += 2
        else:
            out.append(Attribute(k.text))
            i += 1
    return tuple(out)


def literal_from_sexpr(e: SExpr) -> Lit:
    k = e.kind
    if k == "numeral":
        return Lit("int", int(e.text), e.text)
    if k == "decimal":
        return Lit("real", Fraction(e.text), e.text)
    if k == "boolean":
        return Lit("bool", e.text == "true", e.text)
    if k == "hex":
        digits = e.text[2:]
        return Lit("bv", (4 * len(digits), int(digits, 16)), e.text)
    if k == "binary":
        digits = e.text[2:]
        return Lit("bv", (len(digits), int(digits, 2)), e.text)
    if k == "string":
        return Lit("string", e.string_value, e.text)
    raise _err("E-SYNTAX", f"not a literal: {print_sexpr(e)!r}", e)


def parse_term(e: SExpr, binders: bool = True) -> Term:
    """Parse a term; with ``binders=False`` only binder-free terms are accepted."""
    k = e.kind
    if k in ("numeral", "decimal", "boolean", "hex", "binary", "string"):
        return literal_from_sexpr(e)
    if k == "keyword":
        raise _err("E-SYNTAX", f"keyword {e.text!r} where a term was expected", e)
    if k == "symbol":
        return Id(Identifier(parse_symbol(e, "term")))
    if len(e) == 0:
        raise _err("E-SYNTAX", "empty list is not a term", e)
    h = e[0]
    if h.kind == "symbol":
        name = h.text
        if name == "_":
            return Id(parse_identifier(e))
        if name == "!":
            if len(e) < 3:
                raise _err("E-SYNTAX", "annotation needs a term and at least one attribute", e)
            return Annot(parse_term(e[1], binders), parse_attributes(e.children[2:]))
        if name in ("forall", "exists", "let"):
            if not binders:
                raise _err("E-BINDER", f"{name} is not allowed in a binder-free term", e)
            if len(e) != 3 or not e[1].is_list or len(e[1]) == 0:
                raise _err("E-SYNTAX", f"malformed {name} term", e)
            if name == "let":
                bs = []
                for b in e[1]:
                    if not b.is_list or len(b) != 2:
                        raise _err("E-SYNTAX", f"malformed let binding {print_sexpr(b)!r}", b)
                    bs.append((parse_symbol(b[0], "variable"), parse_term(b[1])))
                return Let(tuple(bs), parse_term(e[2]))
            return Quant(name, parse_sorted_vars(e[1]), parse_term(e[2]))
        if name == "lambda":
            if len(e) != 3:
                raise _err("E-SYNTAX", "malformed lambda term", e)
            return Lambda(parse_sorted_vars(e[1]), parse_term(e[2]))
    if len(e) < 2:
        raise _err("E-SYNTAX", f"application without arguments: {print_sexpr(e)!r}", e)
    head = parse_identifier(h)
    return App(head, tuple(parse_term(a, binders) for a in e.children[1:]))


def parse_gterm(e: SExpr) -> GTerm:
    if e.is_list and len(e) == 2 and e[0].kind == "symbol" and e[0].text in ("Constant", "Variable"):
        s = parse_sort(e[1])
        return ConstantClass(s) if e[0].text == "Constant" else VariableClass(s)
    return parse_term(e, binders=False)


def parse_grammar(pre: SExpr, listing: SExpr) -> GrammarDef:
    nts = parse_sorted_vars(pre)
    _expect_list(listing, "grouped rule listing")
    if len(nts) == 0:
        raise _err("E-SYNTAX", "grammar predeclaration must list at least one non-terminal", pre)
    rules = []
    for grp in listing:
        if not grp.is_list or len(grp) != 3 or not grp[2].is_list or len(grp[2]) == 0:
            raise _err("E-SYNTAX", f"malformed grouped rule list {print_sexpr(grp)!r}", grp)
        rules.append(
            (parse_symbol(grp[0], "non-terminal"), parse_sort(grp[1]), tuple(parse_gterm(g) for g in grp[2]))
        )
    return GrammarDef(nts, tuple(rules))


def _arity(e: SExpr, n: int, at_least: bool = False):
    got = len(e) - 1
    if got < n or (got != n and not at_least):
        raise _err(
            "E-ARITY",
            f"{e[0].text} expects {'at least ' if at_least else ''}{n} argument(s), got {got}",
            e,
        )


def _split_attrs(args):
    """Split trailing keyword attributes off a command's argument list."""
    args = list(args)
    for i, a in enumerate(args):
        if a.kind == "keyword":
            return args[:i], parse_attributes(args[i:])
    return args, ()


def _constructors(e: SExpr) -> tuple[Constructor, ...]:
    _expect_list(e, "constructor listing")
    if len(e) == 0:
        raise _err("E-SYNTAX", "datatype needs at least one constructor", e)
    out = []
    for c in e:
        if c.kind == "symbol":
            out.append((parse_symbol(c, "constructor"), ()))
            continue
        if not c.is_list or len(c) == 0:
            raise _err("E-SYNTAX", f"malformed constructor {print_sexpr(c)!r}", c)
        if c[0].kind == "symbol" and c[0].text == "par":
            raise _err("E-UNSUPPORTED", "parametric datatypes are not supported", c)
        sels = parse_sorted_vars(SExpr("list", "", c.children[1:], c.span))
        out.append((parse_symbol(c[0], "constructor"), sels))
    return tuple(out)


def _oracle_binding(e: SExpr, cls, permissive: bool):
    args, attrs = _split_attrs(e.children[1:])
    if permissive and len(args) == 5 and all(a.is_list for a in args[:3]):
        lists = [a for a in args[:3] if len(a) > 0]
        if len(lists) == 2:
            args = lists + args[3:]
    if len(args) != 4:
        raise _err("E-ARITY", f"{e[0].text} expects 4 arguments, got {len(args)}", e)
    if permissive and args[2].kind == "symbol" and args[3].is_list:
        args = [args[0], args[1], args[3], args[2]]
    return cls(
        parse_sorted_vars(args[0]),
        parse_sorted_vars(args[1]),
        parse_term(args[2]),
        parse_symbol(args[3], "oracle name"),
        attrs,
        span=e.span,
    )


def parse_command(e: SExpr, permissive: bool = False) -> Command:
    if not e.is_list or len(e) == 0 or e[0].kind != "symbol":
        raise _err("E-SYNTAX", f"expected a command, found {print_sexpr(e)!r}", e)
    h = e[0].text
    sp = e.span
    a = e.children
    if h == "set-logic":
        _arity(e, 1)
        return SetLogic(parse_symbol(a[1], "logic name"), span=sp)
    if h == "set-feature":
        _arity(e, 2)
        if a[1].kind != "keyword":
            raise _err("E-SYNTAX", "set-feature expects a feature keyword", a[1])
        if a[2].kind != "boolean":
            raise _err("E-SYNTAX", "set-feature expects true or false", a[2])
        feat = a[1].text[1:]
        if feat not in FEATURES:
            raise _err("E-FEATURE", f"unknown feature :{feat}", a[1])
        return SetFeature(feat, a[2].text == "true", span=sp)
    if h in ("set-option", "set-info"):
        _arity(e, 2)
        if a[1].kind != "keyword":
            raise _err("E-SYNTAX", f"{h} expects a keyword", a[1])
        if a[2].kind not in ("numeral", "decimal", "boolean", "hex", "binary", "string"):
            raise _err("E-SYNTAX", f"{h} expects a literal value", a[2])
        cls = SetOption if h == "set-option" else SetInfo
        return cls(a[1].text, a[2], span=sp)
    if h == "declare-var":
        _arity(e, 2)
        return DeclareVar(parse_symbol(a[1]), parse_sort(a[2]), span=sp)
    if h == "declare-weight":
        _arity(e, 1, at_least=True)
        return DeclareWeight(parse_symbol(a[1]), parse_attributes(a[2:]), span=sp)
    if h == "synth-fun":
        if len(a) not in (4, 6):
            raise _err("E-ARITY", f"synth-fun expects 3 or 5 arguments, got {len(a) - 1}", e)
        grammar = parse_grammar(a[4], a[5]) if len(a) == 6 else None
        return SynthFun(parse_symbol(a[1]), parse_sorted_vars(a[2]), parse_sort(a[3]), grammar, span=sp)
    if h in ("define-fun", "define-fun-rec"):
        _arity(e, 4)
        cls = DefineFun if h == "define-fun" else DefineFunRec
        return cls(parse_symbol(a[1]), parse_sorted_vars(a[2]), parse_sort(a[3]), parse_term(a[4]), span=sp)
    if h == "define-sort":
        if len(a) == 3:
            return DefineSort(parse_symbol(a[1]), (), parse_sort(a[2]), span=sp)
        _arity(e, 3)
        params = tuple(parse_symbol(p, "sort parameter") for p in _expect_list(a[2], "sort parameters"))
        return DefineSort(parse_symbol(a[1]), params, parse_sort(a[3]), span=sp)
    if h == "declare-sort":
        _arity(e, 2)
        return DeclareSort(parse_symbol(a[1]), parse_numeral(a[2]), span=sp)
    if h == "declare-datatype":
        _arity(e, 2)
        return DeclareDatatype(parse_symbol(a[1]), _constructors(a[2]), span=sp)
    if h == "declare-datatypes":
        _arity(e, 2)
        decls = []
        for d in _expect_list(a[1], "sort declarations"):
            if not d.is_list or len(d) != 2:
                raise _err("E-SYNTAX", f"malformed sort declaration {print_sexpr(d)!r}", d)
            decls.append((parse_symbol(d[0]), parse_numeral(d[1])))
        dts = tuple(_constructors(d) for d in _expect_list(a[2], "datatype declarations"))
        if len(decls) != len(dts) or not decls:
            raise _err("E-ARITY", "declare-datatypes needs matching non-empty declaration lists", e)
        return DeclareDatatypes(tuple(decls), dts, span=sp)
    if h in ("constraint", "assume"):
        _arity(e, 1)
        return (Constraint if h == "constraint" else Assume)(parse_term(a[1]), span=sp)
    if h == "inv-constraint":
        _arity(e, 4)
        return InvConstraint(*(parse_symbol(x) for x in a[1:]), span=sp)
    if h == "chc-constraint":
        _arity(e, 3)
        return ChcConstraint(parse_sorted_vars(a[1]), parse_term(a[2]), parse_term(a[3]), span=sp)
    if h == "check-synth":
        _arity(e, 0)
        return CheckSynth(span=sp)
    if h == "optimize-synth":
        _arity(e, 1, at_least=True)
        terms = tuple(parse_term(t) for t in _expect_list(a[1], "objective term list"))
        return OptimizeSynth(terms, parse_attributes(a[2:]), span=sp)
    if h == "oracle-constraint":
        return _oracle_binding(e, OracleConstraint, permissive)
    if h == "oracle-assume":
        return _oracle_binding(e, OracleAssume, permissive)
    if h == "declare-oracle-fun":
        args, attrs = _split_attrs(a[1:])
        if len(args) != 4:
            raise _err("E-ARITY", f"declare-oracle-fun expects 4 arguments, got {len(args)}", e)
        sorts = tuple(parse_sort(s) for s in _expect_list(args[1], "argument sort list"))
        return DeclareOracleFun(
            parse_symbol(args[0]), sorts, parse_sort(args[2]), parse_symbol(args[3], "oracle name"), attrs, span=sp
        )
    if h in ORACLE_SUGARS:
        args, attrs = _split_attrs(a[1:])
        if len(args) != 2:
            raise _err("E-ARITY", f"{h} expects 2 arguments, got {len(args)}", e)
        return OracleSugar(h, parse_symbol(args[0]), parse_symbol(args[1], "oracle name"), attrs, span=sp)
    raise _err("E-UNKNOWN-CMD", f"unknown command {h!r}", e)


def parse_script(text: str, permissive: bool = False) -> list[Command]:
    return [parse_command(e, permissive) for e in read_all(text)]


# ---------------------------------------------------------------------------
# Printing


def print_sort(s: Sort) -> str:
    return str(s)


def print_literal(t: Lit) -> str:
    if t.text is not None:
        return t.text
    k, v = t.kind, t.value
    if k == "bool":
        return "true" if v else "false"
    if k == "int":
        return str(v) if v >= 0 else f"(- {-v})"
    if k == "real":
        from .values import format_real

        return format_real(v)
    if k == "string":
        return encode_string(v)
    if k == "bv":
        from .values import format_bv

        return format_bv(*v)
    raise ValueError(k)


def _sorted_vars(svs) -> str:
    return "(" + " ".join(f"({n} {s})" for n, s in svs) + ")"


def print_term(t: Term) -> str:
    if isinstance(t, Lit):
        return print_literal(t)
    if isinstance(t, Id):
        return str(t.ident)
    if isinstance(t, App):
        return "(" + " ".join([str(t.head), *map(print_term, t.args)]) + ")"
    if isinstance(t, Annot):
        return "(! " + " ".join([print_term(t.body), *map(str, t.attrs)]) + ")"
    if isinstance(t, Quant):
        return f"({t.kind} {_sorted_vars(t.binders)} {print_term(t.body)})"
    if isinstance(t, Let):
        bs = " ".join(f"({n} {print_term(b)})" for n, b in t.bindings)
        return f"(let ({bs}) {print_term(t.body)})"
    if isinstance(t, Lambda):
        return f"(lambda {_sorted_vars(t.params)} {print_term(t.body)})"
    raise TypeError(t)


def print_gterm(g: GTerm) -> str:
    if isinstance(g, (ConstantClass, VariableClass)):
        return str(g)
    return print_term(g)


def print_grammar(g: GrammarDef) -> str:
    pre = _sorted_vars(g.nonterminals)
    groups = " ".join(f"({y} {s} ({' '.join(map(print_gterm, gs))}))" for y, s, gs in g.rules)
    return f"{pre} ({groups})"


def _attrs(attrs) -> str:
    return "".join(" " + str(a) for a in attrs)


def _constructors_text(cs) -> str:
    parts = []
    for name, sels in cs:
        parts.append("(" + " ".join([name, *(f"({s} {srt})" for s, srt in sels)]) + ")")
    return "(" + " ".join(parts) + ")"


def print_command(c: Command) -> str:
    if isinstance(c, SetLogic):
        return f"(set-logic {c.logic})"
    if isinstance(c, SetFeature):
        return f"(set-feature :{c.feature} {'true' if c.value else 'false'})"
    if isinstance(c, (SetOption, SetInfo)):
        return f"({c.head} {c.keyword} {print_sexpr(c.value)})"
    if isinstance(c, DeclareVar):
        return f"(declare-var {c.name} {c.sort})"
    if isinstance(c, DeclareWeight):
        return f"(declare-weight {c.name}{_attrs(c.attrs)})"
    if isinstance(c, SynthFun):
        g = f" {print_grammar(c.grammar)}" if c.grammar is not None else ""
        return f"(synth-fun {c.name} {_sorted_vars(c.params)} {c.sort}{g})"
    if isinstance(c, (DefineFun, DefineFunRec)):
        return f"({c.head} {c.name} {_sorted_vars(c.params)} {c.sort} {print_term(c.body)})"
    if isinstance(c, DefineSort):
        if c.params:
            return f"(define-sort {c.name} ({' '.join(c.params)}) {c.sort})"
        return f"(define-sort {c.name} {c.sort})"
    if isinstance(c, DeclareSort):
        return f"(declare-sort {c.name} {c.arity})"
    if isinstance(c, DeclareDatatype):
        return f"(declare-datatype {c.name} {_constructors_text(c.constructors)})"
    if isinstance(c, DeclareDatatypes):
        decls = " ".join(f"({n} {k})" for n, k in c.sort_decls)
        dts = " ".join(_constructors_text(d) for d in c.datatypes)
        return f"(declare-datatypes ({decls}) ({dts}))"
    if isinstance(c, (Constraint, Assume)):
        return f"({c.head} {print_term(c.term)})"
    if isinstance(c, InvConstraint):
        return f"(inv-constraint {c.inv} {c.pre} {c.trans} {c.post})"
    if isinstance(c, ChcConstraint):
        return f"(chc-constraint {_sorted_vars(c.params)} {print_term(c.body)} {print_term(c.head_term)})"
    if isinstance(c, CheckSynth):
        return "(check-synth)"
    if isinstance(c, OptimizeSynth):
        return f"(optimize-synth ({' '.join(map(print_term, c.terms))}){_attrs(c.attrs)})"
    if isinstance(c, (OracleConstraint, OracleAssume)):
        return (
            f"({c.head} {_sorted_vars(c.inputs)} {_sorted_vars(c.outputs)} "
            f"{print_term(c.template)} {c.oracle}{_attrs(c.attrs)})"
        )
    if isinstance(c, DeclareOracleFun):
        sorts = " ".join(map(str, c.arg_sorts))
        return f"(declare-oracle-fun {c.name} ({sorts}) {c.sort} {c.oracle}{_attrs(c.attrs)})"
    if isinstance(c, OracleSugar):
        return f"({c.kind} {c.fun} {c.oracle}{_attrs(c.attrs)})"
    raise TypeError(c)


def print_node(node) -> str:
    """Print any AST node: term, sort, command or grammar."""
    if isinstance(node, Term):
        return print_term(node)
    if isinstance(node, Sort):
        return print_sort(node)
    if isinstance(node, Command):
        return print_command(node)
    if isinstance(node, GrammarDef):
        return print_grammar(node)
    if isinstance(node, (ConstantClass, VariableClass)):
        return str(node)
    raise TypeError(node)
