"""Builtin theory signatures, logic names and sort checking."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .errors import SygusError
from .syntax import (
    BOOL,
    INT,
    REAL,
    REGLAN,
    STRING,
    Annot,
    App,
    Id,
    Identifier,
    Lambda,
    Let,
    Lit,
    Quant,
    Sort,
    Term,
    bv_sort,
    bv_width,
    function_sort,
    print_term,
)

# ---------------------------------------------------------------------------
# Logic names

LOGIC_RE = re.compile(r"(A)?(UF)?(DT)?(S)?(BV)?(LIA|NIA|LRA|NRA)?\Z")


@dataclass(frozen=True)
class LogicSpec:
    """The theories included by an SMT-LIB logic name (without ``QF_``)."""

    name: str
    arrays: bool = False
    uf: bool = False
    dt: bool = False
    strings: bool = False
    bv: bool = False
    arith: str | None = None  # LIA, NIA, LRA, NRA

    @property
    def ints(self) -> bool:
        return self.arith in ("LIA", "NIA")

    @property
    def reals(self) -> bool:
        return self.arith in ("LRA", "NRA")

    @property
    def linear(self) -> bool:
        return self.arith in ("LIA", "LRA")

    @property
    def int_sort(self) -> bool:
        # strings bring Int along for str.len and friends
        return self.ints or self.strings


CORE = LogicSpec("Core")
ALL = LogicSpec("ALL", True, True, True, True, True, "NIA")

SPECIAL_PREFIXES = {"PBE_": "pbe", "Inv_": "inv", "CHC_": "chc"}


def parse_logic_name(name: str) -> tuple[str, LogicSpec]:
    """Return ``(flavor, spec)`` where flavor is smtlib, pbe, inv or chc."""
    flavor = "smtlib"
    base = name
    for prefix, fl in SPECIAL_PREFIXES.items():
        if name.startswith(prefix):
            flavor, base = fl, name[len(prefix):]
            break
    if base.startswith("QF_"):
        raise SygusError("E-LOGIC", f"logic {name} is quantifier-free; SyGuS logics may not use the QF_ prefix")
    if base == "ALL":
        return flavor, ALL
    m = LOGIC_RE.match(base)
    if not base or m is None:
        raise SygusError("E-LOGIC", f"unknown logic {name}")
    a, uf, dt, s, bv, arith = m.groups()
    return flavor, LogicSpec(base, bool(a), bool(uf), bool(dt), bool(s), bool(bv), arith)


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True)
class FunDecl:
    """A user-level symbol: variable, function-to-synthesize, macro,
    constructor, selector or oracle-valued variable."""

    name: str
    kind: str
    args: tuple[Sort, ...]
    result: Sort
    datatype: str | None = None

    @property
    def sort(self) -> Sort:
        if not self.args:
            return self.result
        return function_sort(self.args, self.result)


@dataclass(frozen=True)
class DatatypeDef:
    name: str
    constructors: tuple[tuple[str, tuple[tuple[str, Sort], ...]], ...]

    def constructor(self, name):
        for c, sels in self.constructors:
            if c == name:
                return sels
        return None


@dataclass(frozen=True)
class SortDecl:
    kind: str  # datatype | uninterpreted | alias
    arity: int = 0
    params: tuple[str, ...] = ()
    definition: Sort | None = None


@dataclass(frozen=True)
class Macro:
    name: str
    params: tuple[tuple[str, Sort], ...]
    result: Sort
    body: Term


@dataclass(frozen=True)
class Signature:
    logic: LogicSpec = CORE
    symbols: dict = field(default_factory=dict)
    sorts: dict = field(default_factory=dict)
    datatypes: dict = field(default_factory=dict)
    macros: dict = field(default_factory=dict)
    weights: dict = field(default_factory=lambda: {"weight": 0})
    strict: bool = True
    oracles: bool = False

    def bound(self, name: str) -> bool:
        return name in self.symbols or name in self.sorts

    def with_symbol(self, decl: FunDecl) -> "Signature":
        if self.bound(decl.name):
            raise SygusError("E-DUP-SYMBOL", f"symbol {decl.name} is already declared")
        return replace(self, symbols={**self.symbols, decl.name: decl})

    def with_macro(self, m: Macro) -> "Signature":
        sig = self.with_symbol(FunDecl(m.name, "macro", tuple(s for _, s in m.params), m.result))
        return replace(sig, macros={**sig.macros, m.name: m})

    def with_sort(self, name: str, decl: SortDecl) -> "Signature":
        if self.bound(name):
            raise SygusError("E-DUP-SYMBOL", f"symbol {name} is already declared")
        return replace(self, sorts={**self.sorts, name: decl})

    def with_weight(self, name: str, default: int) -> "Signature":
        if name in self.weights:
            raise SygusError("E-DUP-SYMBOL", f"weight keyword :{name} is already declared")
        return replace(self, weights={**self.weights, name: default})

    def synth_funs(self):
        return [d for d in self.symbols.values() if d.kind == "synth"]

    def constructor_decl(self, name):
        d = self.symbols.get(name)
        return d if d is not None and d.kind == "constructor" else None


def theory_signature(logic: LogicSpec, strict: bool = True) -> Signature:
    return Signature(logic=logic, strict=strict)


def declare_datatypes(sig: Signature, sort_decls, datatypes) -> Signature:
    """Add datatype sorts, constructors and selectors to ``sig``."""
    if len(sort_decls) != len(datatypes):
        raise SygusError("E-ARITY", "datatype declaration lists differ in length")
    for name, arity in sort_decls:
        if arity != 0:
            raise SygusError("E-UNSUPPORTED", f"parametric datatype {name} (arity {arity}) is not supported")
        sig = sig.with_sort(name, SortDecl("datatype"))
    dts = {}
    for (name, _), ctors in zip(sort_decls, datatypes):
        d = Sort(Identifier(name))
        resolved = []
        for cname, sels in ctors:
            rsels = []
            for sname, ssort in sels:
                ssort = check_sort(ssort, sig)
                rsels.append((sname, ssort))
            resolved.append((cname, tuple(rsels)))
            sig = sig.with_symbol(FunDecl(cname, "constructor", tuple(s for _, s in rsels), d, name))
            for sname, ssort in rsels:
                sig = sig.with_symbol(FunDecl(sname, "selector", (d,), ssort, name))
        dts[name] = DatatypeDef(name, tuple(resolved))
    return replace(sig, datatypes={**sig.datatypes, **dts})


# ---------------------------------------------------------------------------
# Sorts


def check_sort(s: Sort, sig: Signature, params=(), allow_function=False) -> Sort:
    """Check that ``s`` is well formed and return it with aliases resolved."""
    name = s.head.symbol
    lg = sig.logic
    if s.is_function:
        if not allow_function:
            raise SygusError("E-SORT", f"function sort {s} is not allowed here")
        if len(s.args) < 2:
            raise SygusError("E-SORT", f"malformed function sort {s}")
        return Sort(s.head, tuple(check_sort(a, sig, params, allow_function) for a in s.args))
    if s.head.indices:
        if name == "BitVec" and len(s.head.indices) == 1 and not s.args:
            w = s.head.indices[0]
            if not lg.bv:
                raise SygusError("E-SORT", f"sort {s} requires a bit-vector logic")
            if not isinstance(w, int) or w <= 0:
                raise SygusError("E-SORT", f"bit-vector width must be positive in {s}")
            return s
        raise SygusError("E-SORT", f"unknown indexed sort {s}")
    if name in params and not s.args:
        return s
    builtin = {
        "Bool": True,
        "Int": lg.int_sort,
        "Real": lg.reals,
        "String": lg.strings,
        "RegLan": lg.strings,
    }
    if name in builtin and not s.args:
        if not builtin[name]:
            raise SygusError("E-SORT", f"sort {name} is not part of logic {lg.name}")
        return s
    if name == "Array":
        if not lg.arrays:
            raise SygusError("E-SORT", f"sort Array is not part of logic {lg.name}")
        if len(s.args) != 2:
            raise SygusError("E-SORT", f"Array expects 2 sort arguments in {s}")
        return Sort(s.head, tuple(check_sort(a, sig, params) for a in s.args))
    decl = sig.sorts.get(name)
    if decl is None:
        raise SygusError("E-SORT", f"unknown sort {s}")
    if decl.kind == "alias":
        if len(s.args) != len(decl.params):
            raise SygusError("E-SORT", f"sort {name} expects {len(decl.params)} arguments")
        args = [check_sort(a, sig, params) for a in s.args]
        return subst_sort(decl.definition, dict(zip(decl.params, args)))
    if len(s.args) != decl.arity:
        raise SygusError("E-SORT", f"sort {name} expects {decl.arity} arguments")
    return Sort(s.head, tuple(check_sort(a, sig, params) for a in s.args))


def subst_sort(s: Sort, m: dict) -> Sort:
    if not s.args and not s.head.indices and s.head.symbol in m:
        return m[s.head.symbol]
    return Sort(s.head, tuple(subst_sort(a, m) for a in s.args))


# ---------------------------------------------------------------------------
# Builtin operators

CORE_OPS = {"not", "and", "or", "=>", "xor", "=", "distinct", "ite", "true", "false"}
ARITH_OPS = {"+", "-", "*", "<", "<=", ">", ">="}
INT_OPS = {"div", "mod", "abs"}
REAL_OPS = {"/"}
BV_SAME_UNARY = {"bvnot", "bvneg"}
BV_SAME_BINARY = {
    "bvand", "bvor", "bvadd", "bvmul", "bvudiv", "bvurem", "bvshl", "bvlshr",
    "bvsub", "bvxor", "bvnand", "bvnor", "bvxnor", "bvsdiv", "bvsrem", "bvsmod", "bvashr",
}
BV_ASSOC = {"bvand", "bvor", "bvadd", "bvmul", "bvxor"}
BV_PREDICATES = {"bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge"}
BV_OTHER = {"concat", "bvcomp"}
BV_INDEXED = {"extract", "zero_extend", "sign_extend", "rotate_left", "rotate_right", "repeat"}

S, I, B, R = STRING, INT, BOOL, REGLAN
STRING_RANKS = {
    "str.len": ((S,), I),
    "str.at": ((S, I), S),
    "str.substr": ((S, I, I), S),
    "str.indexof": ((S, S, I), I),
    "str.replace": ((S, S, S), S),
    "str.replace_all": ((S, S, S), S),
    "str.replace_re": ((S, R, S), S),
    "str.replace_re_all": ((S, R, S), S),
    "str.from_int": ((I,), S),
    "str.to_int": ((S,), I),
    "str.from_code": ((I,), S),
    "str.to_code": ((S,), I),
    "str.is_digit": ((S,), B),
    "str.contains": ((S, S), B),
    "str.prefixof": ((S, S), B),
    "str.suffixof": ((S, S), B),
    "str.<": ((S, S), B),
    "str.<=": ((S, S), B),
    "str.in_re": ((S, R), B),
    "str.to_re": ((S,), R),
    "re.*": ((R,), R),
    "re.+": ((R,), R),
    "re.opt": ((R,), R),
    "re.comp": ((R,), R),
    "re.diff": ((R, R), R),
    "re.range": ((S, S), R),
}
STRING_NARY = {"str.++": S, "re.++": R, "re.union": R, "re.inter": R}
STRING_CONSTS = {"re.none": R, "re.all": R, "re.allchar": R}
STRING_INDEXED = {"re.loop": 2, "re.^": 1}
ARRAY_OPS = {"select", "store"}

BV_LITERAL_RE = re.compile(r"bv(0|[1-9][0-9]*)\Z")


def builtin_symbols(logic: LogicSpec) -> set[str]:
    """Every builtin function symbol available under ``logic``."""
    out = set(CORE_OPS)
    if logic.ints or logic.reals:
        out |= ARITH_OPS
    if logic.ints:
        out |= INT_OPS
    if logic.reals:
        out |= REAL_OPS
    if logic.bv:
        out |= BV_SAME_UNARY | BV_SAME_BINARY | BV_PREDICATES | BV_OTHER | BV_INDEXED
    if logic.strings:
        out |= set(STRING_RANKS) | set(STRING_NARY) | set(STRING_CONSTS) | set(STRING_INDEXED)
    if logic.arrays:
        out |= ARRAY_OPS
    return out


def _fail(msg, code="E-SORT"):
    raise SygusError(code, msg)


def _arity(name, args, lo, hi=None):
    n = len(args)
    if n < lo or (hi is not None and n > hi):
        want = f"{lo}" if hi == lo else (f"at least {lo}" if hi is None else f"{lo}..{hi}")
        _fail(f"{name} expects {want} arguments, got {n}")


def _all_same(name, args, want=None):
    first = want if want is not None else args[0]
    for a in args:
        if a != first:
            _fail(f"{name} applied to mismatched sorts {', '.join(map(str, args))}")
    return first


def builtin_app_sort(head: Identifier, args: list[Sort], sig: Signature) -> Sort | None:
    """Result sort of a builtin application, or None if ``head`` is not a
    builtin of the current logic."""
    name = head.symbol
    lg = sig.logic
    chain_hi = 2 if sig.strict else None
    if head.indices:
        if name == "is" and len(head.indices) == 1:
            c = sig.constructor_decl(head.indices[0])
            if c is None:
                _fail(f"(_ is {head.indices[0]}) names no constructor", "E-UNBOUND")
            _arity(str(head), args, 1, 1)
            if args[0] != c.result:
                _fail(f"{head} expects {c.result}, got {args[0]}")
            return BOOL
        if lg.bv and name in BV_INDEXED:
            _arity(str(head), args, 1, 1)
            w = bv_width(args[0])
            if w is None:
                _fail(f"{head} expects a bit-vector argument")
            idx = head.indices
            if not all(isinstance(i, int) for i in idx):
                _fail(f"{head} expects numeral indices")
            if name == "extract":
                if len(idx) != 2:
                    _fail("extract expects two indices")
                hi, lo = idx
                if not (w > hi >= lo >= 0):
                    _fail(f"extract indices {hi} {lo} out of range for width {w}")
                return bv_sort(hi - lo + 1)
            if len(idx) != 1:
                _fail(f"{name} expects one index")
            (k,) = idx
            if name in ("zero_extend", "sign_extend"):
                return bv_sort(w + k)
            if name == "repeat":
                if k < 1:
                    _fail("repeat index must be positive")
                return bv_sort(w * k)
            return args[0]
        if lg.strings and name in STRING_INDEXED:
            if len(head.indices) != STRING_INDEXED[name]:
                _fail(f"{name} expects {STRING_INDEXED[name]} indices")
            _arity(str(head), args, 1, 1)
            _all_same(str(head), args, REGLAN)
            return REGLAN
        return None
    if name == "not":
        _arity(name, args, 1, 1)
        _all_same(name, args, BOOL)
        return BOOL
    if name in ("and", "or", "xor", "=>"):
        _arity(name, args, 2)
        _all_same(name, args, BOOL)
        return BOOL
    if name == "=":
        _arity(name, args, 2, chain_hi)
        _all_same(name, args)
        return BOOL
    if name == "distinct":
        _arity(name, args, 2)
        _all_same(name, args)
        return BOOL
    if name == "ite":
        _arity(name, args, 3, 3)
        if args[0] != BOOL:
            _fail(f"ite condition has sort {args[0]}, expected Bool")
        if args[1] != args[2]:
            _fail(f"ite branches have different sorts {args[1]} and {args[2]}")
        return args[1]
    if name in ARITH_OPS and (lg.ints or lg.reals):
        num = INT if lg.ints else REAL
        if name == "-":
            _arity(name, args, 1)
        elif name in ("+", "*"):
            _arity(name, args, 2)
        else:
            _arity(name, args, 2, chain_hi)
        s = _all_same(name, args)
        if s != num:
            _fail(f"{name} applied to {s}, expected {num}")
        return BOOL if name in ("<", "<=", ">", ">=") else num
    if name in INT_OPS and lg.ints:
        _arity(name, args, 1 if name == "abs" else 2, 1 if name == "abs" else 2)
        _all_same(name, args, INT)
        return INT
    if name == "/" and lg.reals:
        _arity(name, args, 2)
        _all_same(name, args, REAL)
        return REAL
    if lg.bv:
        if name in BV_SAME_UNARY or name in BV_SAME_BINARY or name in BV_PREDICATES or name == "bvcomp":
            n = 1 if name in BV_SAME_UNARY else 2
            _arity(name, args, n, None if name in BV_ASSOC else n)
            s = _all_same(name, args)
            if bv_width(s) is None:
                _fail(f"{name} expects bit-vector arguments, got {s}")
            if name in BV_PREDICATES:
                return BOOL
            return bv_sort(1) if name == "bvcomp" else s
        if name == "concat":
            _arity(name, args, 2, 2)
            ws = [bv_width(a) for a in args]
            if None in ws:
                _fail("concat expects bit-vector arguments")
            return bv_sort(sum(ws))
    if lg.strings:
        if name in STRING_RANKS:
            ranks, res = STRING_RANKS[name]
            _arity(name, args, len(ranks), len(ranks))
            for a, r in zip(args, ranks):
                if a != r:
                    _fail(f"{name} expects ({' '.join(map(str, ranks))}), got ({' '.join(map(str, args))})")
            return res
        if name in STRING_NARY:
            _arity(name, args, 2)
            return _all_same(name, args, STRING_NARY[name])
    if lg.arrays and name in ARRAY_OPS:
        a = args[0] if args else None
        if a is None or a.head.symbol != "Array":
            _fail(f"{name} expects an array as first argument")
        idx, elem = a.args
        if name == "select":
            _arity(name, args, 2, 2)
            if args[1] != idx:
                _fail("select index sort mismatch")
            return elem
        _arity(name, args, 3, 3)
        if args[1] != idx or args[2] != elem:
            _fail("store index/element sort mismatch")
        return a
    return None


def builtin_const_sort(ident: Identifier, sig: Signature) -> Sort | None:
    lg = sig.logic
    name = ident.symbol
    if ident.indices:
        if lg.bv and len(ident.indices) == 1 and BV_LITERAL_RE.match(name) and isinstance(ident.indices[0], int):
            if ident.indices[0] <= 0:
                _fail(f"bit-vector width must be positive in {ident}")
            return bv_sort(ident.indices[0])
        if len(ident.indices) == 1 and isinstance(ident.indices[0], str) and name in sig.weights:
            f = sig.symbols.get(ident.indices[0])
            if f is None or f.kind != "synth":
                _fail(f"weight symbol {ident} refers to {ident.indices[0]}, which is not a function-to-synthesize", "E-UNBOUND")
            return INT
        return None
    if lg.strings and name in STRING_CONSTS:
        return STRING_CONSTS[name]
    return None


def literal_sort(t: Lit, sig: Signature) -> Sort:
    k = t.kind
    if k == "bool":
        return BOOL
    if k == "int":
        lg = sig.logic
        if lg.reals and not lg.int_sort:
            return REAL
        return INT
    if k == "real":
        return REAL
    if k == "string":
        return STRING
    if k == "bv":
        return bv_sort(t.value[0])
    raise ValueError(k)


def is_weight_symbol(t: Term, sig: Signature) -> bool:
    return (
        isinstance(t, Id)
        and len(t.ident.indices) == 1
        and isinstance(t.ident.indices[0], str)
        and t.ident.symbol in sig.weights
    )


def sort_check(t: Term, sig: Signature, env: dict | None = None) -> Sort:
    """Return the sort of ``t`` or raise a SygusError.

    ``env`` maps locally bound symbols (parameters, binders, non-terminals)
    to their sorts; it shadows the signature.
    """
    return _SortChecker(sig).check(t, dict(env or {}))


class _SortChecker:
    def __init__(self, sig: Signature):
        self.sig = sig

    def sort_of_symbol(self, name: str, env) -> Sort:
        if name in env:
            return env[name]
        d = self.sig.symbols.get(name)
        if d is not None:
            return d.sort
        s = builtin_const_sort(Identifier(name), self.sig)
        if s is not None:
            return s
        raise SygusError("E-UNBOUND", f"unbound symbol {name}")

    def check(self, t: Term, env) -> Sort:
        sig = self.sig
        if isinstance(t, Lit):
            if t.kind == "real" and not sig.logic.reals:
                raise SygusError("E-SORT", f"decimal {print_term(t)} requires a real arithmetic logic")
            if t.kind == "string" and not sig.logic.strings:
                raise SygusError("E-SORT", f"string literal requires a strings logic")
            if t.kind == "bv" and not sig.logic.bv:
                raise SygusError("E-SORT", f"bit-vector literal requires a bit-vector logic")
            return literal_sort(t, sig)
        if isinstance(t, Id):
            if t.ident.indices:
                s = builtin_const_sort(t.ident, sig)
                if s is None:
                    raise SygusError("E-UNBOUND", f"unknown indexed identifier {t.ident}")
                return s
            return self.sort_of_symbol(t.ident.symbol, env)
        if isinstance(t, Annot):
            return self.check(t.body, env)
        if isinstance(t, App):
            args = [self.check(a, env) for a in t.args]
            head = t.head
            if not head.indices:
                name = head.symbol
                fs = env.get(name)
                if fs is None and name in sig.symbols:
                    fs = sig.symbols[name].sort
                if fs is not None:
                    if not fs.is_function:
                        raise SygusError("E-SORT", f"{name} of sort {fs} is applied to arguments")
                    params, res = fs.args[:-1], fs.args[-1]
                    if len(params) != len(args):
                        raise SygusError("E-ARITY", f"{name} expects {len(params)} arguments, got {len(args)}")
                    for i, (p, a) in enumerate(zip(params, args)):
                        if p != a:
                            raise SygusError("E-SORT", f"argument {i + 1} of {name} has sort {a}, expected {p}")
                    return res
            res = builtin_app_sort(head, args, sig)
            if res is None:
                raise SygusError("E-UNBOUND", f"unknown function symbol {head}")
            return res
        if isinstance(t, Quant):
            inner = dict(env)
            for n, s in t.binders:
                inner[n] = check_sort(s, sig)
            body = self.check(t.body, inner)
            if body != BOOL:
                raise SygusError("E-SORT", f"{t.kind} body has sort {body}, expected Bool")
            return BOOL
        if isinstance(t, Let):
            inner = dict(env)
            for n, b in t.bindings:
                inner[n] = self.check(b, env)
            return self.check(t.body, inner)
        if isinstance(t, Lambda):
            inner = dict(env)
            params = []
            for n, s in t.params:
                s = check_sort(s, sig)
                inner[n] = s
                params.append(s)
            return function_sort(params, self.check(t.body, inner))
        raise TypeError(t)
