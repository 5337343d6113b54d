"""Substitution, macro expansion and concrete evaluation of terms."""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .syntax import (
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
    bv_width,
)
from .values import BitVec, DTValue, FunValue, value_to_term

DEFAULT_FUEL = 10_000


class EvalIssue(Exception):
    """Evaluation did not produce a value; ``reason`` names why."""

    reason = "unknown"


class Undefined(EvalIssue):
    reason = "undefined"


class OutOfFuel(EvalIssue):
    reason = "out-of-fuel"


class Unsupported(EvalIssue):
    reason = "unsupported"


# ---------------------------------------------------------------------------
# Free symbols and substitution


def free_symbols(t: Term) -> set[str]:
    """Plain symbols occurring free in ``t``, including application heads."""
    out: set[str] = set()
    _free(t, frozenset(), out)
    return out


def _free(t, bound, out):
    if isinstance(t, Id):
        if not t.ident.indices and t.name not in bound:
            out.add(t.name)
    elif isinstance(t, App):
        if not t.head.indices and t.head.symbol not in bound:
            out.add(t.head.symbol)
        for a in t.args:
            _free(a, bound, out)
    elif isinstance(t, Annot):
        _free(t.body, bound, out)
    elif isinstance(t, Quant):
        _free(t.body, bound | {n for n, _ in t.binders}, out)
    elif isinstance(t, Lambda):
        _free(t.body, bound | {n for n, _ in t.params}, out)
    elif isinstance(t, Let):
        for _, b in t.bindings:
            _free(b, bound, out)
        _free(t.body, bound | {n for n, _ in t.bindings}, out)


def fresh_name(base: str, avoid) -> str:
    k = 0
    while f"{base}!{k}" in avoid:
        k += 1
    return f"{base}!{k}"


def substitute(t: Term, binding: dict) -> Term:
    """Capture-avoiding simultaneous substitution of symbols by terms.

    Application heads bound to a Lambda are beta-reduced; heads bound to a
    plain symbol are renamed.
    """
    if not binding:
        return t
    if isinstance(t, Lit):
        return t
    if isinstance(t, Id):
        if t.ident.indices:
            return t
        return binding.get(t.name, t)
    if isinstance(t, App):
        args = tuple(substitute(a, binding) for a in t.args)
        r = None if t.head.indices else binding.get(t.head.symbol)
        if isinstance(r, Lambda):
            return beta(r, args)
        if isinstance(r, Id) and not r.ident.indices:
            return App(r.ident, args)
        return App(t.head, args)
    if isinstance(t, Annot):
        return Annot(substitute(t.body, binding), t.attrs)
    if isinstance(t, Let):
        bindings = [(n, substitute(b, binding)) for n, b in t.bindings]
        names = [n for n, _ in t.bindings]
        new_names, inner = _rename_binders(names, t.body, binding)
        return Let(tuple((nn, b) for nn, (_, b) in zip(new_names, bindings)), substitute(t.body, inner))
    if isinstance(t, (Quant, Lambda)):
        vars_ = t.binders if isinstance(t, Quant) else t.params
        names = [n for n, _ in vars_]
        new_names, inner = _rename_binders(names, t.body, binding)
        new_vars = tuple((nn, s) for nn, (_, s) in zip(new_names, vars_))
        body = substitute(t.body, inner)
        if isinstance(t, Quant):
            return Quant(t.kind, new_vars, body)
        return Lambda(new_vars, body)
    raise TypeError(t)


def _rename_binders(names, body, binding):
    inner = {k: v for k, v in binding.items() if k not in names}
    if not inner:
        return names, inner
    body_free = free_symbols(body)
    captured = set()
    for k, v in inner.items():
        if k in body_free:
            captured |= free_symbols(v)
    avoid = set(captured) | body_free | set(names)
    for v in inner.values():
        avoid |= free_symbols(v)
    new_names = []
    for n in names:
        if n in captured:
            nn = fresh_name(n, avoid)
            avoid.add(nn)
            inner[n] = Id(Identifier(nn))
            new_names.append(nn)
        else:
            new_names.append(n)
    return new_names, inner


def beta(lam: Lambda, args) -> Term:
    if len(lam.params) != len(args):
        raise ValueError("arity mismatch in beta-reduction")
    return substitute(lam.body, {n: a for (n, _), a in zip(lam.params, args)})


def expand_macros(t: Term, sig_or_macros) -> Term:
    """Replace every macro application by its beta-reduced body, to a fixpoint."""
    macros = getattr(sig_or_macros, "macros", sig_or_macros)
    if not macros:
        return t
    return _expand(t, macros, frozenset())


def _expand(t, macros, bound):
    if isinstance(t, Id):
        if not t.ident.indices and t.name in macros and t.name not in bound:
            m = macros[t.name]
            if not m.params:
                return _expand(m.body, macros, frozenset())
            return Lambda(m.params, _expand(m.body, macros, frozenset()))
        return t
    if isinstance(t, App):
        args = tuple(_expand(a, macros, bound) for a in t.args)
        name = t.head.symbol
        if not t.head.indices and name in macros and name not in bound:
            m = macros[name]
            body = substitute(m.body, {n: a for (n, _), a in zip(m.params, args)})
            return _expand(body, macros, bound)
        return App(t.head, args)
    if isinstance(t, Annot):
        return Annot(_expand(t.body, macros, bound), t.attrs)
    if isinstance(t, Quant):
        return Quant(t.kind, t.binders, _expand(t.body, macros, bound | {n for n, _ in t.binders}))
    if isinstance(t, Lambda):
        return Lambda(t.params, _expand(t.body, macros, bound | {n for n, _ in t.params}))
    if isinstance(t, Let):
        bs = tuple((n, _expand(b, macros, bound)) for n, b in t.bindings)
        return Let(bs, _expand(t.body, macros, bound | {n for n, _ in t.bindings}))
    return t


# ---------------------------------------------------------------------------
# Evaluation


@dataclass(frozen=True)
class Definition:
    params: tuple[tuple[str, Sort], ...]
    body: Term
    recursive: bool = False


@dataclass
class TableFun:
    """A function known only on finitely many points (oracle transcripts)."""

    name: str
    table: dict = field(default_factory=dict)

    def apply(self, args):
        key = tuple(args)
        if key not in self.table:
            raise Unsupported(f"{self.name} is not known at ({' '.join(map(str, args))})")
        return self.table[key]


@dataclass
class Env:
    values: dict = field(default_factory=dict)
    defs: dict = field(default_factory=dict)
    sig: object = None
    weights: dict = field(default_factory=dict)
    real_numerals: bool = False

    def bind(self, **kw):
        return Env({**self.values, **kw}, self.defs, self.sig, self.weights, self.real_numerals)


def make_env(sig=None, defs=None, values=None, weights=None) -> Env:
    """Environment with the macros of ``sig`` installed as definitions."""
    d = {}
    real = False
    if sig is not None:
        for m in sig.macros.values():
            d[m.name] = Definition(m.params, m.body, False)
        real = sig.logic.reals and not sig.logic.int_sort
    d.update(defs or {})
    return Env(dict(values or {}), d, sig, dict(weights or {}), real)


def evaluate(t: Term, env: Env, fuel: int = DEFAULT_FUEL):
    """Evaluate ``t``; raises Undefined, OutOfFuel or Unsupported."""
    return Evaluator(env, fuel).eval(t, env.values)


FINITE_QUANT_LIMIT = 4096


class Evaluator:
    def __init__(self, env: Env, fuel: int = DEFAULT_FUEL):
        self.env = env
        self.fuel = fuel

    def eval(self, t, local):
        old = sys.getrecursionlimit()
        if old < 20000:
            sys.setrecursionlimit(20000)
        try:
            return self._eval(t, local)
        except RecursionError:
            raise OutOfFuel("evaluation nested too deeply") from None

    # -- core dispatch
    def _eval(self, t, local):
        if isinstance(t, Lit):
            if t.kind == "int" and self.env.real_numerals:
                return Fraction(t.value)
            if t.kind == "bv":
                return BitVec(t.value[0], t.value[1])
            return t.value
        if isinstance(t, Id):
            return self._symbol(t, local)
        if isinstance(t, Annot):
            return self._eval(t.body, local)
        if isinstance(t, App):
            return self._app(t, local)
        if isinstance(t, Let):
            inner = dict(local)
            for n, b in t.bindings:
                inner[n] = self._eval(b, local)
            return self._eval(t.body, inner)
        if isinstance(t, Lambda):
            return self._closure(t.params, t.body, local)
        if isinstance(t, Quant):
            return self._quant(t, local)
        raise TypeError(t)

    def _closure(self, params, body, local):
        names = {n for n, _ in params}
        free = free_symbols(body) - names
        binding = {n: value_to_term(local[n]) for n in free if n in local and not isinstance(local[n], TableFun)}
        return FunValue(tuple(params), substitute(body, binding))

    def _symbol(self, t, local):
        ident = t.ident
        if ident.indices:
            if len(ident.indices) == 1 and isinstance(ident.indices[0], int) and ident.symbol.startswith("bv"):
                return BitVec(ident.indices[0], int(ident.symbol[2:]) % (1 << ident.indices[0]))
            key = (ident.symbol, ident.indices[0])
            if key in self.env.weights:
                return self.env.weights[key]
            raise Unsupported(f"no interpretation for {ident}")
        name = ident.symbol
        if name in local:
            return local[name]
        d = self.env.defs.get(name)
        if d is not None:
            if not d.params:
                return self._call(name, d, [])
            return FunValue(d.params, d.body) if not d.recursive else _NamedFun(name)
        sig = self.env.sig
        if sig is not None:
            c = sig.constructor_decl(name)
            if c is not None and not c.args:
                return DTValue(name)
        if name in ("re.none", "re.all", "re.allchar"):
            raise Unsupported("regular expressions are not evaluated")
        raise Unsupported(f"no value for symbol {name}")

    def _call(self, name, d: Definition, args):
        if d.recursive:
            if self.fuel <= 0:
                raise OutOfFuel(f"fuel exhausted in {name}")
            self.fuel -= 1
        inner = {n: a for (n, _), a in zip(d.params, args)}
        return self._eval(d.body, inner)

    def apply_value(self, f, args):
        if isinstance(f, FunValue):
            return self._eval(f.body, {n: a for (n, _), a in zip(f.params, args)})
        if isinstance(f, TableFun):
            return f.apply(args)
        if isinstance(f, _NamedFun):
            return self._call(f.name, self.env.defs[f.name], args)
        raise Unsupported(f"cannot apply {f!r}")

    def _quant(self, t, local):
        domains = []
        for _, s in t.binders:
            dom = finite_domain(s)
            if dom is None:
                raise Unsupported(f"quantifier over infinite sort {s}")
            domains.append(dom)
        total = 1
        for d in domains:
            total *= len(d)
        if total > FINITE_QUANT_LIMIT:
            raise Unsupported("quantifier domain too large")
        want = t.kind == "exists"
        undefined = False
        for combo in itertools.product(*domains):
            inner = dict(local)
            inner.update({n: v for (n, _), v in zip(t.binders, combo)})
            try:
                r = self._eval(t.body, inner)
            except Undefined:
                undefined = True
                continue
            if r == want:
                return want
        if undefined:
            raise Undefined("quantifier body undefined")
        return not want

    # -- applications
    def _app(self, t, local):
        head = t.head
        name = head.symbol
        if not head.indices:
            if name in BOOL_CONNECTIVES:
                return self._connective(name, t.args, local)
            if name == "ite":
                return self._ite(t.args, local)
            if name in local:
                args = [self._eval(a, local) for a in t.args]
                return self.apply_value(local[name], args)
            d = self.env.defs.get(name)
            if d is not None:
                args = [self._eval(a, local) for a in t.args]
                return self._call(name, d, args)
            sig = self.env.sig
            if sig is not None:
                decl = sig.symbols.get(name)
                if decl is not None and decl.kind == "constructor":
                    return DTValue(name, tuple(self._eval(a, local) for a in t.args))
                if decl is not None and decl.kind == "selector":
                    v = self._eval(t.args[0], local)
                    return self._select(decl, name, v)
        args = [self._eval(a, local) for a in t.args]
        if head.indices:
            return self._indexed(head, args)
        fn = BUILTINS.get(name)
        if fn is None:
            raise Unsupported(f"no interpretation for {name}")
        return fn(args)

    def _select(self, decl, name, v):
        dt = self.env.sig.datatypes[decl.datatype]
        if not isinstance(v, DTValue):
            raise Undefined(f"{name} applied to a non-datatype value")
        sels = dt.constructor(v.ctor)
        for i, (sname, _) in enumerate(sels or ()):
            if sname == name:
                return v.args[i]
        raise Undefined(f"selector {name} applied to {v.ctor}")

    def _indexed(self, head, args):
        name = head.symbol
        idx = head.indices
        if name == "is":
            v = args[0]
            return isinstance(v, DTValue) and v.ctor == idx[0]
        if name in BV_INDEXED_FNS:
            return BV_INDEXED_FNS[name](idx, args[0])
        raise Unsupported(f"no interpretation for {head}")

    def _connective(self, name, args, local):
        vals = []
        undefined = None
        for a in args:
            try:
                vals.append(self._eval(a, local))
            except Undefined as e:
                vals.append(None)
                undefined = e
        if name == "not":
            if vals[0] is None:
                raise undefined
            return not vals[0]
        if name == "and":
            if any(v is False for v in vals):
                return False
        elif name == "or":
            if any(v is True for v in vals):
                return True
        elif name == "=>":
            if any(v is False for v in vals[:-1]) or vals[-1] is True:
                return True
        if undefined is not None:
            raise undefined
        if name == "and":
            return True
        if name == "or":
            return False
        if name == "=>":
            return False
        if name == "xor":
            r = False
            for v in vals:
                r ^= v
            return r
        raise AssertionError(name)

    def _ite(self, args, local):
        try:
            c = self._eval(args[0], local)
        except Undefined:
            a = self._eval(args[1], local)
            b = self._eval(args[2], local)
            if a == b:
                return a
            raise
        return self._eval(args[1] if c else args[2], local)


@dataclass(frozen=True)
class _NamedFun:
    name: str


BOOL_CONNECTIVES = {"not", "and", "or", "=>", "xor"}


def finite_domain(s: Sort):
    if s.head.symbol == "Bool" and not s.args:
        return [False, True]
    w = bv_width(s)
    if w is not None and w <= 8:
        return [BitVec(w, v) for v in range(1 << w)]
    return None


# ---------------------------------------------------------------------------
# Builtin operator semantics


def _eq(args):
    for a in args:
        if isinstance(a, (FunValue, TableFun)):
            raise Unsupported("equality on function values")
    return all(a == args[0] for a in args[1:])


def _distinct(args):
    for i in range(len(args)):
        for j in range(i + 1, len(args)):
            if args[i] == args[j]:
                return False
    return True


def _chain(op):
    def f(args):
        return all(op(a, b) for a, b in zip(args, args[1:]))

    return f


def _minus(args):
    if len(args) == 1:
        return -args[0]
    r = args[0]
    for a in args[1:]:
        r -= a
    return r


def _plus(args):
    r = args[0]
    for a in args[1:]:
        r = r + a
    return r


def _times(args):
    r = args[0]
    for a in args[1:]:
        r = r * a
    return r


def euclid_div(a: int, b: int) -> int:
    if b == 0:
        raise Undefined("division by zero")
    q = a // b
    if a - b * q < 0:
        q += 1
    return q


def euclid_mod(a: int, b: int) -> int:
    if b == 0:
        raise Undefined("modulo by zero")
    return a - b * euclid_div(a, b)


def _int_div(args):
    r = args[0]
    for a in args[1:]:
        r = euclid_div(r, a)
    return r


def _real_div(args):
    r = Fraction(args[0])
    for a in args[1:]:
        if a == 0:
            raise Undefined("division by zero")
        r = r / a
    return r


# bit-vectors


def _bv(w, v):
    return BitVec(w, v & ((1 << w) - 1))


def _bv_nary(op):
    def f(args):
        w = args[0].width
        r = args[0].value
        for a in args[1:]:
            r = op(r, a.value, w) & ((1 << w) - 1)
        return BitVec(w, r)

    return f


def _bv_bin(op):
    def f(args):
        a, b = args
        return _bv(a.width, op(a, b, a.width))

    return f


def _udiv(a, b, w):
    return (1 << w) - 1 if b.value == 0 else a.value // b.value


def _urem(a, b, w):
    return a.value if b.value == 0 else a.value % b.value


def _sdiv(a, b, w):
    sa, sb = a.signed, b.signed
    if sb == 0:
        return 1 if sa < 0 else (1 << w) - 1
    q = abs(sa) // abs(sb)
    return -q if (sa < 0) != (sb < 0) else q


def _srem(a, b, w):
    sa, sb = a.signed, b.signed
    if sb == 0:
        return a.value
    r = abs(sa) % abs(sb)
    return -r if sa < 0 else r


def _smod(a, b, w):
    sa, sb = a.signed, b.signed
    if sb == 0:
        return a.value
    u = abs(sa) % abs(sb)
    if u == 0:
        return 0
    if sa >= 0 and sb > 0:
        return u
    if sa < 0 and sb > 0:
        return -u + sb
    if sa >= 0 and sb < 0:
        return u + sb
    return -u


def _shl(a, b, w):
    return 0 if b.value >= w else a.value << b.value


def _lshr(a, b, w):
    return 0 if b.value >= w else a.value >> b.value


def _ashr(a, b, w):
    if b.value >= w:
        return -1 if a.signed < 0 else 0
    return a.signed >> b.value


def _concat(args):
    a, b = args
    return BitVec(a.width + b.width, (a.value << b.width) | b.value)


def _extract(idx, v):
    hi, lo = idx
    return _bv(hi - lo + 1, v.value >> lo)


def _zext(idx, v):
    return BitVec(v.width + idx[0], v.value)


def _sext(idx, v):
    return _bv(v.width + idx[0], v.signed)


def _rotl(idx, v):
    w = v.width
    k = idx[0] % w
    return _bv(w, (v.value << k) | (v.value >> (w - k)))


def _rotr(idx, v):
    w = v.width
    k = idx[0] % w
    return _bv(w, (v.value >> k) | (v.value << (w - k)))


def _repeat(idx, v):
    r = 0
    for _ in range(idx[0]):
        r = (r << v.width) | v.value
    return BitVec(v.width * idx[0], r)


BV_INDEXED_FNS = {
    "extract": _extract,
    "zero_extend": _zext,
    "sign_extend": _sext,
    "rotate_left": _rotl,
    "rotate_right": _rotr,
    "repeat": _repeat,
}


# strings


def str_at(s, i):
    return s[i] if 0 <= i < len(s) else ""


def str_substr(s, i, n):
    if 0 <= i < len(s) and n > 0:
        return s[i:i + n]
    return ""


def str_indexof(s, t, i):
    if 0 <= i <= len(s):
        return s.find(t, i)
    return -1


def str_replace(s, t, u):
    if t == "":
        return u + s
    return s.replace(t, u, 1)


def str_replace_all(s, t, u):
    if t == "":
        return s
    return s.replace(t, u)


def str_from_int(n):
    return str(n) if n >= 0 else ""


def str_to_int(s):
    if s and all("0" <= c <= "9" for c in s):
        return int(s)
    return -1


def str_to_code(s):
    return ord(s) if len(s) == 1 else -1


def str_from_code(n):
    return chr(n) if 0 <= n <= 196607 else ""


def str_is_digit(s):
    return len(s) == 1 and "0" <= s <= "9"


def _unsupported(what):
    def f(args):
        raise Unsupported(f"{what} is not evaluated")

    return f


BUILTINS = {
    "=": _eq,
    "distinct": _distinct,
    "+": _plus,
    "-": _minus,
    "*": _times,
    "<": _chain(lambda a, b: a < b),
    "<=": _chain(lambda a, b: a <= b),
    ">": _chain(lambda a, b: a > b),
    ">=": _chain(lambda a, b: a >= b),
    "div": _int_div,
    "mod": lambda a: euclid_mod(a[0], a[1]),
    "abs": lambda a: abs(a[0]),
    "/": _real_div,
    "bvnot": lambda a: _bv(a[0].width, ~a[0].value),
    "bvneg": lambda a: _bv(a[0].width, -a[0].value),
    "bvand": _bv_nary(lambda x, y, w: x & y),
    "bvor": _bv_nary(lambda x, y, w: x | y),
    "bvxor": _bv_nary(lambda x, y, w: x ^ y),
    "bvadd": _bv_nary(lambda x, y, w: x + y),
    "bvmul": _bv_nary(lambda x, y, w: x * y),
    "bvsub": _bv_bin(lambda a, b, w: a.value - b.value),
    "bvnand": _bv_bin(lambda a, b, w: ~(a.value & b.value)),
    "bvnor": _bv_bin(lambda a, b, w: ~(a.value | b.value)),
    "bvxnor": _bv_bin(lambda a, b, w: ~(a.value ^ b.value)),
    "bvudiv": _bv_bin(_udiv),
    "bvurem": _bv_bin(_urem),
    "bvsdiv": _bv_bin(_sdiv),
    "bvsrem": _bv_bin(_srem),
    "bvsmod": _bv_bin(_smod),
    "bvshl": _bv_bin(_shl),
    "bvlshr": _bv_bin(_lshr),
    "bvashr": _bv_bin(_ashr),
    "bvcomp": lambda a: BitVec(1, int(a[0] == a[1])),
    "concat": _concat,
    "bvult": lambda a: a[0].value < a[1].value,
    "bvule": lambda a: a[0].value <= a[1].value,
    "bvugt": lambda a: a[0].value > a[1].value,
    "bvuge": lambda a: a[0].value >= a[1].value,
    "bvslt": lambda a: a[0].signed < a[1].signed,
    "bvsle": lambda a: a[0].signed <= a[1].signed,
    "bvsgt": lambda a: a[0].signed > a[1].signed,
    "bvsge": lambda a: a[0].signed >= a[1].signed,
    "str.++": lambda a: "".join(a),
    "str.len": lambda a: len(a[0]),
    "str.at": lambda a: str_at(*a),
    "str.substr": lambda a: str_substr(*a),
    "str.indexof": lambda a: str_indexof(*a),
    "str.replace": lambda a: str_replace(*a),
    "str.replace_all": lambda a: str_replace_all(*a),
    "str.from_int": lambda a: str_from_int(a[0]),
    "str.to_int": lambda a: str_to_int(a[0]),
    "str.from_code": lambda a: str_from_code(a[0]),
    "str.to_code": lambda a: str_to_code(a[0]),
    "str.is_digit": lambda a: str_is_digit(a[0]),
    "str.contains": lambda a: a[1] in a[0],
    "str.prefixof": lambda a: a[1].startswith(a[0]),
    "str.suffixof": lambda a: a[1].endswith(a[0]),
    "str.<": lambda a: a[0] < a[1],
    "str.<=": lambda a: a[0] <= a[1],
}
for _op in ("str.in_re", "str.to_re", "str.replace_re", "str.replace_re_all", "re.++", "re.union",
            "re.inter", "re.*", "re.+", "re.opt", "re.comp", "re.diff", "re.range", "select", "store"):
    BUILTINS[_op] = _unsupported(_op)
