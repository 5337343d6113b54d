"""Concrete values and their concrete syntax.

Values are plain Python objects where possible: ``int`` for Int,
``Fraction`` for Real, ``bool``, ``str`` for String.  Bit-vectors,
datatype values and function values get small frozen classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import SygusError
from .reader import SExpr, encode_string
from .syntax import (
    BOOL,
    INT,
    REAL,
    STRING,
    App,
    Id,
    Identifier,
    Lambda,
    Lit,
    Sort,
    Term,
    bv_sort,
    bv_width,
    function_sort,
    int_lit,
    parse_term,
    print_term,
)


@dataclass(frozen=True)
class BitVec:
    width: int
    value: int
    base: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.width <= 0 or not 0 <= self.value < (1 << self.width):
            raise ValueError(f"bad bit-vector ({self.width}, {self.value})")

    @property
    def signed(self) -> int:
        if self.value >> (self.width - 1):
            return self.value - (1 << self.width)
        return self.value

    def __str__(self):
        return format_bv(self.width, self.value, self.base)


@dataclass(frozen=True)
class DTValue:
    ctor: str
    args: tuple = ()

    def __str__(self):
        return format_value(self)


@dataclass(frozen=True)
class FunValue:
    """A closed lambda term used as a value."""

    params: tuple[tuple[str, Sort], ...]
    body: Term

    def __str__(self):
        return format_value(self)


Value = object


def format_real(q) -> str:
    q = Fraction(q)
    neg = q < 0
    a = -q if neg else q
    n, d = a.numerator, a.denominator
    d2 = d
    twos = fives = 0
    while d2 % 2 == 0:
        d2 //= 2
        twos += 1
    while d2 % 5 == 0:
        d2 //= 5
        fives += 1
    if d2 != 1:
        return f"(/ (- {n}) {d})" if neg else f"(/ {n} {d})"
    digits = max(twos, fives, 1)
    scaled = n * 10**digits // d
    whole, frac = divmod(scaled, 10**digits)
    frac_text = str(frac).rjust(digits, "0").rstrip("0") or "0"
    text = f"{whole}.{frac_text}"
    return f"(- {text})" if neg else text


def format_bv(width: int, value: int, base: str | None = None) -> str:
    if base is None:
        base = "x" if width % 4 == 0 else "b"
    if base == "x" and width % 4 == 0:
        return "#x" + format(value, "X").rjust(width // 4, "0")
    return "#b" + format(value, "b").rjust(width, "0")


def format_value(v) -> str:
    return print_term(value_to_term(v))


def value_to_term(v) -> Term:
    if isinstance(v, bool):
        return Lit("bool", v)
    if isinstance(v, int):
        return int_lit(v)
    if isinstance(v, Fraction):
        return _real_term(v)
    if isinstance(v, str):
        return Lit("string", v)
    if isinstance(v, BitVec):
        return Lit("bv", (v.width, v.value), format_bv(v.width, v.value, v.base))
    if isinstance(v, DTValue):
        if not v.args:
            return Id(Identifier(v.ctor))
        return App(Identifier(v.ctor), tuple(value_to_term(a) for a in v.args))
    if isinstance(v, FunValue):
        return Lambda(v.params, v.body)
    raise TypeError(f"not a value: {v!r}")


def _real_term(q: Fraction) -> Term:
    neg = q < 0
    a = -q if neg else q
    text = format_real(a)
    if text.startswith("(/"):
        m, n = a.numerator, a.denominator
        num = App(Identifier("-"), (Lit("int", m),)) if neg else Lit("int", m)
        return App(Identifier("/"), (num, Lit("int", n)))
    lit = Lit("real", a, text)
    return App(Identifier("-"), (lit,)) if neg else lit


def value_sort(v) -> Sort | None:
    """Sort of ``v`` when it is determined by the value alone."""
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, int):
        return INT
    if isinstance(v, Fraction):
        return REAL
    if isinstance(v, str):
        return STRING
    if isinstance(v, BitVec):
        return bv_sort(v.width)
    if isinstance(v, FunValue):
        return None
    return None


class NotAValue(Exception):
    pass


def _numeral(t) -> int | None:
    if isinstance(t, Lit) and t.kind == "int":
        return t.value
    return None


def term_to_value(t: Term, sig=None):
    """Convert a term in value syntax to a value.

    Accepts numerals, ``(- N)``, decimals, ``(- D)``, ``(/ m n)``,
    ``(/ (- m) n)``, bit-vector, string and Boolean literals, constructor
    applications and closed lambda terms.  Raises NotAValue otherwise.
    """
    if isinstance(t, Lit):
        if t.kind == "bv":
            w, val = t.value
            base = None
            if t.text:
                base = "x" if t.text.startswith("#x") else "b"
            return BitVec(w, val, base)
        return t.value
    if isinstance(t, Lambda):
        return FunValue(t.params, t.body)
    if isinstance(t, Id):
        if t.ident.indices:
            raise NotAValue(print_term(t))
        name = t.name
        if sig is not None:
            d = sig.constructor_decl(name)
            if d is None or d.args:
                raise NotAValue(name)
        return DTValue(name)
    if isinstance(t, App):
        h = t.head
        if h.indices:
            raise NotAValue(print_term(t))
        if h.symbol == "-" and len(t.args) == 1:
            a = t.args[0]
            if isinstance(a, Lit) and a.kind == "int" and a.value > 0:
                return -a.value
            if isinstance(a, Lit) and a.kind == "real" and a.value > 0:
                return -Fraction(a.value)
            raise NotAValue(print_term(t))
        if h.symbol == "/" and len(t.args) == 2:
            m, n = t.args
            d = _numeral(n)
            if d is None or d == 0:
                raise NotAValue(print_term(t))
            num = _numeral(m)
            if num is None and isinstance(m, App) and m.head == Identifier("-") and len(m.args) == 1:
                inner = _numeral(m.args[0])
                if inner is not None and inner > 0:
                    num = -inner
            if num is None:
                raise NotAValue(print_term(t))
            return Fraction(num, d)
        if sig is not None:
            d = sig.constructor_decl(h.symbol)
            if d is None or len(d.args) != len(t.args):
                raise NotAValue(print_term(t))
        elif h.symbol in ("-", "/", "+", "*"):
            raise NotAValue(print_term(t))
        return DTValue(h.symbol, tuple(term_to_value(a, sig) for a in t.args))
    raise NotAValue(print_term(t))


def coerce(v, sort: Sort, sig=None):
    """Check ``v`` against ``sort`` and normalize numerals used as reals.

    Raises SygusError(E-VALUE-SORT) on mismatch.
    """
    name = sort.head.symbol
    ok = True
    if sort == BOOL:
        ok = isinstance(v, bool)
    elif sort == INT:
        ok = isinstance(v, int) and not isinstance(v, bool)
    elif sort == REAL:
        if isinstance(v, int) and not isinstance(v, bool):
            v = Fraction(v)
        ok = isinstance(v, Fraction)
    elif sort == STRING:
        ok = isinstance(v, str)
    elif bv_width(sort) is not None:
        ok = isinstance(v, BitVec) and v.width == bv_width(sort)
    elif sort.is_function:
        ok = isinstance(v, FunValue) and tuple(s for _, s in v.params) == sort.args[:-1]
        if ok and sig is not None:
            from .theories import sort_check

            try:
                got = sort_check(Lambda(v.params, v.body), sig)
            except SygusError:
                ok = False
            else:
                ok = got == sort
    else:
        ok = isinstance(v, DTValue)
        if ok and sig is not None:
            dt = sig.datatypes.get(name)
            sels = dt.constructor(v.ctor) if dt is not None else None
            ok = sels is not None and len(sels) == len(v.args)
            if ok:
                v = DTValue(v.ctor, tuple(coerce(a, s, sig) for a, (_, s) in zip(v.args, sels)))
    if not ok:
        raise SygusError("E-VALUE-SORT", f"value {format_value(v)} does not have sort {sort}")
    return v


def parse_value(e: SExpr, sort: Sort, sig=None):
    """Parse one value in concrete syntax and check it has ``sort``."""
    try:
        t = parse_term(e)
        v = term_to_value(t, sig)
    except (SygusError, NotAValue) as exc:
        raise SygusError("E-VALUE", f"not a value of sort {sort}: {e}") from exc
    return coerce(v, sort, sig)


def parse_value_untyped(e: SExpr):
    """Parse a value whose sort is implied by its syntax alone."""
    try:
        return term_to_value(parse_term(e))
    except (SygusError, NotAValue) as exc:
        raise SygusError("E-VALUE", f"not a value: {e}") from exc


def fun_value_sort(v: FunValue, result: Sort) -> Sort:
    return function_sort([s for _, s in v.params], result)
