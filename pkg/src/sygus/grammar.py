"""Grammar engine: rule normalization, membership, enumeration and
weighted-derivation sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from math import gcd

import networkx as nx

from .errors import SygusError
from .syntax import (
    BOOL,
    INT,
    REAL,
    REGLAN,
    STRING,
    Annot,
    App,
    Attribute,
    ConstantClass,
    GrammarDef,
    Id,
    Identifier,
    Lit,
    Sort,
    Term,
    VariableClass,
    bv_width,
    int_lit,
    print_term,
    term_size,
)
from .theories import Signature, check_sort, sort_check
from .values import NotAValue, coerce, term_to_value


@dataclass(frozen=True)
class SynthFunEntry:
    name: str
    params: tuple[tuple[str, Sort], ...]
    sort: Sort
    grammar: GrammarDef | None = None


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: object  # ConstantClass | VariableClass | Term
    attrs: tuple[Attribute, ...] = ()
    matching_vars: tuple[str, ...] = ()
    unit: str | None = None  # target nonterminal of a unit rule

    @property
    def is_concrete(self) -> bool:
        return isinstance(self.rhs, Term)

    def weight(self, keyword: str, default: int = 0) -> int:
        """Weight w.r.t. ``keyword`` (given without the leading colon)."""
        hits = [a for a in self.attrs if a.keyword.lstrip(":") == keyword]
        if len(hits) == 1 and hits[0].numeral() is not None:
            return hits[0].numeral()
        return default


@dataclass(frozen=True)
class RuleSet:
    owner: str
    params: tuple[tuple[str, Sort], ...]
    nonterminals: tuple[tuple[str, Sort], ...]
    rules: dict
    sig: Signature | None = field(default=None, compare=False, repr=False)

    @property
    def start(self) -> str:
        return self.nonterminals[0][0]

    @property
    def nt_names(self) -> frozenset:
        return frozenset(n for n, _ in self.nonterminals)

    def sort_of(self, y: str) -> Sort:
        return dict(self.nonterminals)[y]

    def weight_default(self, keyword: str) -> int:
        if self.sig is None:
            return 0
        return self.sig.weights.get(keyword, 0)

    def all_rules(self):
        for n, _ in self.nonterminals:
            yield from self.rules[n]


def strip_all(t: Term) -> Term:
    """Remove every annotation in ``t``."""
    if isinstance(t, Annot):
        return strip_all(t.body)
    if isinstance(t, App):
        return App(t.head, tuple(strip_all(a) for a in t.args))
    return t


def has_annotation(t: Term) -> bool:
    if isinstance(t, Annot):
        return True
    if isinstance(t, App):
        return any(has_annotation(a) for a in t.args)
    return False


def compile_grammar(g: GrammarDef, f: SynthFunEntry, sig: Signature) -> RuleSet:
    """Normalize ``g`` into a RuleSet, checking well-formedness."""
    nts = []
    for name, s in g.nonterminals:
        nts.append((name, check_sort(s, sig)))
    nts = tuple(nts)
    names = [n for n, _ in nts]
    if len(set(names)) != len(names):
        raise SygusError("E-GRAMMAR-DECL", "grammar declares a non-terminal twice")
    listed = [(n, s) for n, s, _ in g.rules]
    if [n for n, _ in listed] != names:
        raise SygusError(
            "E-GRAMMAR-DECL",
            f"rule listing ({' '.join(n for n, _ in listed)}) does not match predeclaration ({' '.join(names)})",
        )
    for (n, s), (_, s2) in zip(nts, listed):
        if check_sort(s2, sig) != s:
            raise SygusError("E-GRAMMAR-DECL", f"non-terminal {n} declared with sort {s} but listed with {s2}")
    ret = check_sort(f.sort, sig)
    if nts[0][1] != ret:
        raise SygusError(
            "E-GRAMMAR-SORT", f"start symbol {nts[0][0]} has sort {nts[0][1]} but {f.name} returns {ret}"
        )
    env = {n: s for n, s in f.params}
    env.update(dict(nts))
    ntset = set(names)
    rules = {}
    for (y, tau), (_, _, gterms) in zip(nts, g.rules):
        out = []
        for gt in gterms:
            if isinstance(gt, ConstantClass):
                s = check_sort(gt.sort, sig)
                if s != tau:
                    raise SygusError("E-GRAMMAR-SORT", f"(Constant {s}) listed for {y} of sort {tau}")
                out.append(Rule(y, ConstantClass(s)))
            elif isinstance(gt, VariableClass):
                s = check_sort(gt.sort, sig)
                if s != tau:
                    raise SygusError("E-GRAMMAR-SORT", f"(Variable {s}) listed for {y} of sort {tau}")
                vs = tuple(n for n, ps in f.params if ps == s and n not in ntset)
                out.append(Rule(y, VariableClass(s), matching_vars=vs))
            else:
                attrs = ()
                base = gt
                if isinstance(gt, Annot):
                    attrs, base = gt.attrs, gt.body
                try:
                    s = sort_check(base, sig, env)
                except SygusError as e:
                    raise SygusError("E-GRAMMAR-SORT", f"rule {print_term(gt)} of {y}: {e.message}") from None
                if s != tau:
                    raise SygusError("E-GRAMMAR-SORT", f"rule {print_term(gt)} has sort {s}, but {y} has sort {tau}")
                tmpl = strip_all(base)
                unit = tmpl.name if isinstance(tmpl, Id) and not tmpl.ident.indices and tmpl.name in ntset else None
                out.append(Rule(y, tmpl, attrs, unit=unit))
        rules[y] = tuple(out)
    return RuleSet(f.name, tuple(f.params), nts, rules, sig)


# ---------------------------------------------------------------------------
# Membership


def unit_closure(rs: RuleSet) -> dict:
    """Map each nonterminal to the set reachable through unit rules (itself included)."""
    reach = {}
    for y in rs.nt_names:
        seen = {y}
        todo = [y]
        while todo:
            z = todo.pop()
            for r in rs.rules[z]:
                if r.unit is not None and r.unit not in seen:
                    seen.add(r.unit)
                    todo.append(r.unit)
        reach[y] = frozenset(seen)
    return reach


def is_constant_of(t: Term, sort: Sort, sig=None) -> bool:
    """Is ``t`` a literal value (constant) of ``sort``?"""
    if sort == REGLAN:
        return _ground_reglan(t)
    try:
        v = term_to_value(t, sig)
        coerce(v, sort, sig)
    except (NotAValue, SygusError):
        return False
    return not sort.is_function


_RE_OPS = {"re.++", "re.union", "re.inter", "re.*", "re.+", "re.opt", "re.comp", "re.diff", "re.range", "str.to_re"}


def _ground_reglan(t):
    if isinstance(t, Id):
        return t.name in ("re.none", "re.all", "re.allchar")
    if isinstance(t, App) and t.head.symbol in _RE_OPS:
        if t.head.symbol in ("str.to_re", "re.range"):
            return all(isinstance(a, Lit) and a.kind == "string" for a in t.args)
        return all(_ground_reglan(a) for a in t.args)
    return False


class _Matcher:
    def __init__(self, rs: RuleSet):
        self.rs = rs
        self.nts = rs.nt_names
        self.reach = unit_closure(rs)
        self.memo = {}

    def match(self, y, r) -> bool:
        key = (y, id(r))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.memo[key] = False  # guards against cycles; unit rules are handled by closure
        ok = any(
            self.rule_matches(rule, r)
            for z in self.reach[y]
            for rule in self.rs.rules[z]
            if rule.unit is None
        )
        self.memo[key] = ok
        return ok

    def rule_matches(self, rule: Rule, r) -> bool:
        rhs = rule.rhs
        if isinstance(rhs, ConstantClass):
            return is_constant_of(r, rhs.sort, self.rs.sig)
        if isinstance(rhs, VariableClass):
            return isinstance(r, Id) and not r.ident.indices and r.name in rule.matching_vars
        return self.matches(rhs, r)

    def matches(self, g, r) -> bool:
        if isinstance(g, Id) and not g.ident.indices and g.name in self.nts:
            return self.match(g.name, r)
        if isinstance(g, Lit):
            return isinstance(r, Lit) and r.kind == g.kind and r.value == g.value
        if isinstance(g, Id):
            return isinstance(r, Id) and r.ident == g.ident
        if isinstance(g, App):
            return (
                isinstance(r, App)
                and r.head == g.head
                and len(r.args) == len(g.args)
                and all(self.matches(a, b) for a, b in zip(g.args, r.args))
            )
        return False


def generates(rs: RuleSet, y: str, r: Term) -> bool:
    """Does nonterminal ``y`` derive the (annotation-stripped) term ``r``?"""
    return _Matcher(rs).match(y, strip_all(r))


def first_underivable(rs: RuleSet, y: str, r: Term):
    """A smallest subterm of ``r`` that blocks derivation, for diagnostics."""
    r = strip_all(r)
    m = _Matcher(rs)
    if m.match(y, r):
        return None
    if isinstance(r, App):
        for a in r.args:
            if not any(m.match(z, a) for z in rs.nt_names):
                return first_underivable_any(rs, a, m)
    return r


def first_underivable_any(rs, r, m):
    if isinstance(r, App):
        for a in r.args:
            if not any(m.match(z, a) for z in rs.nt_names):
                return first_underivable_any(rs, a, m)
    return r


# ---------------------------------------------------------------------------
# Enumeration


def constant_sample(sort: Sort, sig=None) -> list[Term]:
    """Finite stand-in for ``(Constant sort)`` used by enumeration only."""
    if sort == BOOL:
        return [Lit("bool", True), Lit("bool", False)]
    if sort == INT:
        return [int_lit(n) for n in (0, 1, 2, -1, -2)]
    if sort == REAL:
        from fractions import Fraction

        one = Lit("real", Fraction(1), "1.0")
        return [Lit("real", Fraction(0), "0.0"), one, App(Identifier("-"), (one,))]
    if sort == STRING:
        return [Lit("string", s) for s in ("", "a", "A")]
    if sort == REGLAN:
        return [Id(Identifier("re.none")), Id(Identifier("re.all"))]
    w = bv_width(sort)
    if w is not None:
        return [Lit("bv", (w, v)) for v in (0, (1 << w) - 1, 1)]
    if sig is not None and sort.name in sig.datatypes:
        dt = sig.datatypes[sort.name]
        return [Id(Identifier(c)) for c, sels in dt.constructors if not sels]
    return []


def template_slots(t: Term, nts) -> list[str]:
    """Nonterminal leaves of a template in pre-order."""
    if isinstance(t, Id) and not t.ident.indices and t.name in nts:
        return [t.name]
    if isinstance(t, App):
        out = []
        for a in t.args:
            out.extend(template_slots(a, nts))
        return out
    return []


def fill_template(t: Term, nts, children) -> Term:
    it = iter(children)

    def go(u):
        if isinstance(u, Id) and not u.ident.indices and u.name in nts:
            return next(it)
        if isinstance(u, App):
            return App(u.head, tuple(go(a) for a in u.args))
        return u

    return go(t)


def compositions(total: int, parts: int, minimum: int = 1):
    """All tuples of ``parts`` integers >= minimum summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= minimum:
            yield (total,)
        return
    for first in range(minimum, total - minimum * (parts - 1) + 1):
        for rest in compositions(total - first, parts - 1, minimum):
            yield (first,) + rest


class Enumerator:
    """Bottom-up, size-indexed term enumeration for every nonterminal."""

    def __init__(self, rs: RuleSet):
        self.rs = rs
        self.nts = rs.nt_names
        self.reach = unit_closure(rs)
        self.sampled = False
        self.levels = {y: [[]] for y in self.nts}  # levels[y][s]: terms of size s
        self.built = 0
        self._plans = {}
        for y in self.nts:
            plans = []
            for rule in rs.rules[y]:
                if rule.unit is not None:
                    continue
                if isinstance(rule.rhs, ConstantClass):
                    sample = constant_sample(rule.rhs.sort, rs.sig)
                    if rule.rhs.sort != BOOL:
                        self.sampled = True
                    plans.append(("leaves", [(term_size(t), t) for t in sample]))
                elif isinstance(rule.rhs, VariableClass):
                    plans.append(("leaves", [(1, Id(Identifier(v))) for v in rule.matching_vars]))
                else:
                    slots = template_slots(rule.rhs, self.nts)
                    base = term_size(rule.rhs) - len(slots)
                    plans.append(("template", (rule.rhs, slots, base)))
            self._plans[y] = plans

    def _build(self, s: int):
        base = {}
        for y in self.nts:
            seen = {}
            for kind, plan in self._plans[y]:
                if kind == "leaves":
                    for size, t in plan:
                        if size == s:
                            seen.setdefault(t, None)
                    continue
                tmpl, slots, c = plan
                if not slots:
                    if c == s:
                        seen.setdefault(tmpl, None)
                    continue
                for sizes in compositions(s - c, len(slots)):
                    pools = [self.levels[z][k] for z, k in zip(slots, sizes)]
                    if any(not p for p in pools):
                        continue
                    for combo in itertools.product(*pools):
                        seen.setdefault(fill_template(tmpl, self.nts, combo), None)
            base[y] = seen
        for y in self.nts:
            merged = {}
            for z in sorted(self.reach[y]):
                for t in base[z]:
                    merged.setdefault(t, None)
            self.levels[y].append(list(merged))

    def terms_of_size(self, y: str, s: int) -> list[Term]:
        while self.built < s:
            self.built += 1
            self._build(self.built)
        return self.levels[y][s] if s >= 1 else []

    def enumerate(self, y: str, max_size: int):
        for s in range(1, max_size + 1):
            yield from self.terms_of_size(y, s)


class TermStream:
    """Iterable result of :func:`enumerate_terms`, flagged when sampled."""

    def __init__(self, enum: Enumerator, y: str, max_size: int):
        self._enum = enum
        self._y = y
        self._max = max_size

    @property
    def sampled(self) -> bool:
        return self._enum.sampled

    def __iter__(self):
        return self._enum.enumerate(self._y, self._max)


def enumerate_terms(rs: RuleSet, y: str, max_size: int) -> TermStream:
    return TermStream(Enumerator(rs), y, max_size)


# ---------------------------------------------------------------------------
# Weight sets


def _representable(n: int, periods) -> bool:
    """Is n a nonnegative integer combination of ``periods``?"""
    if n == 0:
        return True
    ps = [p for p in periods if 0 < p <= n]
    if not ps:
        return False
    if n % reduce(gcd, ps):
        return False
    reach = [False] * (n + 1)
    reach[0] = True
    for i in range(1, n + 1):
        reach[i] = any(reach[i - p] for p in ps if p <= i)
    return reach[n]


def _simplify_periods(periods: frozenset) -> frozenset:
    ps = sorted(p for p in periods if p > 0)
    keep = []
    for p in ps:
        if not _representable(p, keep):
            keep.append(p)
    return frozenset(keep)


@dataclass(frozen=True)
class WeightSet:
    """Finite union of linear sets ``{b + sum k_i p_i}``.

    ``bases`` and ``pumps`` give the usual compact view; membership is
    decided on the exact components.
    """

    components: frozenset = frozenset()

    @staticmethod
    def of(*values: int) -> "WeightSet":
        return WeightSet(frozenset((v, frozenset()) for v in values))

    @staticmethod
    def linear(base: int, periods=()) -> "WeightSet":
        return WeightSet(frozenset([(base, _simplify_periods(frozenset(periods)))]))

    @property
    def bases(self) -> frozenset:
        return frozenset(b for b, _ in self.components)

    @property
    def pumps(self) -> frozenset:
        out = set()
        for _, ps in self.components:
            out |= ps
        return frozenset(out)

    @property
    def empty(self) -> bool:
        return not self.components

    def union(self, other: "WeightSet") -> "WeightSet":
        return WeightSet(self.components | other.components).simplified()

    def plus(self, other: "WeightSet") -> "WeightSet":
        comps = set()
        for b1, p1 in self.components:
            for b2, p2 in other.components:
                comps.add((b1 + b2, _simplify_periods(p1 | p2)))
        return WeightSet(frozenset(comps)).simplified()

    def shift(self, k: int) -> "WeightSet":
        return WeightSet(frozenset((b + k, p) for b, p in self.components))

    def simplified(self) -> "WeightSet":
        # drop a linear set contained in another one; distinct components
        # can never contain each other mutually
        comps = list(self.components)
        keep = []
        for b, ps in comps:
            covered = any(
                (b2, ps2) != (b, ps) and ps <= ps2 and b >= b2 and _representable(b - b2, ps2)
                for b2, ps2 in comps
            )
            if not covered:
                keep.append((b, ps))
        return WeightSet(frozenset(keep))

    def contains(self, k: int) -> bool:
        return any(k >= b and _representable(k - b, ps) for b, ps in self.components)

    __contains__ = contains

    def values_up_to(self, limit: int) -> list[int]:
        return [k for k in range(limit + 1) if self.contains(k)]

    def render(self) -> str:
        return (
            "bases={" + ",".join(map(str, sorted(self.bases))) + "} "
            "pumps={" + ",".join(map(str, sorted(self.pumps))) + "}"
        )

    def __str__(self):
        return self.render()


def weight_achievable(ws: WeightSet, k: int) -> bool:
    return ws.contains(k)


MAX_CYCLE_SUBSETS = 1 << 16


class _UnitPaths:
    """Weights of unit-rule walks between nonterminals, as WeightSets."""

    def __init__(self, rs: RuleSet, keyword: str):
        default = rs.weight_default(keyword)
        self.edges = {}
        g = nx.DiGraph()
        g.add_nodes_from(rs.nt_names)
        for y in rs.nt_names:
            for rule in rs.rules[y]:
                if rule.unit is not None:
                    self.edges.setdefault((y, rule.unit), set()).add(rule.weight(keyword, default))
                    g.add_edge(y, rule.unit)
        self.graph = g
        cycles = set()
        for nodes in nx.simple_cycles(g):
            for w in self._walk_weights(nodes + [nodes[0]]):
                cycles.add((frozenset(nodes), w))
        self.cycles = sorted(cycles, key=lambda c: (sorted(c[0]), c[1]))
        self.cache = {}

    def _walk_weights(self, seq):
        sets = [self.edges[(a, b)] for a, b in zip(seq, seq[1:])]
        return {sum(c) for c in itertools.product(*sets)} if sets else {0}

    def between(self, y: str, z: str) -> WeightSet:
        key = (y, z)
        if key in self.cache:
            return self.cache[key]
        paths = set()
        if y == z:
            paths.add((frozenset([y]), 0))
        else:
            for seq in nx.all_simple_paths(self.graph, y, z):
                for w in self._walk_weights(seq):
                    paths.add((frozenset(seq), w))
        comps = set()
        for nodes, w in paths:
            for base, periods in self._cycle_choices(nodes):
                comps.add((w + base, _simplify_periods(periods)))
        ws = WeightSet(frozenset(comps)).simplified()
        self.cache[key] = ws
        return ws

    def _cycle_choices(self, nodes: frozenset):
        """(extra base, periods) for every set of cycles connected to ``nodes``."""
        cyc = self.cycles
        out = {(0, frozenset())}
        if not cyc:
            return out
        if (1 << len(cyc)) > MAX_CYCLE_SUBSETS:
            raise SygusError("E-UNSUPPORTED", "too many unit cycles for exact weight analysis")
        for mask in range(1, 1 << len(cyc)):
            chosen = [cyc[i] for i in range(len(cyc)) if mask >> i & 1]
            covered = set(nodes)
            pending = list(chosen)
            progress = True
            while pending and progress:
                progress = False
                for c in list(pending):
                    if c[0] & covered:
                        covered |= c[0]
                        pending.remove(c)
                        progress = True
            if pending:
                continue
            out.add((sum(w for _, w in chosen), frozenset(w for _, w in chosen if w > 0)))
        return out


class _WeightAnalysis:
    def __init__(self, rs: RuleSet, keyword: str):
        self.rs = rs
        self.keyword = keyword
        self.default = rs.weight_default(keyword)
        self.units = _UnitPaths(rs, keyword)
        self.matcher = _Matcher(rs)
        self.reach = self.matcher.reach
        self.memo = {}

    def of(self, y: str, r: Term) -> WeightSet:
        key = (y, id(r))
        if key in self.memo:
            return self.memo[key]
        total = WeightSet()
        for z in sorted(self.reach[y]):
            direct = WeightSet()
            for rule in self.rs.rules[z]:
                if rule.unit is not None:
                    continue
                ws = self.rule_weights(rule, r)
                if not ws.empty:
                    direct = direct.union(ws)
            if not direct.empty:
                total = total.union(self.units.between(y, z).plus(direct))
        self.memo[key] = total
        return total

    def rule_weights(self, rule: Rule, r: Term) -> WeightSet:
        w = rule.weight(self.keyword, self.default)
        if not rule.is_concrete:
            return WeightSet.of(w) if self.matcher.rule_matches(rule, r) else WeightSet()
        pairs = []
        if not self._bind(rule.rhs, r, pairs):
            return WeightSet()
        acc = WeightSet.of(w)
        for z, sub in pairs:
            ws = self.of(z, sub)
            if ws.empty:
                return WeightSet()
            acc = acc.plus(ws)
        return acc

    def _bind(self, g, r, pairs) -> bool:
        if isinstance(g, Id) and not g.ident.indices and g.name in self.rs.nt_names:
            pairs.append((g.name, r))
            return True
        if isinstance(g, App):
            return (
                isinstance(r, App)
                and r.head == g.head
                and len(r.args) == len(g.args)
                and all(self._bind(a, b, pairs) for a, b in zip(g.args, r.args))
            )
        return self.matcher.matches(g, r)


def weight_sets(rs: RuleSet, keyword: str, r: Term, y: str | None = None) -> WeightSet:
    """All total weights w.r.t. ``keyword`` of derivations of ``r`` from ``y``
    (default: the start symbol)."""
    keyword = keyword.lstrip(":")
    return _WeightAnalysis(rs, keyword).of(y or rs.start, strip_all(r))
