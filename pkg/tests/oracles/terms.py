"""Exhaustive term generation over a grammar's own operators and leaves,
ignoring nonterminals, for checking membership against enumeration."""

import itertools

from sygus.grammar import VariableClass
from sygus.syntax import App, Id, Identifier


def grammar_alphabet(rs):
    """(leaves, [(head, arity)]) occurring in the concrete rules."""
    leaves, heads = set(), set()
    nts = rs.nt_names

    def walk(t):
        if isinstance(t, App):
            heads.add((t.head, len(t.args)))
            for a in t.args:
                walk(a)
        elif isinstance(t, Id) and t.name in nts and not t.ident.indices:
            return
        else:
            leaves.add(t)

    for rule in rs.all_rules():
        if rule.is_concrete:
            walk(rule.rhs)
        elif isinstance(rule.rhs, VariableClass):
            leaves.update(Id(Identifier(v)) for v in rule.matching_vars)
    return sorted(leaves, key=str), sorted(heads, key=str)


def all_terms(rs, max_size):
    """Every untyped term over the grammar alphabet, by size."""
    leaves, heads = grammar_alphabet(rs)
    by_size = {1: list(leaves)}
    for s in range(2, max_size + 1):
        level = []
        for head, arity in heads:
            for parts in _splits(s - 1, arity):
                pools = [by_size.get(k, []) for k in parts]
                for args in itertools.product(*pools):
                    level.append(App(head, tuple(args)))
        by_size[s] = level
    return [t for s in range(1, max_size + 1) for t in by_size[s]]


def _splits(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for k in range(1, total - parts + 2):
        for rest in _splits(total - k, parts - 1):
            yield (k, *rest)
