"""Brute-force weights: enumerate every derivation of a term with a bounded
number of rule applications and collect the total weights."""

from sygus.grammar import ConstantClass, VariableClass, strip_all
from sygus.syntax import App, Id, Lit


def _match(template, term, nts):
    """Nonterminal bindings making ``template`` equal ``term``, or None."""
    if isinstance(template, Id) and not template.ident.indices and template.name in nts:
        return [(template.name, term)]
    if isinstance(template, App):
        if not isinstance(term, App) or term.head != template.head or len(term.args) != len(template.args):
            return None
        out = []
        for a, b in zip(template.args, term.args):
            sub = _match(a, b, nts)
            if sub is None:
                return None
            out.extend(sub)
        return out
    return [] if template == term else None


def _leaf_ok(rule, term, rs):
    rhs = rule.rhs
    if isinstance(rhs, ConstantClass):
        return isinstance(term, Lit) and rs.sort_of(rule.lhs) is not None
    if isinstance(rhs, VariableClass):
        return isinstance(term, Id) and term.name in rule.matching_vars
    return False


def derivation_weights(rs, keyword, term, steps=8, y=None):
    """Set of total weights over derivations of ``term`` using at most ``steps`` rules."""
    keyword = keyword.lstrip(":")
    default = rs.weight_default(keyword)
    nts = rs.nt_names
    term = strip_all(term)
    memo = {}

    def go(y, t, budget):
        # returns {(weight, used)} for derivations using at most budget rules
        key = (y, t, budget)
        if key in memo:
            return memo[key]
        memo[key] = set()
        out = set()
        if budget <= 0:
            return out
        for rule in rs.rules[y]:
            w = rule.weight(keyword, default)
            if rule.unit is not None:
                for wt, used in go(rule.unit, t, budget - 1):
                    out.add((wt + w, used + 1))
                continue
            if not rule.is_concrete:
                if _leaf_ok(rule, t, rs):
                    out.add((w, 1))
                continue
            binding = _match(rule.rhs, t, nts)
            if binding is None:
                continue
            partial = {(w, 1)}
            for z, sub in binding:
                nxt = set()
                for pw, pu in partial:
                    for cw, cu in go(z, sub, budget - pu):
                        if pu + cu <= budget:
                            nxt.add((pw + cw, pu + cu))
                partial = nxt
            out |= partial
        memo[key] = out
        return out

    return {w for w, _ in go(y or rs.start, term, steps)}
