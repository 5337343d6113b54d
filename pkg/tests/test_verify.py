import pytest

from conftest import CORPUS, GOLDEN, load_example, read
from sygus.errors import SygusError
from sygus.verify import (
    DomainSpec,
    Fail,
    Infeasible,
    OptSolution,
    Solution,
    assignments,
    check_optimize,
    check_semantic_bounded,
    check_syntactic,
    emit_smt,
    parse_response,
    smt_logic_name,
    value_domain,
)
from sygus.syntax import bv_sort, simple_sort

RESPONSES = sorted(p.name[: -len(".resp")] for p in CORPUS.glob("*.resp"))


def example_of(resp_name):
    return resp_name.split(".")[0]


def verdict(name, text):
    st = load_example(name)
    resp = parse_response(text, st)
    syn = check_syntactic(st, resp)
    if not syn.ok:
        return "syntactic-fail", syn
    v = check_optimize(st, resp) if isinstance(resp, OptSolution) else check_semantic_bounded(st, resp)
    return v.status, v


@pytest.mark.parametrize("resp", RESPONSES)
def test_printed_responses_pass(resp):
    status, v = verdict(example_of(resp), read(CORPUS / f"{resp}.resp"))
    assert status == "passed-bounded", str(v)


def single(name, body):
    st = load_example(name)
    f = st.funs[0]
    params = " ".join(f"({n} {s})" for n, s in f.params)
    return f"((define-fun {f.name} ({params}) {f.sort} {body}))"


BODY_MUTATIONS = {
    "ex1_lia": ["(* x y)", "(+ x y)", "(* 2 x)"],
    "ex2_dtlia": ["0", "(ite ((_ is nil) x) 1 (+ 1 (head x)))", "(ite ((_ is nil) x) 0 (head x))"],
    "ex3_bv": ["x", "(concat ((_ extract 31 16) x) #x0000)", "#x00000000"],
    "pbe_slia": ["fname", "lname", '(str.++ lname (str.++ " " fname))'],
    "inv": ["(> y x)", "true", "(< x 0)"],
    "chc_single": ["(> y x)", "true", "(< x 0)"],
    "weights": ["(+ x x)", "x", "(* x x)"],
    "weights_multi": ["x", "(+ (+ x 1) 1)", "(- x)"],
}

INV1 = "(define-fun inv1 ((x Int) (y Int) (n Int)) Bool {})"
INV2 = "(define-fun inv2 ((x Int) (y Int) (n Int)) Bool {})"
F = "(define-fun {} ((x Int)) Int {})"

RESPONSE_MUTATIONS = {
    "chc_multi": [
        f"({INV1.format('true')} {INV2.format('true')})",
        f"({INV1.format('(= x (+ y n))')} {INV2.format('true')})",
        f"({INV1.format('(= x (+ y n))')} {INV2.format('(not (= x (* 2 y)))')})",
    ],
    "fwd_decls": [
        f"({F.format('f', 'x')} {F.format('g', '(fx_plus_one x)')} {F.format('h', '0')})",
        f"({F.format('f', 'x')} {F.format('g', '(fx_plus_one x)')} {F.format('h', 'x')})",
        f"({F.format('f', 'x')} {F.format('g', 'x')} {F.format('h', '1')})",
    ],
    "lexico": [
        f"((2 2) {F.format('f', '1')})",
        f"((0 0) {F.format('f', '0')})",
        f"((1 101) {F.format('f', '(+ x 1)')})",
    ],
    "opt_weights": [
        f"((5) {F.format('f', 'x')})",
        f"((1) {F.format('f', '0')})",
        f"((0) {F.format('f', '(ite (= x 0) 0 x)')})",
    ],
}

MUTATIONS = [(n, single(n, b)) for n, bs in BODY_MUTATIONS.items() for b in bs] + [
    (n, t) for n, ts in RESPONSE_MUTATIONS.items() for t in ts
]


@pytest.mark.parametrize("name, text", MUTATIONS)
def test_mutations_are_rejected(name, text):
    status, v = verdict(name, text)
    assert status in ("refuted", "syntactic-fail"), str(v)


def test_every_responded_example_has_three_mutations():
    names = {example_of(r) for r in RESPONSES}
    counts = {n: sum(1 for m, _ in MUTATIONS if m == n) for n in names}
    assert all(c == 3 for c in counts.values()), counts


def test_ex1_product_fails_syntactically():
    status, syn = verdict("ex1_lia", single("ex1_lia", "(* x y)"))
    assert status == "syntactic-fail"
    assert "(* x y) is not derivable" in str(syn)


def test_pbe_first_name_refuted_at_first_example():
    status, v = verdict("pbe_slia", single("pbe_slia", "fname"))
    assert status == "refuted" and v.failed == 1


def test_ex3_identity_refuted_at_first_example():
    status, v = verdict("ex3_bv", single("ex3_bv", "x"))
    assert status == "refuted"
    assert "#x0782ECAD" in str(v)


def test_passed_message_counts_points():
    _, v = verdict("ex1_lia", read(CORPUS / "ex1_lia.resp"))
    assert str(v) == "passed-bounded (10201 points)"


def test_weight_interpretation_is_reported():
    _, v = verdict("weights_multi", read(CORPUS / "weights_multi.resp"))
    assert "(_ numI f)=0" in str(v)


# responses


def test_parse_fail_and_infeasible():
    assert isinstance(parse_response("fail"), Fail)
    assert isinstance(parse_response("infeasible"), Infeasible)


@pytest.mark.parametrize(
    "text",
    [
        "((define-fun g ((x Int) (y Int)) Int x))",
        "((define-fun f ((x Int)) Int x))",
        "((define-fun f ((x Int) (y Int)) Bool true))",
        "((define-fun f ((x Int) (y Int)) Int true))",
        "(a b",
    ],
)
def test_ill_formed_responses(text):
    with pytest.raises(SygusError) as e:
        parse_response(text, load_example("ex1_lia"))
    assert e.value.code == "E-RESPONSE"


def test_optimize_needs_values():
    with pytest.raises(SygusError):
        parse_response("((define-fun f ((x Int)) Int 1))", load_example("lexico"))


# domains


def test_domains():
    spec = DomainSpec(bound=2)
    assert value_domain(simple_sort("Int"), None, spec) == [-2, -1, 0, 1, 2]
    assert len(value_domain(bv_sort(4), None, spec)) == 16
    assert "" in value_domain(simple_sort("String"), None, spec)


def test_sampling_is_seeded():
    vars_ = [("a", simple_sort("Int")), ("b", simple_sort("Int")), ("c", simple_sort("Int"))]
    spec = DomainSpec(samples=20, seed=7)
    one = list(assignments(vars_, None, spec))
    two = list(assignments(vars_, None, spec))
    assert one == two and len(one) == 20
    assert one != list(assignments(vars_, None, DomainSpec(samples=20, seed=8)))


def test_exhaustive_when_small():
    vars_ = [("a", simple_sort("Int")), ("b", simple_sort("Bool"))]
    assert len(list(assignments(vars_, None, DomainSpec(bound=3)))) == 14


# SMT emission


@pytest.mark.parametrize("name", ["ex1_lia", "ex2_dtlia"])
def test_smt_golden(name):
    st = load_example(name)
    resp = parse_response(read(CORPUS / f"{name}.resp"), st)
    assert emit_smt(st, resp) == read(GOLDEN / f"smt_{name}.smt2")


def test_smt_logic_names():
    assert smt_logic_name(load_example("ex1_lia")) == "LIA"
    assert smt_logic_name(load_example("ex2_dtlia")) == "DTLIA"


def test_smt_refuses_pumped_weights_by_default():
    from sygus.session import load_state

    st = load_state(
        "(set-logic LIA)(set-feature :weights true)(declare-weight w)"
        "(synth-fun f ((x Int)) Int ((A Int) (B Int)) ((A Int (x (! B :w 1))) (B Int ((! A :w 2)))))"
        "(constraint (= (_ w f) 3))(check-synth)"
    )
    resp = Solution(parse_response("((define-fun f ((x Int)) Int x))", st).defs)
    with pytest.raises(SygusError) as e:
        emit_smt(st, resp)
    assert e.value.code == "E-UNSUPPORTED"
    assert "(check-sat)" in emit_smt(st, resp, allow_pump_truncation=True)
