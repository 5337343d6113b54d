import pytest

from conftest import CORPUS, REFERENCE, corpus_names, read
from sygus.errors import SygusError
from sygus.reader import read_one
from sygus.syntax import (
    App,
    CheckSynth,
    Constraint,
    DeclareVar,
    SynthFun,
    bv_sort,
    parse_command,
    parse_script,
    parse_term,
    print_command,
    print_term,
    term_size,
)


def cmd(text, permissive=False):
    return parse_command(read_one(text), permissive)


def test_basic_commands():
    assert isinstance(cmd("(declare-var x Int)"), DeclareVar)
    assert isinstance(cmd("(constraint (= x 1))"), Constraint)
    assert isinstance(cmd("(check-synth)"), CheckSynth)
    c = cmd("(declare-var b (_ BitVec 4))")
    assert c.sort == bv_sort(4)


def test_synth_fun_with_grammar():
    c = cmd("(synth-fun f ((x Int)) Int ((I Int)) ((I Int (0 x (+ I I)))))")
    assert isinstance(c, SynthFun)
    assert c.grammar is not None
    assert [n for n, _ in c.params] == ["x"]


@pytest.mark.parametrize(
    "text, code",
    [
        ("(synth-fun)", "E-ARITY"),
        ("(constraint)", "E-ARITY"),
        ("(set-logic)", "E-ARITY"),
        ("(frobnicate x)", "E-UNKNOWN-CMD"),
        ("(declare-var synth-fun Int)", "E-RESERVED"),
        ("(declare-var Constant Int)", "E-RESERVED"),
        ("(synth-fun f ((x Int)) Int ((I Int)) ((I Int ((forall ((y Int)) y)))))", "E-BINDER"),
    ],
)
def test_rejections(text, code):
    with pytest.raises(SygusError) as e:
        cmd(text)
    assert e.value.code == code


def test_three_list_oracle_constraint_needs_permissive():
    text = "(oracle-constraint () ((x Int)) ((z Bool)) orc (=> (f x) z))"
    with pytest.raises(SygusError) as e:
        cmd(text)
    assert e.value.code == "E-ARITY"
    assert cmd(text, permissive=True) is not None


@pytest.mark.parametrize(
    "text, size",
    [("x", 1), ("(+ x 1)", 3), ("(+ x (* 2 y))", 5), ("((_ extract 3 0) x)", 2)],
)
def test_term_size(text, size):
    assert term_size(parse_term(read_one(text))) == size


@pytest.mark.parametrize("text", ["(let ((z 1)) (+ z x))", "(forall ((y Int)) (>= y 0))", '(str.++ "a" s)', "#b0101"])
def test_term_print_round_trip(text):
    t = parse_term(read_one(text))
    assert print_term(t) == text
    assert parse_term(read_one(print_term(t))) == t


@pytest.mark.parametrize("name", corpus_names())
def test_corpus_print_round_trip(name):
    cmds = parse_script(read(CORPUS / f"{name}.sy"), permissive=True)
    again = parse_script("\n".join(print_command(c) for c in cmds), permissive=True)
    assert again == cmds


@pytest.mark.parametrize("path", sorted(REFERENCE.glob("*.sy")), ids=lambda p: p.stem)
def test_reference_grammars_parse(path):
    cmds = parse_script(read(path))
    assert any(isinstance(c, SynthFun) for c in cmds)


def test_app_heads_keep_indices():
    t = parse_term(read_one("((_ zero_extend 4) x)"))
    assert isinstance(t, App)
    assert t.head.indices == (4,)
