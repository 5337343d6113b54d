import json

import pytest

from conftest import CORPUS, PERMISSIVE_ONLY, REFERENCE, corpus_names, load_example, read
from sygus.diagnostics import Diagnostic, errors_only
from sygus.errors import SygusError
from sygus.reader import Span
from sygus.session import Session, build_conjecture, load, load_state


@pytest.mark.parametrize("name", corpus_names())
def test_corpus_validates(name):
    res = load(read(CORPUS / f"{name}.sy"), permissive=name in PERMISSIVE_ONLY)
    assert res.diagnostics == []


def test_three_list_oracle_constraint_strict_mode():
    res = load(read(CORPUS / "oracle_constraint.sy"))
    assert [d.code for d in res.diagnostics] == ["E-ARITY"]


@pytest.mark.parametrize("path", sorted(REFERENCE.glob("*.sy")), ids=lambda p: p.stem)
def test_reference_grammars_validate(path):
    assert load(read(path)).diagnostics == []


def test_errors_do_not_stop_processing():
    res = load("(set-logic LIA)(declare-var x Int)(declare-var x Int)(constraint (= y 1))(check-synth)")
    assert [d.code for d in res.diagnostics] == ["E-DUP-SYMBOL", "E-UNBOUND"]


def test_set_logic_must_come_first():
    res = load("(set-logic LIA)(declare-var x Int)(set-logic LIA)(check-synth)")
    assert "E-ORDER" in [d.code for d in res.diagnostics]


def test_set_info_anywhere():
    assert load('(set-info :source "x")(set-logic LIA)(set-info :version 2)(check-synth)').ok


def test_conjecture_shape():
    st = load_example("ex1_lia")
    conj = build_conjecture(st)
    assert [f.name for f in conj.funs] == ["f"]
    assert [n for n, _ in conj.vars] == ["x", "y"]
    assert len(conj.constraints) == 1


def test_assumptions_are_kept_apart():
    st = load_state(
        "(set-logic LIA)(declare-var x Int)(synth-fun f ((x Int)) Int)"
        "(assume (> x 0))(constraint (> (f x) 0))(check-synth)"
    )
    assert len(st.assumptions) == 1 and len(st.constraints) == 1
    assert str(build_conjecture(st).formula).startswith("(=>")


def test_fresh_names_avoid_user_symbols():
    s = Session(reserved={"x!0"})
    assert s.fresh("x") == "x!1"
    assert s.fresh("x") == "x!2"


def test_macros_are_expanded_for_checks():
    st = load_state(
        "(set-logic LIA)(define-fun sq ((a Int)) Int (* a a))(declare-var x Int)"
        "(synth-fun f ((x Int)) Int)(constraint (= (f x) (sq 3)))(check-synth)"
    )
    assert "sq" in st.signature.macros


def test_load_state_raises_first_error():
    with pytest.raises(SygusError) as e:
        load_state("(set-logic LIA)(constraint (= y 1))(check-synth)")
    assert e.value.code == "E-UNBOUND"


def test_optimize_synth_records_objective():
    st = load_example("lexico")
    assert st.objective is not None


def test_weights_state():
    st = load_example("weights_multi")
    assert ":numI" in st.weight_keywords


# diagnostics


def test_diagnostic_line_and_json():
    d = Diagnostic("error", "E-SORT", Span(3, 7, 0, 1), "bad sort")
    assert d.line() == "error E-SORT 3:7 bad sort"
    assert json.loads(d.json()) == {"severity": "error", "code": "E-SORT", "line": 3, "column": 7, "message": "bad sort"}


def test_diagnostic_without_span():
    d = Diagnostic.from_error(SygusError("W-NOTE", "note"))
    assert d.severity == "warning"
    assert d.line() == "warning W-NOTE 0:0 note"
    assert errors_only([d]) == []
