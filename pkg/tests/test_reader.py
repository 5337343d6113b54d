import pytest
from hypothesis import given, strategies as st

from sygus.errors import SygusError
from sygus.reader import (
    atom,
    classify_atom,
    decode_string,
    encode_string,
    is_reserved,
    lst,
    print_sexpr,
    read_all,
    read_one,
)


@pytest.mark.parametrize(
    "word, kind",
    [
        ("x", "symbol"),
        ("str.++", "symbol"),
        (":weight", "keyword"),
        ("42", "numeral"),
        ("0", "numeral"),
        ("3.25", "decimal"),
        ("#x0f", "hex"),
        ("#b101", "binary"),
        ("true", "boolean"),
        ('"ab"', "string"),
    ],
)
def test_classify_atom(word, kind):
    assert classify_atom(word) == kind


@pytest.mark.parametrize("word", ["synth-fun", "Constant", "!", "_", "forall", "12"])
def test_reserved(word):
    assert is_reserved(word)


def test_plain_symbols_are_not_reserved():
    assert not is_reserved("f")
    assert not is_reserved("inv-f")


def test_comments_and_spans():
    items = read_all("; header\n(a b)\n  (c)\n")
    assert [print_sexpr(e) for e in items] == ["(a b)", "(c)"]
    assert (items[0].span.line, items[0].span.column) == (2, 1)
    assert (items[1].span.line, items[1].span.column) == (3, 3)


def test_string_escape_round_trip():
    e = read_one('"say ""hi"""')
    assert e.kind == "string"
    assert e.string_value == 'say "hi"'
    assert decode_string(encode_string('a"b')) == 'a"b'


@pytest.mark.parametrize("text", ["(a (b)", "a)", '"open'])
def test_malformed_text(text):
    with pytest.raises(SygusError) as e:
        read_all(text)
    assert e.value.code == "E-PARSE"


def test_read_one_rejects_many():
    with pytest.raises(SygusError):
        read_one("a b")


def test_structural_equality_ignores_spans():
    assert read_one("(f  x\n y)") == lst(atom("f"), atom("x"), atom("y"))


symbols = st.sampled_from(["x", "y", "f", "bvadd", "str.++", "#x0A", "#b01", "12", "3.5", ":k", '"s"', '""""'])
sexprs = st.recursive(symbols.map(atom), lambda inner: st.lists(inner, max_size=4).map(lambda xs: lst(*xs)), max_leaves=20)


@given(sexprs)
def test_print_read_round_trip(e):
    assert read_one(print_sexpr(e)) == e
