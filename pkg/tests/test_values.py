from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sygus.errors import SygusError
from sygus.reader import read_one
from sygus.syntax import bv_sort, simple_sort
from sygus.values import BitVec, format_value, parse_value, parse_value_untyped, value_sort

INT, REAL, BOOL, STR = (simple_sort(n) for n in ("Int", "Real", "Bool", "String"))

bitvecs = st.integers(1, 70).flatmap(lambda w: st.integers(0, (1 << w) - 1).map(lambda v: BitVec(w, v)))
reals = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 10**6)
values = st.one_of(
    st.integers(-10**12, 10**12).map(lambda v: (v, INT)),
    reals.map(lambda v: (v, REAL)),
    st.booleans().map(lambda v: (v, BOOL)),
    st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=8).map(lambda v: (v, STR)),
    bitvecs.map(lambda v: (v, bv_sort(v.width))),
)


@given(values)
def test_typed_round_trip(pair):
    v, s = pair
    assert parse_value(read_one(format_value(v)), s) == v


@given(values)
def test_untyped_round_trip(pair):
    v, s = pair
    back = parse_value_untyped(read_one(format_value(v)))
    if s == REAL and v.denominator == 1:
        # integral reals print as decimals, which read back as reals
        assert Fraction(back) == v
    else:
        assert back == v


@pytest.mark.parametrize(
    "v, text",
    [(-5, "(- 5)"), (True, "true"), ('a"b', '"a""b"'), (BitVec(8, 255), "#xFF"), (BitVec(3, 5), "#b101")],
)
def test_format(v, text):
    assert format_value(v) == text


def test_bitvec_range_checked():
    with pytest.raises(ValueError):
        BitVec(4, 16)


@pytest.mark.parametrize("text, sort", [("true", INT), ("#x0F", bv_sort(4)), ('"a"', BOOL)])
def test_parse_value_wrong_sort(text, sort):
    with pytest.raises(SygusError) as e:
        parse_value(read_one(text), sort)
    assert e.value.code in ("E-VALUE", "E-VALUE-SORT")


def test_value_sort():
    assert value_sort(3) == INT
    assert value_sort(BitVec(5, 1)) == bv_sort(5)
