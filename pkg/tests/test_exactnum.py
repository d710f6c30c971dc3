from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fperr import exactnum as X
from fperr.errors import DomainError, ParseError, UsageError

rationals = st.fractions(max_denominator=10 ** 6).filter(lambda f: abs(f) < 10 ** 9)


@given(rationals, rationals)
def test_field_ops_match_fraction(a, b):
    x, y = X.exact(a), X.exact(b)
    assert X.to_fraction(X.add(x, y)) == a + b
    assert X.to_fraction(X.sub(x, y)) == a - b
    assert X.to_fraction(X.mul(x, y)) == a * b
    if b:
        assert X.to_fraction(X.div(x, y)) == a / b


def test_division_by_zero():
    with pytest.raises(UsageError):
        X.div(1, 0)


@given(rationals, rationals)
def test_cmp_is_a_total_order(a, b):
    c = X.cmp(a, b)
    assert (c is X.Ordering.LESS) == (a < b)
    assert (c is X.Ordering.EQUAL) == (a == b)


@given(rationals)
def test_floor_ceil(a):
    assert X.floor(a) == a.__floor__()
    assert X.ceil(a) == a.__ceil__()


@given(st.integers(2, 12), st.integers(-40, 40))
def test_pow_base(beta, e):
    assert X.to_fraction(X.pow_base(beta, e)) == Fraction(beta) ** e


@given(rationals)
def test_format_parse_roundtrip(a):
    assert X.to_fraction(X.parse(X.format_scalar(a))) == a


def test_parse_forms():
    assert X.parse("262/256") == X.exact(Fraction(131, 128))
    assert X.parse("-1.25e-3") == X.exact(Fraction(-1, 800))
    assert X.parse("3@-2", base=2) == X.exact(Fraction(3, 4))
    assert X.parse("+7") == 7
    assert X.format_scalar(X.parse("4/2")) == "2"


@pytest.mark.parametrize("text", ["", "1/", "/2", "1/0", "1.2.3", "abc", "1e", "2@3", "1/2x"])
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        X.parse(text)


def test_parse_reports_position():
    with pytest.raises(ParseError) as info:
        X.parse("12x")
    assert info.value.position == 2


def test_parse_needs_string():
    with pytest.raises(UsageError):
        X.parse(3)


def test_decimal_approx():
    assert X.decimal_approx(Fraction(1, 3), 4) == "~0.3333"
    assert X.decimal_approx(Fraction(-2, 3), 2) == "~-0.67"
    assert X.decimal_approx(5, 0) == "~5"


@given(st.fractions(min_value=0, max_denominator=1000), st.fractions(min_value=0, max_denominator=1000))
def test_cmp_sqrt(q, m):
    # sqrt(q) vs m  <=>  q vs m^2 for m >= 0
    c = X.cmp_sqrt(q, m)
    assert (c is X.Ordering.LESS) == (q < m * m)
    assert (c is X.Ordering.EQUAL) == (q == m * m)


def test_sign_and_nonnegative():
    assert [X.sign(v) for v in (-3, 0, Fraction(1, 9))] == [-1, 1, 1]  # sign(0) = 1
    with pytest.raises(DomainError):
        X.require_nonnegative(Fraction(-1, 2))
