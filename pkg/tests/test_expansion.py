from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2gle.expansion import (
    CylinderInterval,
    DigitSequence,
    DomainError,
    Tail,
    apply_T,
    cylinder,
    decode,
    encode,
    first_digit,
    format_digits,
    parse_digits,
    parse_rational,
    periodic_point,
)

F = Fraction


def brute_first_digit(x):
    # independent of the bit-length shortcut: walk the branches
    n = 1
    while not (F(1, 2**n) < x <= F(1, 2 ** (n - 1))):
        n += 1
    return n


@pytest.mark.parametrize(
    "x, expected",
    [(F(5, 8), 1), (F(1), 1), (F(1, 2), 2), (F(1, 4), 3), (F(1, 3), 2), (F(3, 1024), 9)],
)
def test_first_digit(x, expected):
    assert first_digit(x) == expected == brute_first_digit(x)


def test_first_digit_half_decodes_back():
    # digits (2, 1, 1, ...) sum to 1/2
    assert decode(DigitSequence((2,), Tail.ALL_ONES)) == F(1, 2)
    assert encode(F(1, 2), 5).digits == (2, 1, 1, 1, 1)


@pytest.mark.parametrize("x", [F(0), F(-1, 3), F(3, 2), F(1, 1) + F(1, 10**9)])
def test_domain_errors(x):
    with pytest.raises(DomainError):
        first_digit(x)
    with pytest.raises(DomainError):
        apply_T(x)
    with pytest.raises(DomainError):
        encode(x, 3)


@pytest.mark.parametrize(
    "x, expected", [(F(5, 8), F(1, 4)), (F(1), F(1)), (F(1, 4), F(1))]
)
def test_apply_T(x, expected):
    y = apply_T(x)
    assert y == expected
    assert 0 < y <= 1


@pytest.mark.parametrize(
    "x, n, digits",
    [(F(5, 8), 4, (1, 3, 1, 1)), (F(1), 3, (1, 1, 1)), (F(1, 3), 3, (2, 2, 2))],
)
def test_encode_examples(x, n, digits):
    seq = encode(x, n)
    assert seq.digits == digits
    assert seq.tail is Tail.UNSPECIFIED
    assert x in decode(seq)


def test_encode_zero_depth():
    assert encode(F(2, 3), 0).digits == ()


def test_decode_all_ones():
    assert decode(DigitSequence((1, 3, 1, 1), Tail.ALL_ONES)) == F(5, 8)
    assert decode(DigitSequence((1, 3), Tail.ALL_ONES)) == F(5, 8)
    assert decode(DigitSequence((1, 1, 1), Tail.ALL_ONES)) == 1


def test_decode_interval():
    iv = decode(DigitSequence((2, 3)))
    assert isinstance(iv, CylinderInterval)
    assert (iv.left, iv.right) == (F(9, 32), F(10, 32))
    assert iv.length == F(1, 2**5)
    assert iv.depth == 2


def test_decode_default_is_interval():
    assert isinstance(decode((1, 2)), CylinderInterval)


def test_decode_empty():
    with pytest.raises(ValueError):
        decode(DigitSequence(()))


def test_digit_sequence_rejects_nonpositive():
    with pytest.raises(DomainError):
        DigitSequence((1, 0, 2))


@pytest.mark.parametrize(
    "period, value", [((1,), F(1)), ((2,), F(1, 3)), ((1, 3), F(3, 5))]
)
def test_periodic_point(period, value):
    y = periodic_point(period)
    assert y == value
    k = len(period)
    assert encode(y, 5 * k).digits == period * 5


def test_periodic_point_1_3_mean():
    # x = (1 + T x) / 2^d twice: y = 9/16 + y/16  ->  y = 3/5
    y = periodic_point((1, 3))
    assert y == F(9, 16) + F(1, 16) * y
    assert apply_T(apply_T(y)) == y
    d = encode(y, 1000).digits
    assert sum(d) / len(d) == 2


def test_parse_rational():
    assert parse_rational("5/8") == F(5, 8)
    assert parse_rational("0.625") == F(5, 8)
    assert parse_rational("1") == 1
    assert parse_rational(" 3/6 ") == F(1, 2)
    with pytest.raises(ValueError):
        parse_rational("abc")
    with pytest.raises(ValueError):
        parse_rational("1/0")
    with pytest.raises(TypeError):
        parse_rational(0.5)


def test_digit_text_roundtrip():
    assert parse_digits("1,3,1,1") == (1, 3, 1, 1)
    assert format_digits((2, 3)) == "2,3"
    with pytest.raises(DomainError):
        parse_digits("1,0")


rationals = st.builds(
    lambda q, p: F(p % q + 1, q), st.integers(1, 10**6), st.integers(0, 10**6)
)


@settings(max_examples=300, deadline=None)
@given(rationals, st.integers(0, 30))
def test_roundtrip_contains(x, n):
    if n == 0:
        return
    iv = decode(encode(x, n))
    assert iv.left < x <= iv.right
    assert iv.length == F(1, 2 ** sum(encode(x, n).digits))


@settings(max_examples=300, deadline=None)
@given(rationals, st.integers(0, 25))
def test_shift_compatibility(x, n):
    assert encode(apply_T(x), n).digits == encode(x, n + 1).digits[1:]


@settings(max_examples=300, deadline=None)
@given(rationals)
def test_conjugacy(x):
    d = first_digit(x)
    assert apply_T(x) == 2**d * x - 1
    assert cylinder((d,)).left < x <= cylinder((d,)).right


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=5), st.integers(1, 6))
def test_periodic_reencode(period, m):
    y = periodic_point(period)
    assert encode(y, len(period) * m).digits == tuple(period) * m
