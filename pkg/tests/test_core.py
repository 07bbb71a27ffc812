import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cubecover import (
    CoveringSystem,
    RowScaling,
    SystemFormatError,
    apply_rescaling,
    enumerate_uncovered,
    format_rational,
    lr_cover,
    parse_rational,
    parse_system,
    row_squared_norms,
)

rationals = st.fractions(min_value=-(10**6), max_value=10**6, max_denominator=10**4)


def test_parse_rational_forms():
    assert parse_rational("3") == 3
    assert parse_rational("-3") == -3
    assert parse_rational("+3/6") == Fraction(1, 2)
    assert parse_rational("-10/4") == Fraction(-5, 2)


@pytest.mark.parametrize("bad", ["", "1.5", "3e2", "a", "1/2/3", "--1"])
def test_parse_rational_rejects(bad):
    with pytest.raises(SystemFormatError):
        parse_rational(bad)


def test_parse_rational_zero_denominator():
    with pytest.raises(SystemFormatError, match="zero denominator"):
        parse_rational("1/0", where="row 1, column 0")


@given(rationals)
def test_format_parse_round_trip(x):
    assert parse_rational(format_rational(x)) == x


def test_parse_system_minimal():
    sys_ = parse_system('{"n": 1, "rows": [["1"]], "mu": ["0"]}')
    assert (sys_.n, sys_.k) == (1, 1)
    assert sys_.rows == ((Fraction(1),),)


def test_parse_system_zero_row():
    with pytest.raises(SystemFormatError, match="zero row at index 0"):
        parse_system('{"n": 2, "rows": [["0", "0"]], "mu": ["0"]}')


def test_parse_system_lr4():
    sys_ = parse_system(json.dumps(lr_cover(4).to_json_dict()))
    assert (sys_.n, sys_.k) == (4, 3)
    assert sys_ == lr_cover(4)


@pytest.mark.parametrize(
    "doc, msg",
    [
        ('{"rows": [["1"]], "mu": ["0"]}', "missing key 'n'"),
        ('{"n": 2, "rows": [["1"]], "mu": ["0"]}', "row 0 has 1 entries"),
        ('{"n": 1, "rows": [["1"]], "mu": []}', "mu has 0 entries"),
        ('{"n": 1, "rows": [["1"]], "mu": ["1/0"]}', "zero denominator"),
        ("not json", "malformed JSON"),
        ('{"n": 1, "rows": [["x"]], "mu": ["0"]}', "row 0, column 0"),
    ],
)
def test_parse_system_errors(doc, msg):
    with pytest.raises(SystemFormatError, match=msg):
        parse_system(doc)


def test_apply_rescaling_identity():
    sys_ = lr_cover(4)
    assert apply_rescaling(sys_, RowScaling.identity(3)) == sys_


def test_apply_rescaling_scales_row_and_mu():
    sys_ = CoveringSystem.from_rows([[1, -1]], [0])
    scaled = apply_rescaling(sys_, [2])
    assert scaled.rows == ((Fraction(2), Fraction(-2)),)
    assert scaled.mu == (Fraction(0),)


def test_apply_rescaling_rejects_nonpositive():
    with pytest.raises(ValueError):
        apply_rescaling(lr_cover(4), [1, 0, 1])
    with pytest.raises(ValueError):
        apply_rescaling(lr_cover(4), [1, -2, 1])


def test_rescaling_preserves_cover_verdict_exhaustively():
    # Verdict identity checked over all 16 vertices of lr_cover(4).
    sys_ = lr_cover(4)
    scaled = apply_rescaling(sys_, [Fraction(7, 3), 5, Fraction(1, 9)])
    assert enumerate_uncovered(sys_).uncovered_count == 0
    assert enumerate_uncovered(scaled).uncovered_count == 0
    dropped = CoveringSystem.from_rows(sys_.rows[1:], sys_.mu[1:])
    dropped_scaled = CoveringSystem.from_rows(scaled.rows[1:], scaled.mu[1:])
    a = enumerate_uncovered(dropped)
    b = enumerate_uncovered(dropped_scaled)
    assert a.uncovered_count == b.uncovered_count
    assert a.witness == b.witness


def test_row_squared_norms_examples():
    assert row_squared_norms(CoveringSystem.from_rows([[1, 1, 1, 1]], [0])) == (Fraction(4),)
    half = Fraction(1, 2)
    assert row_squared_norms(CoveringSystem.from_rows([[half] * 4], [0])) == (Fraction(1),)
    assert row_squared_norms(lr_cover(4)) == (Fraction(4), Fraction(2), Fraction(2))


@given(st.lists(rationals, min_size=1, max_size=6), rationals.filter(lambda f: f > 0))
def test_row_norms_compose_with_rescaling(row, phi):
    if all(c == 0 for c in row):
        row[0] = Fraction(1)
    sys_ = CoveringSystem.from_rows([row], [0])
    scaled = apply_rescaling(sys_, [phi])
    assert row_squared_norms(scaled)[0] == phi * phi * row_squared_norms(sys_)[0]


@given(rationals, rationals.filter(lambda f: f != 0))
def test_scalar_arithmetic_exact(a, b):
    assert (a + b) - b == a
    assert (a * b) / b == a


def test_system_json_round_trip():
    sys_ = lr_cover(6)
    assert parse_system(sys_.to_json()) == sys_


def test_arbitrary_precision_round_trip():
    big = 10**50
    sys_ = CoveringSystem.from_rows([[Fraction(big, big + 1), 1]], [Fraction(-big)])
    assert parse_system(sys_.to_json()) == sys_
