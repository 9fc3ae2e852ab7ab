from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twi.genfunc import (
    UNIT,
    Series,
    SeriesKey,
    Truncation,
    build_series,
    check_exp_identity,
    multiply_keys,
    series_exp,
    series_exp_by_powers,
    shape_polygons,
)
from twi.polygons import POINT, rectangle, triangle, vsegment
from twi.sequences import ZERO, Seq

S = Seq


def test_irr_series_contains_line_term(engine):
    z = build_series("irr", "P2", Truncation(1, 1, 2), engine)
    assert z.coeffs[SeriesKey(triangle(1), 0, ZERO, S((1,)))] == Fraction(1, 2)


def test_multi_series_contains_segment_term(engine):
    z = build_series("multi", "P1xP1", Truncation(1, 1, 2), engine)
    assert z.coeffs[SeriesKey(vsegment(1), 0, S((1,)), ZERO)] == 1
    assert z.coeffs[UNIT] == 1


def test_empty_box_gives_empty_series(engine):
    assert len(build_series("irr", "P2", Truncation(0, 0, 5), engine)) == 0
    assert check_exp_identity("P2", Truncation(0, 0, 5), engine)["mismatches"] == []


def test_shape_polygons():
    assert shape_polygons("P2", 2, 2) == sorted({POINT, triangle(1), triangle(2)})
    polys = shape_polygons("P1xP1", 1, 2)
    assert rectangle(1, 2) in polys and vsegment(2) in polys and vsegment(1) in polys
    with pytest.raises(ValueError):
        shape_polygons("P4", 2, 2)


def test_exp_of_single_term():
    t = Truncation(3, 3, 9)
    key = SeriesKey(triangle(1), 0, ZERO, S((1,)))
    c = Fraction(3, 7)
    e = series_exp(Series(t, {key: c}))
    k2 = multiply_keys(key, key)
    k3 = multiply_keys(k2, key)
    assert e.coeffs == {key: c, k2: c * c / 2, k3: c ** 3 / 6}


def test_exp_spot_coefficient(engine):
    t = Truncation(2, 2, 6)
    line = SeriesKey(triangle(1), 0, ZERO, S((1,)))
    e = series_exp(Series(t, {line: Fraction(1, 2)}))
    assert e.coeffs[SeriesKey(triangle(2), -1, ZERO, S((2,)))] == Fraction(1, 8)
    z = build_series("multi", "P2", t, engine)
    assert z.coeffs[SeriesKey(triangle(2), -1, ZERO, S((2,)))] == Fraction(1, 8)


def test_exp_edge_cases():
    t = Truncation(2, 2, 4)
    assert len(series_exp(Series(t))) == 0
    with pytest.raises(ValueError, match="constant term"):
        series_exp(Series(t, {UNIT: Fraction(1)}))


@pytest.mark.parametrize("shape", ["P2", "P1xP1"])
def test_exp_identity_small(shape, engine):
    rep = check_exp_identity(shape, Truncation(2, 2, 6), engine)
    assert rep["checked"] > 0 and rep["mismatches"] == []


def test_segment_key_in_p1xp1(engine):
    t = Truncation(2, 2, 6)
    key = SeriesKey(vsegment(2), -1, S((2,)), ZERO)
    z = build_series("multi", "P1xP1", t, engine)
    e = series_exp(build_series("irr", "P1xP1", t, engine))
    assert z.coeffs[key] == e.coeffs[key] == Fraction(1, 2)


@pytest.mark.parametrize("shape", ["P2_1", "P2_2"])
def test_exp_identity_blowups(shape, engine):
    assert check_exp_identity(shape, Truncation(3, 3, 8), engine)["mismatches"] == []


def test_report_format(engine):
    rep = check_exp_identity("P2", Truncation(2, 2, 4), engine)
    assert set(rep) == {"shape", "box", "n_max", "checked", "mismatches"}


KEYS = [k for k in build_series("irr", "P1xP1", Truncation(2, 2, 5)).coeffs]


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.sampled_from(KEYS), st.fractions(min_value=-3, max_value=3, max_denominator=5), max_size=4))
def test_exp_orders_agree(coeffs):
    s = Series(Truncation(2, 2, 5), {k: c for k, c in coeffs.items() if c})
    assert series_exp(s).coeffs == series_exp_by_powers(s).coeffs


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(KEYS), st.sampled_from(KEYS))
def test_key_product_is_graded(k1, k2):
    k = multiply_keys(k1, k2)
    assert k.n == k1.n + k2.n
    assert k == multiply_keys(k2, k1)
    assert multiply_keys(k1, UNIT) == k1
