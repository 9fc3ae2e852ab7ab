from __future__ import annotations

import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twi.invariants import (
    IRR,
    MULTI,
    CacheFormatError,
    InvariantEngine,
    MemoCache,
    RelInvKey,
    r_count,
)
from twi.polygons import POINT, Kind, XiPolygon, canonical_key, interior_count, iter_polygons, rectangle, triangle, vsegment
from twi.sequences import ZERO, Seq, iter_balanced_pairs

from oracles import conic_solution_dim, count_line_pairs, generic_points, tropical_line_vertices

S = Seq


@pytest.mark.parametrize("seed", range(5))
def test_line_through_two_points_is_unique(seed, engine):
    p, q = generic_points(2, seed)
    assert len(tropical_line_vertices(p, q)) == 1
    assert engine.w_irr(triangle(1), ZERO, S((1,)), 0) == 1


@pytest.mark.parametrize("seed", range(5))
def test_pairs_of_lines_oracle(seed, engine):
    assert count_line_pairs(generic_points(4, seed)) == 3
    assert engine.w_multi(triangle(2), ZERO, S((2,)), -1) == 3


@pytest.mark.parametrize("seed", range(5))
def test_unique_conic_oracle(seed, engine):
    assert conic_solution_dim(generic_points(5, seed)) == 1
    assert engine.w_irr(triangle(2), ZERO, S((2,)), 0) == 1


# -- counts and keys --------------------------------------------------------------

def test_r_count_examples():
    assert r_count(triangle(3), ZERO, S((3,)), 0) == 8
    assert r_count(POINT, ZERO, ZERO, 0) == -1
    assert r_count(vsegment(1), ZERO, S((1,)), 0) == 1


def test_unbalanced_key_rejected(engine):
    with pytest.raises(ValueError, match="unbalanced key"):
        RelInvKey(triangle(2), S((2,)), S((1,)), 0)
    with pytest.raises(ValueError, match="unbalanced key"):
        engine.w_irr(triangle(2), S((2,)), S((1,)), 0)
    with pytest.raises(ValueError, match="not in Xi"):
        RelInvKey(XiPolygon((0, 0, 2, 0, 0, 2)), ZERO, ZERO, 0)


def test_key_text_round_trip():
    key = RelInvKey(XiPolygon((1, 1, 1, 1, 1, 1)), ZERO, S((1,)), 0, IRR)
    assert RelInvKey.from_text(key.text()) == key


# -- initial values -------------------------------------------------------------

def test_initial_values(engine):
    assert engine.w_multi(POINT, ZERO, ZERO, 1) == 1
    assert engine.w_multi(POINT, ZERO, ZERO, 0) == 0
    assert engine.w_multi(vsegment(2), ZERO, S((2,)), -1) == 1
    assert engine.w_multi(vsegment(2), S((1,)), S((1,)), 0) == 0
    assert engine.w_irr(vsegment(1), ZERO, S((1,)), 0) == 1
    assert engine.w_irr(vsegment(2), ZERO, S((2,)), -1) == 0
    assert engine.w_irr(vsegment(2), ZERO, S((2,)), 0) == 0
    assert engine.w_irr(triangle(1), S((1,)), ZERO, 0) == 1


def test_point_genus_zero_loses_the_line_counts():
    # the empty curve must sit at genus 1 for lines and line pairs to be counted
    alt = InvariantEngine(point_genus=0)
    assert alt.w_multi(triangle(1), ZERO, S((1,)), 0) == 0
    assert alt.w_multi(triangle(2), ZERO, S((2,)), -1) == 0


@pytest.mark.parametrize("d,value", list(enumerate((1, 1, 8, 240, 18264, 2845440), start=1)))
def test_p2_table(d, value, engine):
    assert engine.w_irr(triangle(d), ZERO, S((d,)), 0) == value


def test_small_surfaces(engine):
    assert engine.w_irr(rectangle(1, 2), ZERO, S((2,)), 0) == 1
    assert engine.w_irr(rectangle(2, 1), ZERO, S((1,)), 0) == 1
    assert engine.w_irr(rectangle(2, 2), ZERO, S((2,)), 0) == 8
    assert engine.w_irr(XiPolygon((1, 1, 1, 1, 1, 1)), ZERO, S((1,)), 0) == 8


# -- enumerations ---------------------------------------------------------------

def test_second_sum_terms(engine):
    assert list(engine.second_sum_terms(RelInvKey(triangle(2), ZERO, S((2,)), 0))) == []
    terms = {(canonical_key(t.peeled), t.alpha_p, t.beta_p, t.genus_p, t.coeff)
             for t in engine.second_sum_terms(RelInvKey(triangle(2), S((2,)), ZERO, 0))}
    assert terms == {("P:1,0,1,0,1,0", ZERO, S((1,)), 0, 1), ("P:1,0,1,0,1,0", S((1,)), ZERO, 1, 2)}
    for d in range(2, 5):
        for t in engine.second_sum_terms(RelInvKey(triangle(d), S((1,)), S((d - 1,)), 0)):
            assert t.daleth == ()
    with pytest.raises(ValueError):
        list(engine.second_sum_terms(RelInvKey(vsegment(1), ZERO, S((1,)), 0)))


def test_irr_splittings(engine):
    assert list(engine.irr_splittings((POINT, ZERO, ZERO, 1), ZERO)) == [[]]
    (single,) = engine.irr_splittings((triangle(1), ZERO, S((1,)), 0), ZERO)
    assert [(t.polygon_i, t.alpha_i, t.beta_i, t.genus_i, t.beta_tilde_i) for t in single] == [
        (triangle(1), ZERO, S((1,)), 0, S((1,)))
    ]
    (pair,) = engine.irr_splittings((vsegment(2), ZERO, S((2,)), -1), ZERO)
    assert [(t.polygon_i, t.beta_i, t.genus_i, t.beta_tilde_i) for t in pair] == [
        (vsegment(1), S((1,)), 0, S((1,)))
    ] * 2


XI = [p for p in iter_polygons(3, 3) if p.kind is Kind.POLY and p.in_xi]


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(XI), st.data())
def test_top_genus_curves_are_irreducible(engine, p, data):
    a, b = data.draw(st.sampled_from(list(iter_balanced_pairs(p.sigma_len))))
    g = interior_count(p)
    assert engine.w_multi(p, a, b, g) == engine.w_irr(p, a, b, g)
    assert engine.w_multi(p, a, b, g + 1) == 0
    assert engine.w_irr(p, a, b, g + 1) == 0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([p for p in XI if interior_count(p) == 0]))
def test_no_interior_points_gives_one(engine, p):
    assert engine.w_irr(p, ZERO, S((p.sigma_len,)), 0) == 1


def test_debug_mode_accepts_the_table():
    dbg = InvariantEngine(debug=True)
    for d in range(1, 5):
        for g in range(-3, 4):
            dbg.w_multi(triangle(d), ZERO, S((d,)), g)


def test_audit_counters_move():
    e = InvariantEngine()
    e.w_irr(triangle(4), ZERO, S((4,)), 0)
    assert e.audit["balance_checks"] > 0
    assert e.audit["conservation_checks"] > 0
    assert e.audit_cache() == []


# -- cache ----------------------------------------------------------------------

def test_cache_round_trip(tmp_path):
    e = InvariantEngine()
    e.w_irr(triangle(5), ZERO, S((5,)), 0)
    path = tmp_path / "c.jsonl"
    n = e.save(path)
    assert n == len(e.cache)
    warm = InvariantEngine()
    assert warm.load(path) == n
    assert warm.w_irr(triangle(5), ZERO, S((5,)), 0) == 18264
    assert warm.cache.stats["hits"] == 1 and warm.cache.stats["misses"] == 0
    # saving is deterministic
    path2 = tmp_path / "d.jsonl"
    warm.save(path2)
    assert path.read_bytes() == path2.read_bytes()


@pytest.mark.parametrize(
    "content,message",
    [
        ("", "missing header"),
        ('{"format": "other", "version": 1}\n', "missing header"),
        ('{"format": "twi-cache", "version": 2}\n', "unsupported cache version"),
        ('{"format": "twi-cache", "version": 1}\nnot json\n', "malformed record"),
        ('{"format": "twi-cache", "version": 1}\n{"key": "irr|P:2,0,2,0,2,0|0|1|0", "value": "1"}\n', "malformed record"),
    ],
)
def test_cache_rejects_bad_files(tmp_path, content, message):
    path = tmp_path / "bad.jsonl"
    path.write_text(content)
    with pytest.raises(CacheFormatError, match=message):
        MemoCache().load(path)


def test_corrupted_cache_is_detected(tmp_path):
    e = InvariantEngine()
    e.w_irr(triangle(3), ZERO, S((3,)), 0)
    path = tmp_path / "c.jsonl"
    e.save(path)
    path.write_text(path.read_text().replace('"value": "8"', '"value": "9"'))
    tampered = InvariantEngine()
    tampered.load(path)
    bad = tampered.audit_cache()
    assert bad and bad[0][1:] == (9, 8)


def test_shared_cache_across_threads():
    threading.stack_size(256 * 1024 * 1024)
    try:
        e = InvariantEngine(shared=True)
        results = {}

        def work(d):
            results[d] = e.w_irr(triangle(d), ZERO, S((d,)), 0)

        threads = [threading.Thread(target=work, args=(d,)) for d in range(1, 6)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    finally:
        threading.stack_size(0)
    assert [results[d] for d in range(1, 6)] == [1, 1, 8, 240, 18264]


def test_kinds_are_exposed():
    assert {MULTI, IRR} == {"multi", "irr"}
