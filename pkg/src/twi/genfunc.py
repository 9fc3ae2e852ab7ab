"""Truncated generating series of the relative invariants.

A term is keyed by ``(polygon, genus, alpha, beta)`` and stands for the
monomial ``v^polygon w^(genus-1) x^alpha y^beta z^n`` with
``n = |boundary| - |sigma| + |beta| + genus - 1`` (the number of point
conditions off the left line).  The coefficient of the key in ``Z`` is
``W / (alpha! n!)`` and in ``Z_irr`` it is ``W_irr / (alpha! n!)``.

Monomials multiply by Minkowski sum of polygons, termwise sums of
``alpha``/``beta`` and ``genus = g1 + g2 - 1``; ``n`` is additive.  The
unit monomial is ``(point, 1, (0), (0))``.  Series are truncated to a
bounding box for the polygon and to ``n <= n_max``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, NamedTuple

from .invariants import IRR, MULTI, InvariantEngine, default_engine
from .polygons import (
    POINT,
    Kind,
    XiPolygon,
    admissible_sets,
    canonical_key,
    iter_polygons,
    minkowski_sum,
    xi_summands,
)
from .sequences import ZERO, Seq, add, factorial_seq, iter_balanced_pairs, norm
from .surfaces import SURFACES, _SIDE_TEXT


class SeriesKey(NamedTuple):
    polygon: XiPolygon
    genus: int
    alpha: Seq
    beta: Seq

    @property
    def n(self) -> int:
        p = self.polygon
        return p.boundary_len - p.sigma_len + norm(self.beta) + self.genus - 1

    def text(self) -> str:
        return f"{canonical_key(self.polygon)}|{self.genus}|{self.alpha.text()}|{self.beta.text()}"


UNIT = SeriesKey(POINT, 1, ZERO, ZERO)


@dataclass(frozen=True)
class Truncation:
    width: int
    height: int
    n_max: int

    def admits(self, key: SeriesKey) -> bool:
        return key.polygon.fits(self.width, self.height) and 0 <= key.n <= self.n_max


@dataclass
class Series:
    truncation: Truncation
    coeffs: dict[SeriesKey, Fraction] = field(default_factory=dict)

    def add_term(self, key: SeriesKey, c) -> None:
        if not self.truncation.admits(key):
            return
        c = self.coeffs.get(key, 0) + c
        if c:
            self.coeffs[key] = Fraction(c)
        else:
            self.coeffs.pop(key, None)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __mul__(self, other: "Series") -> "Series":
        out = Series(self.truncation)
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = multiply_keys(k1, k2)
                if self.truncation.admits(k):
                    out.add_term(k, c1 * c2)
        return out

    def scaled(self, c) -> "Series":
        return Series(self.truncation, {k: v * c for k, v in self.coeffs.items() if v * c})

    def __add__(self, other: "Series") -> "Series":
        out = Series(self.truncation, dict(self.coeffs))
        for k, c in other.coeffs.items():
            out.add_term(k, c)
        return out

    def sorted_items(self):
        return sorted(self.coeffs.items(), key=lambda kv: kv[0].text())


def multiply_keys(k1: SeriesKey, k2: SeriesKey) -> SeriesKey:
    k = SeriesKey(minkowski_sum(k1.polygon, k2.polygon), k1.genus + k2.genus - 1,
                  add(k1.alpha, k2.alpha), add(k1.beta, k2.beta))
    assert k.n == k1.n + k2.n, "z-grading is not additive"
    return k


def shape_pattern(shape: str) -> frozenset[int]:
    if shape not in SURFACES:
        raise ValueError(f"unknown shape {shape!r}")
    return frozenset(i for i, name in enumerate(_SIDE_TEXT[shape]) if name is not None)


def shape_polygons(shape: str, width: int, height: int) -> list[XiPolygon]:
    """Polygons of the given shape fitting the box.

    The set is closed under admissible peels and under taking Minkowski
    summands in Xi, so that every product of ``Z_irr`` terms landing on a
    member polygon is built from members.
    """
    pattern = shape_pattern(shape)
    todo = [
        p for p in iter_polygons(width, height)
        if frozenset(i for i, x in enumerate(p.lengths) if x) == pattern and p.in_xi
    ]
    seen = set(todo)
    while todo:
        p = todo.pop()
        nxt = list(xi_summands(p))
        if p.kind is Kind.POLY:
            nxt += [q for _, q in admissible_sets(p)]
        for q in nxt:
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return sorted(seen)


def build_series(kind: str, shape: str | None, truncation: Truncation, engine: InvariantEngine | None = None,
                 polygons: Iterable[XiPolygon] | None = None) -> Series:
    """``Z`` (kind ``multi``) or ``Z_irr`` (kind ``irr``) over the shape's polygons."""
    engine = engine or default_engine()
    if polygons is None:
        polygons = shape_polygons(shape, truncation.width, truncation.height)
    value = engine.w_multi if kind == MULTI else engine.w_irr
    out = Series(truncation)
    for p in polygons:
        if not p.fits(truncation.width, truncation.height):
            continue
        for a, b in iter_balanced_pairs(p.sigma_len):
            base = p.boundary_len - p.sigma_len + norm(b) - 1
            g_lo = -base if kind == MULTI else max(0, -base)
            for g in range(g_lo, truncation.n_max - base + 1):
                w = value(p, a, b, g)
                if w:
                    n = base + g
                    out.add_term(SeriesKey(p, g, a, b), Fraction(w, factorial_seq(a) * factorial(n)))
    return out


def _check_no_constant(s: Series) -> None:
    if any(k.polygon.kind is Kind.POINT for k in s.coeffs):
        raise ValueError("series has a constant term; exp needs a series without point keys")


def series_exp(s: Series) -> Series:
    """``exp(s) - 1`` truncated, computed as a product of one-term exponentials."""
    _check_no_constant(s)
    t = s.truncation
    acc = Series(t, {UNIT: Fraction(1)})
    for key, c in s.sorted_items():
        factor = Series(t, {UNIT: Fraction(1)})
        power, j = UNIT, 0
        coeff = Fraction(1)
        while True:
            power = multiply_keys(power, key)
            j += 1
            if not t.admits(power):
                break
            coeff = coeff * c / j
            factor.add_term(power, coeff)
        acc = acc * factor
    acc.coeffs.pop(UNIT, None)
    return acc


def series_exp_by_powers(s: Series, max_power: int | None = None) -> Series:
    """``sum_{m>=1} s^m / m!`` evaluated directly; used to cross-check :func:`series_exp`."""
    _check_no_constant(s)
    t = s.truncation
    if max_power is None:
        max_power = t.width + t.height + 1
    out = Series(t)
    power = Series(t, {UNIT: Fraction(1)})
    for m in range(1, max_power + 1):
        power = (power * s).scaled(Fraction(1, m))
        if not power.coeffs:
            break
        out = out + power
    return out


def check_exp_identity(shape: str, truncation: Truncation, engine: InvariantEngine | None = None) -> dict:
    """Compare ``Z`` with ``exp(Z_irr)`` coefficientwise (the unit term included)."""
    engine = engine or default_engine()
    polys = shape_polygons(shape, truncation.width, truncation.height)
    z_irr = build_series(IRR, shape, truncation, engine, polys)
    z = build_series(MULTI, shape, truncation, engine, polys)
    rhs = series_exp(z_irr)
    rhs.add_term(UNIT, 1)
    # products can leave the family (T1 + T2 in the P2_1 shape); off-family
    # polygons lack their own irreducible terms, so they are not compared
    members = set(polys)
    rhs.coeffs = {k: c for k, c in rhs.coeffs.items() if k.polygon in members}
    keys = sorted(set(z.coeffs) | set(rhs.coeffs), key=SeriesKey.text)
    mismatches = []
    for k in keys:
        lhs_c, rhs_c = z.coeffs.get(k, Fraction(0)), rhs.coeffs.get(k, Fraction(0))
        if lhs_c != rhs_c:
            mismatches.append({"key": k.text(), "lhs": _frac(lhs_c), "rhs": _frac(rhs_c)})
    return {
        "shape": shape,
        "box": f"{truncation.width}x{truncation.height}",
        "n_max": truncation.n_max,
        "checked": len(keys),
        "mismatches": mismatches,
    }


def _frac(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"
