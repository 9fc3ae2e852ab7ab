"""Toric Del Pezzo surfaces, their divisor polygons and absolute invariants."""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterator

from .invariants import InvariantEngine, default_engine
from .polygons import (
    Kind,
    XiPolygon,
    canonical_key,
    interior_count,
    iter_polygons,
    peel_side,
)
from .sequences import ZERO, Seq

SURFACES = ("P2", "P1xP1", "P2_1", "P2_2", "P2_3")

# side expressions per surface, in (W, SW, S, E, NE, N) order; None = absent side
_SIDE_TEXT = {
    "P2": ("d", None, "d", None, "d", None),
    "P1xP1": ("d2", None, "d1", "d2", None, "d1"),
    "P2_1": ("d", None, "d-d1", "d1", "d-d1", None),
    "P2_2": ("d-d2", "d2", "d-d1-d2", "d1", "d-d1", None),
    "P2_3": ("d-d2-d3", "d2", "d-d1-d2", "d1", "d-d1-d3", "d3"),
}


@dataclass(frozen=True)
class DivisorSpec:
    surface: str
    d: int = 0
    d1: int = 0
    d2: int = 0
    d3: int = 0

    def __post_init__(self):
        if self.surface not in SURFACES:
            raise ValueError(f"unknown surface {self.surface!r}; expected one of {', '.join(SURFACES)}")

    def raw_lengths(self) -> tuple[int, ...]:
        d, d1, d2, d3 = self.d, self.d1, self.d2, self.d3
        if self.surface == "P2":
            return (d, 0, d, 0, d, 0)
        if self.surface == "P1xP1":
            return (d2, 0, d1, d2, 0, d1)
        k = int(self.surface[-1])
        if k < 3:
            d3 = 0
        if k < 2:
            d2 = 0
        return (d - d2 - d3, d2, d - d1 - d2, d1, d - d1 - d3, d3)

    def text(self) -> str:
        if self.surface == "P2":
            return f"p2:d={self.d}"
        if self.surface == "P1xP1":
            return f"p1xp1:{self.d1},{self.d2}"
        k = int(self.surface[-1])
        ds = ",".join(f"d{i}={getattr(self, f'd{i}')}" for i in range(1, k + 1))
        return f"p2k:k={k},d={self.d},{ds}"

    def divisor_text(self) -> str:
        if self.surface == "P2":
            return f"{self.d}L"
        if self.surface == "P1xP1":
            return f"({self.d1},{self.d2})"
        k = int(self.surface[-1])
        return f"{self.d}L" + "".join(f"-{getattr(self, f'd{i}')}E{i}" for i in range(1, k + 1))


def parse_divisor_spec(text: str) -> DivisorSpec:
    """Parse ``p2:d=5``, ``p1xp1:2,3`` or ``p2k:k=3,d=4,d1=1,d2=1,d3=1``."""
    text = text.strip().lower()
    head, _, body = text.partition(":")
    if head == "p1xp1":
        a, b = (int(t) for t in body.split(","))
        return DivisorSpec("P1xP1", d1=a, d2=b)
    fields = dict(re.findall(r"(\w+)=(-?\d+)", body))
    if head == "p2":
        return DivisorSpec("P2", d=int(fields["d"]))
    if head == "p2k":
        k = int(fields.get("k", 0))
        if k not in (1, 2, 3):
            raise ValueError("p2k needs k in 1..3")
        return DivisorSpec(f"P2_{k}", d=int(fields["d"]), **{f"d{i}": int(fields.get(f"d{i}", 0)) for i in range(1, k + 1)})
    raise ValueError(f"cannot parse divisor spec {text!r}")


def polygon_of_divisor(spec: DivisorSpec, ample: bool = True) -> XiPolygon:
    """The polygon of the linear system; ``ample=False`` accepts nef boundary cases."""
    v = spec.raw_lengths()
    names = _SIDE_TEXT[spec.surface]
    for side, (x, name) in enumerate(zip(v, names)):
        label = name or "absent side"
        if x < 0:
            raise ValueError(f"side length {label} = {x} is negative")
        if ample and name is not None and x == 0:
            raise ValueError(f"side length {name} = 0 violates ampleness")
    if spec.surface == "P1xP1" and (spec.d1 < 0 or spec.d2 < 0):
        raise ValueError("bidegree must be nonnegative")
    p = XiPolygon(v)
    if p.kind is not Kind.POLY or not p.in_xi:
        raise ValueError(f"{spec.text()} does not give a left-nondegenerate polygon ({canonical_key(p)})")
    return p


def absolute_invariant(polygon: XiPolygon, engine: InvariantEngine | None = None) -> int:
    """W(Sigma, D) of the surface and divisor defined by a nondegenerate polygon."""
    engine = engine or default_engine()
    return engine.w_irr(polygon, ZERO, Seq((polygon.sigma_len,)), 0)


def welschinger(spec: DivisorSpec, engine: InvariantEngine | None = None) -> int:
    return absolute_invariant(polygon_of_divisor(spec), engine)


def iter_ample_specs(width: int, height: int) -> Iterator[DivisorSpec]:
    """Ample divisor specs on the five surfaces whose polygon fits the box."""
    bound = width + height + 1
    for d in range(1, bound):
        yield DivisorSpec("P2", d=d)
    for a in range(1, width + 1):
        for b in range(1, height + 1):
            yield DivisorSpec("P1xP1", d1=a, d2=b)
    for d in range(1, bound):
        for d1 in range(1, d):
            yield DivisorSpec("P2_1", d=d, d1=d1)
            for d2 in range(1, d):
                yield DivisorSpec("P2_2", d=d, d1=d1, d2=d2)
                for d3 in range(1, d):
                    yield DivisorSpec("P2_3", d=d, d1=d1, d2=d2, d3=d3)


def ample_specs_in_box(width: int, height: int) -> list[DivisorSpec]:
    out = []
    for spec in iter_ample_specs(width, height):
        try:
            p = polygon_of_divisor(spec)
        except ValueError:
            continue
        if p.fits(width, height):
            out.append(spec)
    return out


# -- monotonicity ------------------------------------------------------------

def peel_children(p: XiPolygon) -> set[XiPolygon]:
    """Nondegenerate polygons reached from ``p`` by one peel along any side."""
    out = set()
    for side in range(6):
        # a zero-length side is a vertex: peeling it cuts off a corner
        q = peel_side(p, side)
        if q is not None and q.kind is Kind.POLY:
            out.add(q)
    return out


def peeling_chain(outer: XiPolygon, inner: XiPolygon) -> list[XiPolygon] | None:
    """Shortest chain of single peels from ``outer`` down to ``inner``, or None."""
    prev = {outer: None}
    queue = deque([outer])
    while queue:
        p = queue.popleft()
        if p == inner:
            chain = []
            while p is not None:
                chain.append(p)
                p = prev[p]
            return chain[::-1]
        for q in sorted(peel_children(p)):
            if q not in prev:
                prev[q] = p
                queue.append(q)
    return None


@dataclass
class MonotonicityReport:
    outer: XiPolygon
    inner: XiPolygon
    w_outer: int
    w_inner: int
    strict_required: bool
    chain: list[XiPolygon] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        if self.strict_required:
            return self.w_outer > self.w_inner
        return self.w_outer >= self.w_inner


def check_monotonicity(outer: XiPolygon, inner: XiPolygon, engine: InvariantEngine | None = None) -> MonotonicityReport:
    for p in (outer, inner):
        if p.kind is not Kind.POLY or not p.in_xi:
            raise ValueError(f"{canonical_key(p)} is not a nondegenerate polygon in Xi")
    chain = peeling_chain(outer, inner)
    if chain is None:
        raise ValueError(f"not nested in Xi: no peeling chain from {canonical_key(outer)} to {canonical_key(inner)}")
    return MonotonicityReport(
        outer,
        inner,
        absolute_invariant(outer, engine),
        absolute_invariant(inner, engine),
        interior_count(outer) > interior_count(inner),
        chain,
    )


def xi_polygons_in_box(width: int, height: int) -> list[XiPolygon]:
    return sorted(p for p in iter_polygons(width, height) if p.kind is Kind.POLY and p.in_xi)


def monotonicity_sweep(width: int, height: int, engine: InvariantEngine | None = None) -> dict:
    """Check every (outer, inner) pair joined by a peeling chain inside the box."""
    engine = engine or default_engine()
    polys = xi_polygons_in_box(width, height)
    children = {}
    checked, violations = 0, []
    for outer in polys:
        seen = {outer}
        stack = [outer]
        while stack:
            p = stack.pop()
            if p not in children:
                children[p] = peel_children(p)
            for q in children[p]:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        w_outer = absolute_invariant(outer, engine)
        for inner in sorted(seen):
            if not inner.in_xi:
                continue
            w_inner = absolute_invariant(inner, engine)
            strict = interior_count(outer) > interior_count(inner)
            checked += 1
            if (strict and not w_outer > w_inner) or w_outer < w_inner:
                violations.append((canonical_key(outer), canonical_key(inner), w_outer, w_inner, strict))
    return {"polygons": len(polys), "checked": checked, "violations": violations}


# -- positivity and symmetry -------------------------------------------------

def positivity_sweep(width: int, height: int, engine: InvariantEngine | None = None) -> dict:
    engine = engine or default_engine()
    rows, violations = [], []
    for spec in ample_specs_in_box(width, height):
        value = welschinger(spec, engine)
        rows.append((spec, value))
        if value <= 0:
            violations.append((spec.text(), value))
    return {"checked": len(rows), "rows": rows, "violations": violations}


def symmetry_report(max_bidegree: int = 4, max_d: int = 4, engine: InvariantEngine | None = None) -> dict:
    """P1xP1 (a,b) vs (b,a), and P2_3 under permutations of (d1, d2, d3)."""
    engine = engine or default_engine()
    checked, violations = 0, []
    for a in range(1, max_bidegree + 1):
        for b in range(a + 1, max_bidegree + 1):
            x = welschinger(DivisorSpec("P1xP1", d1=a, d2=b), engine)
            y = welschinger(DivisorSpec("P1xP1", d1=b, d2=a), engine)
            checked += 1
            if x != y:
                violations.append((f"p1xp1:{a},{b}", x, f"p1xp1:{b},{a}", y))
    for spec in ample_specs_in_box(3 * max_d, 3 * max_d):
        if spec.surface != "P2_3" or spec.d > max_d:
            continue
        base = welschinger(spec, engine)
        for perm in set(permutations((spec.d1, spec.d2, spec.d3))):
            other = DivisorSpec("P2_3", spec.d, *perm)
            value = welschinger(other, engine)
            checked += 1
            if value != base:
                violations.append((spec.text(), base, other.text(), value))
    return {"checked": checked, "violations": violations}
