"""Lattice polygons whose sides have normals in a fixed six-direction fan.

A polygon is stored as the 6-vector of lattice side lengths

    (W, SW, S, E, NE, N)

for outward normals (-1,0), (-1,-1), (0,-1), (1,0), (1,1), (0,1).  The vector
determines the polygon up to translation; segments and points are the
degenerate vectors.  The class of polygons used by the recursions (points,
vertical segments, and polygons with a left side of positive length) is
checked by :attr:`XiPolygon.in_xi`.  Peeling results can leave that class
(e.g. a top peel can kill the left side), so :class:`XiPolygon` holds any
closed 6-vector and :func:`classify` is the validating constructor.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product
from typing import Iterator, NamedTuple

W, SW, S, E, NE, N = range(6)
SIDE_NAMES = ("W", "SW", "S", "E", "NE", "N")
NORMALS = ((-1, 0), (-1, -1), (0, -1), (1, 0), (1, 1), (0, 1))
# counterclockwise order of the sides, starting with the bottom one
CCW = (S, E, NE, N, W, SW)
SLOPE = {W: "inf", SW: -1, S: 0, E: "inf", NE: -1, N: 0}


class Kind(str, Enum):
    POINT = "pt"
    VSEGMENT = "vs"
    HSEGMENT = "hs"
    DSEGMENT = "ds"
    POLY = "P"


class PeelLine(Enum):
    """Supporting lines used by the recursion, named by the side they remove."""

    LEFT_VERTICAL = W
    TOP_HORIZONTAL = N
    LOWER_LEFT_DIAGONAL = SW


class BoundaryStats(NamedTuple):
    sigma_len: int
    boundary_len: int
    interior_count: int
    vertex_list: tuple[tuple[int, int], ...]


@dataclass(frozen=True, order=True)
class XiPolygon:
    lengths: tuple[int, int, int, int, int, int]

    def __post_init__(self):
        v = self.lengths
        if len(v) != 6 or any(x < 0 for x in v):
            raise ValueError(f"side lengths must be six nonnegative integers, got {v}")
        if v[SW] + v[S] - v[NE] - v[N] != 0 or -v[W] - v[SW] + v[E] + v[NE] != 0:
            raise ValueError(f"not a closed circuit: {v}")

    @property
    def kind(self) -> Kind:
        return _kind(self.lengths)

    @property
    def in_xi(self) -> bool:
        k = self.kind
        return k in (Kind.POINT, Kind.VSEGMENT) or (k is Kind.POLY and self.lengths[W] >= 1)

    @property
    def sigma_len(self) -> int:
        # the left side; equals s for VSegment(s) and 0 for a point
        return self.lengths[W]

    @property
    def boundary_len(self) -> int:
        # counts a vertical segment of length s as 2s (both "sides")
        return sum(self.lengths)

    @property
    def width(self) -> int:
        return self.lengths[SW] + self.lengths[S]

    @property
    def height(self) -> int:
        return self.lengths[E] + self.lengths[NE]

    @property
    def is_nondegenerate(self) -> bool:
        return self.kind is Kind.POLY

    def fits(self, width: int, height: int) -> bool:
        return self.width <= width and self.height <= height

    def __add__(self, other: "XiPolygon") -> "XiPolygon":
        return minkowski_sum(self, other)

    def __str__(self) -> str:
        return canonical_key(self)


@lru_cache(maxsize=None)
def _kind(v) -> Kind:
    nz = {i for i, x in enumerate(v) if x}
    if not nz:
        return Kind.POINT
    if nz == {W, E}:
        return Kind.VSEGMENT
    if nz == {S, N}:
        return Kind.HSEGMENT
    if nz == {SW, NE}:
        return Kind.DSEGMENT
    return Kind.POLY


POINT = XiPolygon((0, 0, 0, 0, 0, 0))


def triangle(d: int) -> XiPolygon:
    return XiPolygon((d, 0, d, 0, d, 0))


def rectangle(width: int, height: int) -> XiPolygon:
    return XiPolygon((height, 0, width, height, 0, width))


def vsegment(s: int) -> XiPolygon:
    return XiPolygon((s, 0, 0, s, 0, 0))


def classify(lengths) -> XiPolygon:
    """Validate a 6-vector and return it as a member of the class Xi."""
    lengths = tuple(int(x) for x in lengths)
    p = XiPolygon(lengths)
    k = p.kind
    if k in (Kind.HSEGMENT, Kind.DSEGMENT):
        raise ValueError(f"not in Xi: {lengths} is a {'horizontal' if k is Kind.HSEGMENT else 'diagonal'} segment")
    if k is Kind.POLY and lengths[W] == 0:
        raise ValueError(f"not left-nondegenerate: {lengths} has no left vertical side")
    return p


def canonical_key(p: XiPolygon) -> str:
    return f"{p.kind.value}:" + ",".join(map(str, p.lengths))


def minkowski_sum(a: XiPolygon, b: XiPolygon) -> XiPolygon:
    return XiPolygon(tuple(x + y for x, y in zip(a.lengths, b.lengths)))


def vertices(p: XiPolygon) -> tuple[tuple[int, int], ...]:
    """Counterclockwise vertex circuit with the left side on x=0 and the bottom on y=0.

    Starts at the left end of the bottom side.
    """
    v = p.lengths
    x, y = v[SW], 0
    out = [(x, y)]
    steps = {S: (1, 0), E: (0, 1), NE: (-1, 1), N: (-1, 0), W: (0, -1), SW: (1, -1)}
    for side in CCW:
        if v[side]:
            dx, dy = steps[side]
            x, y = x + dx * v[side], y + dy * v[side]
            out.append((x, y))
    assert (x, y) == out[0]
    out.pop()
    return tuple(out) if out else ((0, 0),)


@lru_cache(maxsize=None)
def lattice_points(p: XiPolygon) -> frozenset[tuple[int, int]]:
    v = p.lengths
    top = v[W] + v[SW]
    pts = set()
    for x in range(p.width + 1):
        lo = max(0, v[SW] - x)
        hi = min(top, top + v[N] - x)
        for y in range(lo, hi + 1):
            pts.add((x, y))
    return frozenset(pts)


def lattice_count(p: XiPolygon) -> int:
    return len(lattice_points(p))


def interior_count(p: XiPolygon) -> int:
    if p.kind is not Kind.POLY:
        return 0
    return lattice_count(p) - p.boundary_len


def boundary_stats(p: XiPolygon) -> BoundaryStats:
    return BoundaryStats(p.sigma_len, p.boundary_len, interior_count(p), vertices(p))


def _fan_hull_lengths(points) -> tuple[int, ...]:
    """Side lengths of the smallest fan polygon containing ``points``.

    Each side lies on the supporting line of its normal; its length is read
    off from where the neighbouring supporting lines cut it.
    """
    a = min(x for x, _ in points)
    b = min(x + y for x, y in points)
    c = min(y for _, y in points)
    e = max(x for x, _ in points)
    f = max(x + y for x, y in points)
    t = max(y for _, y in points)
    v = (
        min(t, f - a) - max(c, b - a),
        min(e, b - c) - max(a, b - t),
        min(e, f - c) - max(a, b - c),
        min(t, f - e) - max(c, b - e),
        min(e, f - c) - max(a, f - t),
        min(e, f - t) - max(a, b - t),
    )
    return v


def from_points(points) -> XiPolygon | None:
    """The polygon spanned by a convex lattice point set, or None if the set is empty.

    The point set must be the full set of lattice points of its convex hull
    and the hull must have fan normals; both are asserted.
    """
    points = list(points)
    if not points:
        return None
    q = XiPolygon(_fan_hull_lengths(points))
    assert lattice_count(q) == len(set(points)), f"hull of {sorted(points)} has non-fan sides"
    return q


def peel_side(p: XiPolygon, side: int) -> XiPolygon | None:
    """Hull of the lattice points of ``p`` off the supporting line of ``side``."""
    nx, ny = NORMALS[side]
    pts = lattice_points(p)
    h = max(nx * x + ny * y for x, y in pts)
    return from_points(q for q in pts if nx * q[0] + ny * q[1] != h)


def peel(p: XiPolygon, line: PeelLine) -> XiPolygon | None:
    """Peel along one of the three recursion lines; None means nothing is left."""
    if p.kind is Kind.POINT:
        raise ValueError("cannot peel a point")
    if p.kind is not Kind.POLY and line is not PeelLine.LEFT_VERTICAL:
        raise ValueError(f"cannot peel a {p.kind.name.lower()} along {line.name}")
    return _peel_cached(p, line.value)


@lru_cache(maxsize=None)
def _peel_cached(p: XiPolygon, side: int) -> XiPolygon | None:
    return peel_side(p, side)


def _neighbours(v, side: int) -> tuple[int, int]:
    """The nonzero sides just before and just after ``side`` in the circuit."""
    i = CCW.index(side)
    before = next(CCW[(i - k) % 6] for k in range(1, 6) if v[CCW[(i - k) % 6]])
    after = next(CCW[(i + k) % 6] for k in range(1, 6) if v[CCW[(i + k) % 6]])
    return before, after


def dir_nondegenerate(p: XiPolygon, line: PeelLine) -> bool:
    """Top (resp. lower-left) side is an edge with a slope -1 (resp. slope 0) neighbour."""
    if p.kind is not Kind.POLY:
        raise ValueError("directional nondegeneracy is defined for polygons only")
    if line is PeelLine.TOP_HORIZONTAL:
        side, want = N, -1
    elif line is PeelLine.LOWER_LEFT_DIAGONAL:
        side, want = SW, 0
    else:
        raise ValueError("only the top and lower-left lines carry a nondegeneracy test")
    v = p.lengths
    if not v[side]:
        return False
    return any(SLOPE[s] == want for s in _neighbours(v, side))


DALETH_SETS: tuple[tuple[PeelLine, ...], ...] = (
    (),
    (PeelLine.TOP_HORIZONTAL,),
    (PeelLine.LOWER_LEFT_DIAGONAL,),
    (PeelLine.TOP_HORIZONTAL, PeelLine.LOWER_LEFT_DIAGONAL),
)


def daleth_peel(p: XiPolygon, daleth, order=None) -> XiPolygon | None:
    """Left peel followed by the peels in ``daleth`` (in ``order`` if given)."""
    q = peel(p, PeelLine.LEFT_VERTICAL)
    for line in order or daleth:
        if q is None or q.kind is Kind.POINT:
            return None
        q = _peel_cached(q, line.value)
    return q


@lru_cache(maxsize=None)
def admissible_sets(p: XiPolygon) -> tuple[tuple[tuple[PeelLine, ...], XiPolygon], ...]:
    if p.kind is not Kind.POLY or not p.in_xi:
        raise ValueError(f"admissible sets need a polygon in Xi, got {canonical_key(p)}")
    out = []
    for daleth in DALETH_SETS:
        if not all(dir_nondegenerate(p, s) for s in daleth):
            continue
        q = daleth_peel(p, daleth)
        if q is not None and q.in_xi:
            out.append((daleth, q))
    return tuple(out)


@lru_cache(maxsize=None)
def xi_summands(p: XiPolygon) -> tuple[XiPolygon, ...]:
    """Every q in Xi such that ``p - q`` is a closed nonnegative 6-vector."""
    v = p.lengths
    out = []
    for sw, s, e, ne in product(range(v[SW] + 1), range(v[S] + 1), range(v[E] + 1), range(v[NE] + 1)):
        n = sw + s - ne
        w = e + ne - sw
        if 0 <= n <= v[N] and 0 <= w <= v[W]:
            q = XiPolygon((w, sw, s, e, ne, n))
            if q.in_xi:
                out.append(q)
    return tuple(sorted(out, key=canonical_key))


@lru_cache(maxsize=None)
def difference(p: XiPolygon, q: XiPolygon) -> XiPolygon:
    return XiPolygon(tuple(x - y for x, y in zip(p.lengths, q.lengths)))


def decompositions(p: XiPolygon, m: int) -> Iterator[tuple[XiPolygon, ...]]:
    """Unordered ``m``-term Minkowski decompositions of ``p`` into members of Xi.

    Each multiset is yielded once, as a tuple sorted by canonical key.
    """
    if m < 1:
        raise ValueError("m must be positive")

    def rec(rest: XiPolygon, k: int, low: str) -> Iterator[tuple[XiPolygon, ...]]:
        if k == 1:
            if rest.in_xi and canonical_key(rest) >= low:
                yield (rest,)
            return
        for q in xi_summands(rest):
            key = canonical_key(q)
            if key < low:
                continue
            for tail in rec(difference(rest, q), k - 1, key):
                yield (q,) + tail

    yield from rec(p, m, "")


_VERTEX_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def _hull(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for q in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    for q in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    return lower[:-1] + upper[:-1]


def from_vertices(verts) -> XiPolygon:
    hull = _hull(verts)
    xs = [x for x, _ in hull]
    ys = [y for _, y in hull]
    x0, y0 = min(xs), min(ys)
    hull = [(x - x0, y - y0) for x, y in hull]
    v = _fan_hull_lengths(hull)
    if min(v) < 0:
        raise ValueError(f"not in Xi: polygon {verts} has sides outside the fan")
    q = XiPolygon(v)
    if set(vertices(q)) != set(hull):
        raise ValueError(f"not in Xi: polygon {verts} has sides outside the fan")
    return q


def parse_polygon(text: str) -> XiPolygon:
    """Accepts ``P:3,0,3,0,3,0``, ``3,0,3,0,3,0`` or ``(0,0);(3,0);(0,3)``."""
    text = text.strip()
    if "(" in text:
        verts = [(int(x), int(y)) for x, y in _VERTEX_RE.findall(text)]
        if not verts:
            raise ValueError(f"cannot parse vertex list {text!r}")
        return classify(from_vertices(verts).lengths)
    if ":" in text:
        text = text.split(":", 1)[1]
    parts = [t for t in text.split(",") if t.strip()]
    if len(parts) != 6:
        raise ValueError(f"expected six side lengths, got {text!r}")
    return classify(int(t) for t in parts)


def iter_polygons(width: int, height: int) -> Iterator[XiPolygon]:
    """All closed 6-vectors whose bounding box fits ``width`` x ``height``."""
    for sw, s, e, ne in product(range(width + 1), range(width + 1), range(height + 1), range(height + 1)):
        if sw + s > width or e + ne > height:
            continue
        n = sw + s - ne
        w = e + ne - sw
        if n >= 0 and w >= 0:
            yield XiPolygon((w, sw, s, e, ne, n))
