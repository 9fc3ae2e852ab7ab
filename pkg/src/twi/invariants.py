"""Memoized recursions for multi-component and irreducible relative invariants.

``W(D, a, b, g)`` counts (with Welschinger signs) possibly reducible real
tropical curves with Newton polygon ``D``, left ends prescribed by ``a``
(fixed positions) and ``b`` (free), of genus ``g``; ``W_irr`` counts the
irreducible ones.  Both are computed from their initial values on points and
vertical segments by a Caporaso-Harris type recursion that peels the left
column of ``D``.

Genus convention for reducible curves: a union of ``m`` components of genera
``g_i`` has genus ``sum(g_i) - (m - 1)``.  The empty curve (``m = 0``, Newton
polygon a point) therefore has genus 1.
"""
from __future__ import annotations

import json
import sys
import threading
from collections import Counter
from dataclasses import dataclass
from math import factorial
from typing import Iterator

from .polygons import (
    Kind,
    PeelLine,
    XiPolygon,
    admissible_sets,
    canonical_key,
    difference,
    interior_count,
    parse_polygon,
    xi_summands,
)
from .sequences import (
    ZERO,
    Seq,
    add,
    binom_seq,
    jvalue,
    multinomial_seq,
    norm,
    parse_seq,
    sequences_with_j,
    sub,
    subsequences,
    theta,
)

CACHE_FORMAT = "twi-cache"
CACHE_VERSION = 1
MULTI, IRR = "multi", "irr"


class ConservationError(AssertionError):
    """An internal bookkeeping identity of the recursion failed."""


class CacheFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RelInvKey:
    polygon: XiPolygon
    alpha: Seq
    beta: Seq
    genus: int
    kind: str = MULTI

    def __post_init__(self):
        if self.kind not in (MULTI, IRR):
            raise ValueError(f"unknown invariant kind {self.kind!r}")
        if not self.polygon.in_xi:
            raise ValueError(f"polygon {canonical_key(self.polygon)} is not in Xi")
        if jvalue(self.alpha) + jvalue(self.beta) != self.polygon.sigma_len:
            raise ValueError(
                f"unbalanced key: J{self.alpha} + J{self.beta} = "
                f"{jvalue(self.alpha) + jvalue(self.beta)} != |sigma| = {self.polygon.sigma_len}"
            )

    def text(self) -> str:
        return "|".join(
            (self.kind, canonical_key(self.polygon), self.alpha.text(), self.beta.text(), str(self.genus))
        )

    @classmethod
    def from_text(cls, text: str) -> "RelInvKey":
        kind, poly, alpha, beta, genus = text.split("|")
        return cls(parse_polygon(poly), parse_seq(alpha), parse_seq(beta), int(genus), kind)


@dataclass(frozen=True)
class SecondSumTerm:
    daleth: tuple[PeelLine, ...]
    peeled: XiPolygon
    alpha_p: Seq
    beta_p: Seq
    genus_p: int
    coeff: int


@dataclass(frozen=True)
class SplitTerm:
    polygon_i: XiPolygon
    alpha_i: Seq
    beta_i: Seq
    genus_i: int
    beta_tilde_i: Seq
    n_i: int

    def order_key(self):
        return (self.polygon_i.lengths, self.alpha_i, self.beta_i, self.genus_i, self.beta_tilde_i)


def r_count(polygon: XiPolygon, alpha: Seq, beta: Seq, genus: int) -> int:
    return polygon.boundary_len - polygon.sigma_len + norm(alpha) + norm(beta) + genus - 1


def n_count(polygon: XiPolygon, beta: Seq, genus: int) -> int:
    """Number of points off the left line needed by an irreducible part."""
    return polygon.boundary_len - polygon.sigma_len + norm(beta) + genus - 1


class MemoCache:
    """Key -> value store with hit/miss counters.

    ``shared=True`` guards writes with a lock so that several threads may
    evaluate keys concurrently; two threads deriving the same key both
    produce the same value and the last write wins.
    """

    def __init__(self, shared: bool = False):
        self.entries: dict[tuple, int] = {}
        self.stats = Counter()
        self.shared = shared
        self._lock = threading.Lock() if shared else None

    def get(self, key):
        value = self.entries.get(key)
        self.stats["hits" if value is not None else "misses"] += 1
        return value

    def put(self, key, value: int) -> None:
        if self._lock is None:
            self.entries[key] = value
        else:
            with self._lock:
                self.entries[key] = value

    def __len__(self) -> int:
        return len(self.entries)

    def save(self, path) -> int:
        lines = [json.dumps({"format": CACHE_FORMAT, "version": CACHE_VERSION})]
        records = sorted((_key_text(k), v) for k, v in self.entries.items())
        for key, value in records:
            lines.append(json.dumps({"key": key, "value": str(value)}))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        return len(records)

    def load(self, path) -> int:
        """Merge the records of a cache file; refuses malformed or foreign files."""
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines or not lines[0].strip():
            raise CacheFormatError(f"{path}: missing header")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError:
            raise CacheFormatError(f"{path}: missing header") from None
        if not isinstance(header, dict) or "version" not in header:
            raise CacheFormatError(f"{path}: missing header")
        if header["version"] != CACHE_VERSION:
            raise CacheFormatError(f"{path}: unsupported cache version {header['version']!r}")
        if header.get("format", CACHE_FORMAT) != CACHE_FORMAT:
            raise CacheFormatError(f"{path}: missing header (format {header['format']!r})")
        loaded = {}
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                key = RelInvKey.from_text(rec["key"])
                value = int(rec["value"])
            except (ValueError, KeyError, TypeError) as exc:
                raise CacheFormatError(f"{path}:{lineno}: malformed record ({exc})") from None
            loaded[_raw_key(key)] = value
        self.entries.update(loaded)
        return len(loaded)


def _raw_key(key: RelInvKey) -> tuple:
    return (key.kind, key.polygon.lengths, key.alpha, key.beta, key.genus)


def _key_text(raw: tuple) -> str:
    kind, lengths, alpha, beta, genus = raw
    return "|".join((kind, canonical_key(XiPolygon(lengths)), alpha.text(), beta.text(), str(genus)))


class InvariantEngine:
    """Evaluates ``W`` and ``W_irr`` with a shared memo cache.

    ``point_genus`` is the genus at which the point initial value of ``W``
    equals 1.  The default 1 is the genus of the empty curve; it is a
    parameter only so that tests can show what the alternative does.
    ``debug`` turns on the check that ``W`` vanishes above the interior
    point count.
    """

    def __init__(self, cache: MemoCache | None = None, *, shared: bool = False, debug: bool = False,
                 point_genus: int = 1):
        self.cache = cache if cache is not None else MemoCache(shared=shared)
        self.debug = debug
        self.point_genus = point_genus
        self.audit = Counter()
        if sys.getrecursionlimit() < 20000:
            sys.setrecursionlimit(20000)

    # -- public API -----------------------------------------------------

    def value(self, key: RelInvKey) -> int:
        if key.kind == MULTI:
            return self.w_multi(key.polygon, key.alpha, key.beta, key.genus)
        return self.w_irr(key.polygon, key.alpha, key.beta, key.genus)

    def w_multi(self, polygon: XiPolygon, alpha: Seq, beta: Seq, genus: int) -> int:
        RelInvKey(polygon, alpha, beta, genus, MULTI)
        return self._multi(polygon, alpha, beta, genus)

    def w_irr(self, polygon: XiPolygon, alpha: Seq, beta: Seq, genus: int) -> int:
        RelInvKey(polygon, alpha, beta, genus, IRR)
        return self._irr(polygon, alpha, beta, genus)

    def second_sum_terms(self, key: RelInvKey) -> Iterator[SecondSumTerm]:
        """Peeled keys (with binomial weights) of the second sum of the recursion."""
        p = key.polygon
        if p.kind is not Kind.POLY:
            raise ValueError("second sum is defined for nondegenerate polygons only")
        a, b, g = key.alpha, key.beta, key.genus
        jb = jvalue(b)
        for daleth, q in admissible_sets(p):
            sigma = q.sigma_len
            for ap in subsequences(a, sigma):
                for delta in sequences_with_j(sigma - jvalue(ap) - jb):
                    if key.kind == MULTI and ap == a and not delta:
                        continue
                    bp = add(b, delta)
                    yield SecondSumTerm(daleth, q, ap, bp, g + 1 - norm(delta),
                                        binom_seq(a, ap) * binom_seq(bp, b))

    def irr_splittings(self, target: tuple[XiPolygon, Seq, Seq, int], beta_floor: Seq) -> Iterator[list[SplitTerm]]:
        """Unordered splittings of ``target`` into irreducible parts.

        The parts sum to ``target`` under (Minkowski, +, +, g + g~ - 1); the
        extra ends ``beta_tilde_i`` (each nonempty, ``<= beta_i``) sum to
        ``target.beta - beta_floor``.  Parts whose irreducible invariant is
        zero for structural reasons are skipped.  Each multiset of parts is
        produced once, sorted by :meth:`SplitTerm.order_key`.
        """
        poly, ap, bp, gp = target
        delta = sub(bp, beta_floor)
        if poly.kind is Kind.POINT:
            if not ap and not bp and gp == 1:
                yield []
            return
        if not delta:
            return
        budget = gp - 1 + norm(delta)
        if budget < 0:
            return
        yield from self._split_rec(poly, ap, beta_floor, delta, budget, None)

    # -- recursion ------------------------------------------------------

    def _multi(self, p: XiPolygon, a: Seq, b: Seq, g: int) -> int:
        key = (MULTI, p.lengths, a, b, g)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        self._check_balance(p, a, b)
        kind = p.kind
        if kind is Kind.POINT:
            value = 1 if g == self.point_genus else 0
        elif kind is Kind.VSEGMENT:
            s = p.sigma_len
            value = 1 if add(a, b) == Seq((s,)) and g == 1 - s else 0
        elif r_count(p, a, b, g) <= norm(a):
            value = 0
        else:
            value = 0
            for k, bk in enumerate(b, start=1):
                if bk:
                    value += self._multi(p, add(a, theta(k)), sub(b, theta(k)), g)
            jb = jvalue(b)
            for _, q in admissible_sets(p):
                sigma = q.sigma_len
                for ap in subsequences(a, sigma):
                    ca = binom_seq(a, ap)
                    for delta in sequences_with_j(sigma - jvalue(ap) - jb):
                        if ap == a and not delta:
                            continue
                        bp = add(b, delta)
                        w = self._multi(q, ap, bp, g + 1 - norm(delta))
                        if w:
                            value += ca * binom_seq(bp, b) * w
        if self.debug and kind is Kind.POLY and g > interior_count(p) and value:
            raise ConservationError(f"W{key} = {value} above the interior point count")
        self.cache.put(key, value)
        return value

    def _irr(self, p: XiPolygon, a: Seq, b: Seq, g: int) -> int:
        key = (IRR, p.lengths, a, b, g)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        self._check_balance(p, a, b)
        kind = p.kind
        if g < 0:
            value = 0
        elif kind is not Kind.POLY:
            s = p.sigma_len
            value = 1 if g == 0 and s <= 1 and add(a, b) == Seq((s,)) else 0
        else:
            value = 0
            for k, bk in enumerate(b, start=1):
                if bk:
                    value += self._irr(p, add(a, theta(k)), sub(b, theta(k)), g)
            n = n_count(p, b, g) - 1
            nfact = factorial(n)
            jb = jvalue(b)
            for _, q in admissible_sets(p):
                self._check_peel(p, q)
                sigma = q.sigma_len
                for ap in subsequences(a, sigma):
                    for delta in sequences_with_j(sigma - jvalue(ap) - jb):
                        bp = add(b, delta)
                        target = (q, ap, bp, g + 1 - norm(delta))
                        for parts in self.irr_splittings(target, b):
                            value += self._splitting_weight(a, n, nfact, parts)
        self.cache.put(key, value)
        return value

    def _splitting_weight(self, a: Seq, n: int, nfact: int, parts: list[SplitTerm]) -> int:
        self.audit["conservation_checks"] += 1
        if sum(t.n_i for t in parts) != n:
            raise ConservationError(f"point count {sum(t.n_i for t in parts)} != {n} in {parts}")
        num = multinomial_seq(a, [t.alpha_i for t in parts]) * nfact
        den = 1
        for t in parts:
            den *= factorial(t.n_i)
            num *= binom_seq(t.beta_i, t.beta_tilde_i) * self._irr(t.polygon_i, t.alpha_i, t.beta_i, t.genus_i)
        # identical parts are one unordered configuration: divide by their permutations
        run = 1
        for prev, cur in zip(parts, parts[1:]):
            run = run + 1 if cur == prev else 1
            den *= run
        q, rem = divmod(num, den)
        if rem:
            raise ConservationError(f"non-integral splitting weight {num}/{den}")
        return q

    def _split_rec(self, rest: XiPolygon, a_rest: Seq, bf_rest: Seq, d_rest: Seq, budget: int,
                   last: SplitTerm | None) -> Iterator[list[SplitTerm]]:
        if rest.kind is Kind.POINT:
            if not a_rest and not bf_rest and not d_rest and budget == 0:
                yield []
            return
        if not d_rest:
            return
        low = last.polygon_i.lengths if last is not None else None
        for u in xi_summands(rest):
            if u.kind is Kind.POINT or (low is not None and u.lengths < low):
                continue
            s = u.sigma_len
            if u.kind is Kind.VSEGMENT and s != 1:
                continue
            u_rest = difference(rest, u)
            for ai in subsequences(a_rest, s):
                ja = jvalue(ai)
                for bt in subsequences(d_rest, s - ja):
                    nbt = norm(bt)
                    if not nbt:
                        continue
                    for bx in sequences_with_j(s - ja - jvalue(bt), bf_rest):
                        bi = add(bt, bx)
                        if u.kind is Kind.VSEGMENT:
                            genera = (0,)
                        else:
                            genera = range(budget - (nbt - 1) + 1)
                        for gi in genera:
                            term = SplitTerm(u, ai, bi, gi, bt, n_count(u, bi, gi))
                            if last is not None and term.order_key() < last.order_key():
                                continue
                            if not self._irr(u, ai, bi, gi):
                                continue
                            for tail in self._split_rec(u_rest, sub(a_rest, ai), sub(bf_rest, bx),
                                                        sub(d_rest, bt), budget - gi - nbt + 1, term):
                                yield [term] + tail

    def _check_balance(self, p: XiPolygon, a: Seq, b: Seq) -> None:
        self.audit["balance_checks"] += 1
        if jvalue(a) + jvalue(b) != p.sigma_len:
            raise ConservationError(f"unbalanced recursive call at {canonical_key(p)}, {a}, {b}")

    def _check_peel(self, p: XiPolygon, q: XiPolygon) -> None:
        if q.boundary_len - q.sigma_len != p.boundary_len - p.sigma_len - 2:
            raise ConservationError(f"peel {canonical_key(p)} -> {canonical_key(q)} breaks point count")

    # -- persistence ----------------------------------------------------

    def save(self, path) -> int:
        return self.cache.save(path)

    def load(self, path) -> int:
        return self.cache.load(path)

    def audit_cache(self) -> list[tuple[str, int, int]]:
        """Recompute every cached entry with a cold engine; returns disagreements."""
        fresh = InvariantEngine(point_genus=self.point_genus)
        bad = []
        for raw, value in sorted(self.cache.entries.items(), key=lambda kv: _key_text(kv[0])):
            kind, lengths, alpha, beta, genus = raw
            poly = XiPolygon(lengths)
            recomputed = (fresh._multi if kind == MULTI else fresh._irr)(poly, alpha, beta, genus)
            if recomputed != value:
                bad.append((_key_text(raw), value, recomputed))
        return bad


_default_engine: InvariantEngine | None = None


def default_engine() -> InvariantEngine:
    global _default_engine
    if _default_engine is None:
        _default_engine = InvariantEngine()
    return _default_engine


def w_multi(polygon: XiPolygon, alpha: Seq = ZERO, beta: Seq = ZERO, genus: int = 0) -> int:
    return default_engine().w_multi(polygon, alpha, beta, genus)


def w_irr(polygon: XiPolygon, alpha: Seq = ZERO, beta: Seq = ZERO, genus: int = 0) -> int:
    return default_engine().w_irr(polygon, alpha, beta, genus)
