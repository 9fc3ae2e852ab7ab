"""Finitely supported sequences of nonnegative integers.

A :class:`Seq` stores its terms 1-based in meaning (``a[0]`` is the
coefficient of weight ``2*1 - 1``) with trailing zeros trimmed, so equal
sequences are equal tuples and hash alike.  The zero sequence is the
empty tuple and prints as ``(0)``.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import comb, factorial
from typing import Iterable, Iterator, Sequence


class Seq(tuple):
    """Canonical nonnegative integer sequence (trailing zeros trimmed)."""

    __slots__ = ()

    def __new__(cls, terms: Iterable[int] = ()):
        terms = list(terms)
        for t in terms:
            if not isinstance(t, int) or t < 0:
                raise ValueError(f"sequence terms must be nonnegative integers, got {t!r}")
        while terms and terms[-1] == 0:
            terms.pop()
        return super().__new__(cls, terms)

    def __repr__(self) -> str:
        return f"Seq({self.text()})"

    def __str__(self) -> str:
        return "(" + (",".join(map(str, self)) if self else "0") + ")"

    def text(self) -> str:
        """Comma-separated form used on the command line and in cache files."""
        return ",".join(map(str, self)) if self else "0"

    def term(self, i: int) -> int:
        """The ``i``-th term, 1-based."""
        return self[i - 1] if 1 <= i <= len(self) else 0


ZERO = Seq()


def parse_seq(text: str) -> Seq:
    text = text.strip().strip("()")
    if not text:
        return ZERO
    try:
        return Seq(int(t) for t in text.split(","))
    except ValueError as exc:
        raise ValueError(f"cannot parse sequence {text!r}: {exc}") from None


def theta(k: int) -> Seq:
    """The sequence whose ``k``-th term is 1 and all others 0."""
    if k < 1:
        raise ValueError("theta index is 1-based")
    return Seq([0] * (k - 1) + [1])


def norm(a: Seq) -> int:
    return sum(a)


@lru_cache(maxsize=None)
def jvalue(a: Seq) -> int:
    return sum((2 * i + 1) * t for i, t in enumerate(a))


@lru_cache(maxsize=None)
def add(a: Seq, b: Seq) -> Seq:
    if len(a) < len(b):
        a, b = b, a
    return Seq([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])


def leq(a: Seq, b: Seq) -> bool:
    """True iff ``a <= b`` termwise."""
    if len(a) > len(b):
        return False
    return all(x <= b[i] for i, x in enumerate(a))


@lru_cache(maxsize=None)
def sub(a: Seq, b: Seq) -> Seq:
    if not leq(b, a):
        raise ValueError(f"not comparable: {b} is not termwise <= {a}")
    return Seq([x - (b[i] if i < len(b) else 0) for i, x in enumerate(a)])


def combine(a: Seq, b: Seq, mode: str):
    """Termwise ``add``, ``sub`` or the order test ``leq`` (is ``b <= a``)."""
    if mode == "add":
        return add(a, b)
    if mode == "sub":
        return sub(a, b)
    if mode == "leq":
        return leq(b, a)
    raise ValueError(f"unknown mode {mode!r}")


def binom_seq(upper: Seq, lower: Seq) -> int:
    """Product of termwise binomial coefficients."""
    if not leq(lower, upper):
        raise ValueError(f"not comparable: {lower} is not termwise <= {upper}")
    out = 1
    for i, x in enumerate(lower):
        out *= comb(upper[i], x)
    return out


def multinomial_seq(upper: Seq, parts: Sequence[Seq]) -> int:
    """Termwise multinomial, the leftover ``upper - sum(parts)`` is the last block."""
    total = ZERO
    for p in parts:
        total = add(total, p)
    if not leq(total, upper):
        raise ValueError(f"parts sum {total} exceeds {upper}")
    out = 1
    for i, u in enumerate(upper):
        num = factorial(u)
        den = factorial(u - (total[i] if i < len(total) else 0))
        for p in parts:
            if i < len(p):
                den *= factorial(p[i])
        out *= num // den
    return out


def factorial_seq(a: Seq) -> int:
    out = 1
    for t in a:
        out *= factorial(t)
    return out


@lru_cache(maxsize=None)
def subsequences(upper: Seq, jmax: int | None = None) -> tuple[Seq, ...]:
    """All ``s <= upper`` with ``jvalue(s) <= jmax`` (no bound when ``jmax`` is None)."""
    ranges = [range(t + 1) for t in upper]
    out = []
    for terms in product(*ranges):
        s = Seq(terms)
        if jmax is None or jvalue(s) <= jmax:
            out.append(s)
    return tuple(out)


@lru_cache(maxsize=None)
def sequences_with_j(j: int, upper: Seq | None = None) -> tuple[Seq, ...]:
    """All sequences ``s`` with ``jvalue(s) == j`` (and ``s <= upper`` if given)."""
    if j < 0:
        return ()
    top = (j + 1) // 2
    out: list[Seq] = []

    def bound(i: int) -> int:
        if upper is None:
            return j
        return upper[i - 1] if i <= len(upper) else 0

    def rec(i: int, rest: int, acc: list[int]) -> None:
        if i == 1:
            if rest <= bound(1):
                out.append(Seq([rest] + acc))
            return
        w = 2 * i - 1
        for c in range(min(bound(i), rest // w) + 1):
            rec(i - 1, rest - c * w, [c] + acc)

    if top == 0:
        return (ZERO,)
    rec(top, j, [])
    return tuple(sorted(out))


def iter_balanced_pairs(total: int) -> Iterator[tuple[Seq, Seq]]:
    """All ``(alpha, beta)`` with ``jvalue(alpha) + jvalue(beta) == total``."""
    for ja in range(total + 1):
        for a in sequences_with_j(ja):
            for b in sequences_with_j(total - ja):
                yield a, b
