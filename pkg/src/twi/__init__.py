"""Relative tropical Welschinger invariants of toric Del Pezzo surfaces."""
from __future__ import annotations

from .invariants import InvariantEngine, MemoCache, RelInvKey, w_irr, w_multi
from .polygons import XiPolygon, parse_polygon, rectangle, triangle, vsegment
from .sequences import Seq, parse_seq
from .surfaces import DivisorSpec, parse_divisor_spec, welschinger

__all__ = [
    "DivisorSpec",
    "InvariantEngine",
    "MemoCache",
    "RelInvKey",
    "Seq",
    "XiPolygon",
    "parse_divisor_spec",
    "parse_polygon",
    "parse_seq",
    "rectangle",
    "triangle",
    "vsegment",
    "w_irr",
    "w_multi",
    "welschinger",
]
