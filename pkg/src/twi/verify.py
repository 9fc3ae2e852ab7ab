"""Verification suites shared by ``twi verify`` and the acceptance tests.

Each suite takes an engine and returns a :class:`SuiteResult`; a suite
never raises on a failed check, only on a conservation assertion, which
:func:`run_suites` records as a failure of that suite.
"""
from __future__ import annotations

import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Callable

from .genfunc import Truncation, check_exp_identity
from .invariants import ConservationError, InvariantEngine, MemoCache, r_count
from .polygons import POINT, Kind, canonical_key, iter_polygons, triangle, vsegment
from .sequences import Seq, add, iter_balanced_pairs, norm
from .surfaces import monotonicity_sweep, positivity_sweep, symmetry_report

CHC2_TABLE = (1, 1, 8, 240, 18264, 2845440)


@dataclass
class SuiteResult:
    name: str
    ok: bool
    summary: str
    details: list = field(default_factory=list)

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.summary}"


# -- reference initial values -------------------------------------------------

def reference_multi_initial(p, a: Seq, b: Seq, g: int) -> int:
    """Piecewise initial values of W on points and vertical segments."""
    if p.kind is Kind.POINT:
        return 1 if g == 1 else 0
    s = p.sigma_len
    return 1 if add(a, b) == Seq((s,)) and g == 1 - s else 0


def reference_irr_initial(p, a: Seq, b: Seq, g: int) -> int:
    s = p.sigma_len
    return 1 if g == 0 and s <= 1 and add(a, b) == Seq((s,)) else 0


def suite_initial(engine: InvariantEngine) -> SuiteResult:
    bad, checked = [], 0
    shapes = [POINT] + [vsegment(s) for s in range(1, 5)]
    for p in shapes:
        for a, b in iter_balanced_pairs(p.sigma_len):
            for g in range(-5, 4):
                for kind, ref, fn in (("multi", reference_multi_initial, engine.w_multi),
                                      ("irr", reference_irr_initial, engine.w_irr)):
                    checked += 1
                    want, got = ref(p, a, b, g), fn(p, a, b, g)
                    if want != got:
                        bad.append((kind, canonical_key(p), a.text(), b.text(), g, want, got))
    # zero extensions on nondegenerate polygons
    for p in iter_polygons(3, 3):
        if p.kind is not Kind.POLY or not p.in_xi:
            continue
        for a, b in iter_balanced_pairs(p.sigma_len):
            for g in range(-3, 2):
                if r_count(p, a, b, g) <= norm(a):
                    checked += 1
                    if engine.w_multi(p, a, b, g):
                        bad.append(("multi r<=|a|", canonical_key(p), a.text(), b.text(), g))
                if g < 0:
                    checked += 1
                    if engine.w_irr(p, a, b, g):
                        bad.append(("irr g<0", canonical_key(p), a.text(), b.text(), g))
    return SuiteResult("initial", not bad, f"{checked} cases, {len(bad)} mismatches", bad)


def chc2_values(engine: InvariantEngine, max_d: int = 6) -> list[int]:
    return [engine.w_irr(triangle(d), Seq(), Seq((d,)), 0) for d in range(1, max_d + 1)]


def suite_chc2(engine: InvariantEngine) -> SuiteResult:
    values = chc2_values(engine)
    ok = tuple(values) == CHC2_TABLE
    return SuiteResult("chc2", ok, "P2 d=1..6: " + ",".join(map(str, values)), [] if ok else values)


def suite_positivity(engine: InvariantEngine, box=(6, 6)) -> SuiteResult:
    rep = positivity_sweep(*box, engine)
    v = rep["violations"]
    return SuiteResult("positivity", not v and rep["checked"] > 0,
                       f"{rep['checked']} ample specs in {box[0]}x{box[1]}, {len(v)} violations", v)


def suite_monotonicity(engine: InvariantEngine, box=(5, 5)) -> SuiteResult:
    rep = monotonicity_sweep(*box, engine)
    v = rep["violations"]
    return SuiteResult("monotonicity", not v and rep["checked"] > 0,
                       f"{rep['polygons']} polygons, {rep['checked']} nested pairs, {len(v)} violations", v)


def suite_symmetry(engine: InvariantEngine) -> SuiteResult:
    rep = symmetry_report(4, 4, engine)
    v = rep["violations"]
    return SuiteResult("symmetry", not v and rep["checked"] > 0, f"{rep['checked']} checks, {len(v)} violations", v)


def suite_expid(engine: InvariantEngine, box=(3, 3), n_max: int = 8, shapes=("P2", "P1xP1")) -> SuiteResult:
    reports = [check_exp_identity(s, Truncation(box[0], box[1], n_max), engine) for s in shapes]
    mism = sum(len(r["mismatches"]) for r in reports)
    checked = sum(r["checked"] for r in reports)
    return SuiteResult("expid", mism == 0,
                       f"{'/'.join(shapes)} box {box[0]}x{box[1]} n_max {n_max}: {checked} keys, {mism} mismatches",
                       [m for r in reports for m in r["mismatches"]])


def suite_audit(engine: InvariantEngine) -> SuiteResult:
    """Conservation counters are live, and every cached value survives a cold recompute."""
    a = engine.audit
    live = a["balance_checks"] > 0 and a["conservation_checks"] > 0
    bad = engine.audit_cache()
    summary = (f"{a['balance_checks']} balance checks, {a['conservation_checks']} splitting checks, "
               f"{len(engine.cache)} cached values, {len(bad)} disagreements")
    return SuiteResult("audit", live and not bad, summary, bad)


def suite_determinism(engine: InvariantEngine | None = None) -> SuiteResult:
    """Cold vs warm evaluation of the P2 table, and a cache file round trip."""
    cold = InvariantEngine()
    t0 = time.perf_counter()
    first = chc2_values(cold)
    t_cold = time.perf_counter() - t0
    before = cold.cache.stats["hits"]
    warm = chc2_values(cold)
    warm_hits = cold.cache.stats["hits"] - before
    fd, path = tempfile.mkstemp(suffix=".twicache")
    os.close(fd)
    try:
        cold.save(path)
        reloaded = InvariantEngine(MemoCache())
        reloaded.load(path)
        again = chc2_values(reloaded)
        rt_hits = reloaded.cache.stats["hits"]
        rt_misses = reloaded.cache.stats["misses"]
    finally:
        os.unlink(path)
    ok = first == warm == again and tuple(first) == CHC2_TABLE and warm_hits > 0 and rt_hits > 0 and rt_misses == 0
    summary = (f"cold {t_cold:.2f}s, warm hits {warm_hits}, round trip hits {rt_hits} "
               f"misses {rt_misses}, values {'identical' if first == warm == again else 'differ'}")
    return SuiteResult("determinism", ok, summary, [] if ok else [first, warm, again])


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "initial": suite_initial,
    "chc2": suite_chc2,
    "positivity": suite_positivity,
    "monotonicity": suite_monotonicity,
    "symmetry": suite_symmetry,
    "expid": suite_expid,
    "audit": suite_audit,
    "determinism": suite_determinism,
}


def run_suites(names, engine: InvariantEngine, *, box=None, n_max=None) -> list[SuiteResult]:
    if "all" in names:
        names = list(SUITES)
    out = []
    for name in names:
        kwargs = {}
        if name == "expid":
            if box is not None:
                kwargs["box"] = box
            if n_max is not None:
                kwargs["n_max"] = n_max
        try:
            out.append(SUITES[name](engine, **kwargs))
        except ConservationError as exc:
            out.append(SuiteResult(name, False, f"conservation assertion fired: {exc}"))
    return out
