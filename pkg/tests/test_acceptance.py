"""Acceptance criteria 1-9, one test each.

Every test prints a ``PASS``/``FAIL`` line for its criterion (visible under
``pytest -v`` and when the file is run as a script).
"""
from __future__ import annotations

import json
import subprocess
import sys
import time

import pytest

from twi.invariants import ConservationError, InvariantEngine
from twi.polygons import triangle
from twi.sequences import ZERO, Seq
from twi.verify import (
    CHC2_TABLE,
    chc2_values,
    suite_determinism,
    suite_expid,
    suite_initial,
    suite_monotonicity,
    suite_positivity,
    suite_symmetry,
)

from oracles import conic_solution_dim, count_line_pairs, generic_points

LINES: dict[int, str] = {}


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, text: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {text}"
        LINES[number] = line
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


class Runs:
    """Runs each criterion's computation once; criterion 8 inspects the engines."""

    def __init__(self):
        self.cold = InvariantEngine()
        self.shared = InvariantEngine()
        self.results = {}
        self.errors = []

    def get(self, number: int):
        if number not in self.results:
            try:
                self.results[number] = COMPUTE[number](self)
            except ConservationError as exc:
                self.errors.append((number, str(exc)))
                raise
        return self.results[number]


def compute_1(runs):
    t0 = time.perf_counter()
    values = chc2_values(runs.cold)
    return values, time.perf_counter() - t0


def compute_3(runs):
    e = runs.shared
    oracle = [count_line_pairs(generic_points(4, seed)) for seed in range(10)]
    conics = [conic_solution_dim(generic_points(5, seed)) for seed in range(10)]
    return e.w_multi(triangle(2), ZERO, Seq((2,)), -1), e.w_irr(triangle(2), ZERO, Seq((2,)), 0), oracle, conics


COMPUTE = {
    1: compute_1,
    2: lambda r: suite_initial(r.shared),
    3: compute_3,
    4: lambda r: suite_positivity(r.shared, (6, 6)),
    5: lambda r: suite_monotonicity(r.shared, (5, 5)),
    6: lambda r: suite_symmetry(r.shared),
    7: lambda r: suite_expid(r.shared, (3, 3), 8, ("P2", "P1xP1")),
}


@pytest.fixture(scope="module")
def runs():
    return Runs()


def test_criterion_1_p2_golden_table(runs, report):
    values, seconds = runs.get(1)
    ok = tuple(values) == CHC2_TABLE and seconds < 60
    report(1, ok, f"W(P2, dL) d=1..6 = {','.join(map(str, values))} (cold, {seconds:.2f}s)")


def test_criterion_2_initial_values(runs, report):
    res = runs.get(2)
    report(2, res.ok, res.summary)


def test_criterion_3_derived_oracles(runs, report):
    pairs, conic, oracle, conics = runs.get(3)
    ok = pairs == 3 and conic == 1 and set(oracle) == {3} and set(conics) == {1}
    report(3, ok, f"W(T2,(0),(2),-1)={pairs} vs line-pair oracle {sorted(set(oracle))}; "
                  f"W_irr(T2,(0),(2),0)={conic} vs conic space dim {sorted(set(conics))}")


def test_criterion_4_positivity(runs, report):
    res = runs.get(4)
    report(4, res.ok, res.summary)


def test_criterion_5_monotonicity(runs, report):
    res = runs.get(5)
    report(5, res.ok, res.summary)


def test_criterion_6_symmetry(runs, report):
    res = runs.get(6)
    report(6, res.ok, res.summary)


def test_criterion_7_exp_identity(runs, report):
    res = runs.get(7)
    report(7, res.ok, res.summary)


def test_criterion_8_conservation_audit(runs, report):
    for n in range(1, 8):
        try:
            runs.get(n)
        except ConservationError:
            pass
    fired = runs.errors
    counts = {k: runs.cold.audit[k] + runs.shared.audit[k] for k in ("balance_checks", "conservation_checks")}
    ok = not fired and all(counts.values())
    report(8, ok, f"{counts['balance_checks']} balance checks and {counts['conservation_checks']} "
                  f"splitting point-count checks, {len(fired)} fired")


def test_criterion_9_determinism_and_persistence(runs, report, tmp_path):
    res = suite_determinism()
    values, _ = runs.get(1)
    warm = chc2_values(runs.cold)
    path = tmp_path / "cache.jsonl"
    proc = subprocess.run([sys.executable, "-m", "twi.cli", "cache", "roundtrip", str(path), "--spec", "p2:d=6"],
                          capture_output=True, text=True)
    ok = res.ok and warm == values and proc.returncode == 0 and "2845440 warm 2845440" in proc.stdout
    report(9, ok, f"{res.summary}; fresh process: {proc.stdout.strip() or proc.stderr.strip()}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
