"""``twi`` command line: invariant queries, tables, verification and cache files."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import subprocess
import sys
import threading
from concurrent.futures import ThreadPoolExecutor

from .genfunc import Truncation, check_exp_identity
from .invariants import CacheFormatError, ConservationError, InvariantEngine, MemoCache
from .polygons import canonical_key, parse_polygon
from .sequences import jvalue, parse_seq
from .surfaces import SURFACES, DivisorSpec, ample_specs_in_box, parse_divisor_spec, polygon_of_divisor, welschinger
from .verify import SUITES, run_suites


class CliError(Exception):
    pass


# -- output ---------------------------------------------------------------------

def emit(rows: list[dict], fmt: str, text_key: str | None = None) -> str:
    """Render rows; every value is already a string so nothing passes through floats."""
    if fmt == "json":
        payload = rows[0] if len(rows) == 1 and text_key else rows
        return json.dumps(payload, ensure_ascii=False)
    if fmt == "csv":
        buf = io.StringIO()
        fields = list(rows[0]) if rows else ["value"]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue().rstrip("\n")
    if text_key is not None:
        return "\n".join(r[text_key] for r in rows)
    return "\n".join("  ".join(r.values()) for r in rows)


# -- engine and cache -----------------------------------------------------------

def cache_path(args) -> str | None:
    return os.environ.get("TWI_CACHE") or getattr(args, "cache", None)


def make_engine(args) -> InvariantEngine:
    shared = getattr(args, "threads", 1) > 1
    engine = InvariantEngine(MemoCache(shared=shared))
    path = cache_path(args)
    if path and os.path.exists(path) and os.path.getsize(path) > 0:
        engine.load(path)
    return engine


def store_cache(args, engine: InvariantEngine) -> None:
    path = cache_path(args)
    if path:
        engine.save(path)


# -- spec arguments -------------------------------------------------------------

def spec_from_args(args) -> DivisorSpec:
    if getattr(args, "spec", None):
        return parse_divisor_spec(args.spec)
    surface = args.surface
    if surface == "p2":
        return DivisorSpec("P2", d=args.d)
    if surface == "p1xp1":
        return DivisorSpec("P1xP1", d1=args.d1, d2=args.d2)
    if surface == "p2k":
        if args.k not in (1, 2, 3):
            raise CliError("p2k needs --k in 1..3")
        extra = {f"d{i}": getattr(args, f"d{i}") for i in range(1, args.k + 1)}
        return DivisorSpec(f"P2_{args.k}", d=args.d, **extra)
    raise CliError("give --surface or --spec")


def spec_row(spec: DivisorSpec, value: int) -> dict:
    p = polygon_of_divisor(spec)
    return {
        "surface": spec.surface,
        "divisor": spec.divisor_text(),
        "polygon": canonical_key(p),
        "sigma": str(p.sigma_len),
        "value": str(value),
    }


# -- commands -------------------------------------------------------------------

def cmd_compute(args) -> int:
    spec = spec_from_args(args)
    polygon_of_divisor(spec)  # validate before touching the cache
    engine = make_engine(args)
    row = spec_row(spec, welschinger(spec, engine))
    print(emit([row], args.format, "value"))
    store_cache(args, engine)
    return 0


def cmd_relative(args) -> int:
    p = parse_polygon(args.polygon)
    a, b = parse_seq(args.alpha), parse_seq(args.beta)
    if jvalue(a) + jvalue(b) != p.sigma_len:
        raise CliError(f"Jα+Jβ ≠ |σ|: J{a} + J{b} = {jvalue(a) + jvalue(b)}, |σ| = {p.sigma_len}")
    engine = make_engine(args)
    fn = engine.w_irr if args.irreducible else engine.w_multi
    value = fn(p, a, b, args.genus)
    row = {
        "polygon": canonical_key(p),
        "alpha": a.text(),
        "beta": b.text(),
        "genus": str(args.genus),
        "kind": "irr" if args.irreducible else "multi",
        "value": str(value),
    }
    print(emit([row], args.format, "value"))
    store_cache(args, engine)
    return 0


def table_specs(args) -> list[DivisorSpec]:
    if args.surface == "p2":
        return [DivisorSpec("P2", d=d) for d in range(1, args.max_d + 1)]
    if args.surface == "p1xp1":
        m = args.max
        return [DivisorSpec("P1xP1", d1=a, d2=b) for a in range(1, m + 1) for b in range(1, m + 1)]
    k = args.k
    if k not in (1, 2, 3):
        raise CliError("p2k needs --k in 1..3")
    box = 2 * args.max_d
    specs = [s for s in ample_specs_in_box(box, box) if s.surface == f"P2_{k}" and s.d <= args.max_d]
    return sorted(specs, key=lambda s: (s.d, s.d1, s.d2, s.d3))


def cmd_table(args) -> int:
    specs = table_specs(args)
    engine = make_engine(args)
    if args.threads > 1 and len(specs) > 1:
        # deep recursion needs more stack than the thread default
        threading.stack_size(256 * 1024 * 1024)
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            values = list(pool.map(lambda s: welschinger(s, engine), specs))
    else:
        values = [welschinger(s, engine) for s in specs]
    rows = []
    for spec, value in zip(specs, values):
        row = {"d": str(spec.d)} if spec.surface != "P1xP1" else {"d1": str(spec.d1), "d2": str(spec.d2)}
        if spec.surface.startswith("P2_"):
            row.update({f"d{i}": str(getattr(spec, f"d{i}")) for i in range(1, int(spec.surface[-1]) + 1)})
        row["divisor"] = spec.divisor_text()
        row["value"] = str(value)
        rows.append(row)
    fmt = args.format if args.format != "text" else "csv"
    if rows or fmt != "csv":
        print(emit(rows, fmt))
    store_cache(args, engine)
    return 0


def parse_box(text: str) -> tuple[int, int]:
    try:
        w, h = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"box must look like 3x3, got {text!r}") from None
    if w < 0 or h < 0:
        raise argparse.ArgumentTypeError("box sides must be nonnegative")
    return w, h


def cmd_verify(args) -> int:
    engine = make_engine(args)
    if len(engine.cache):
        bad = engine.audit_cache()
        if bad:
            key, stored, fresh = bad[0]
            raise CliError(f"cache value disagrees with recomputation: {key} stored {stored}, recomputed {fresh} "
                           f"({len(bad)} bad entries)")
    results = run_suites(args.suite, engine, box=args.box, n_max=args.nmax)
    if args.format == "json":
        print(json.dumps([{"suite": r.name, "ok": r.ok, "summary": r.summary} for r in results]))
    else:
        for r in results:
            print(r.line())
    return 0 if all(r.ok for r in results) else 1


def cmd_genfunc_check(args) -> int:
    engine = make_engine(args)
    report = check_exp_identity(args.shape, Truncation(args.box[0], args.box[1], args.nmax), engine)
    if args.format == "json":
        print(json.dumps(report))
    else:
        print(f"{report['shape']} box {report['box']} n_max {report['n_max']}: "
              f"{report['checked']} keys, {len(report['mismatches'])} mismatches")
        for m in report["mismatches"]:
            print(f"  {m['key']}: Z {m['lhs']} exp {m['rhs']}")
    return 0 if not report["mismatches"] else 1


def cmd_cache(args) -> int:
    path = args.path
    spec = parse_divisor_spec(args.spec)
    if args.action == "save":
        engine = InvariantEngine()
        value = welschinger(spec, engine)
        n = engine.save(path)
        print(f"saved {n} entries to {path}; {spec.text()} = {value}")
        return 0
    if args.action == "load":
        engine = InvariantEngine()
        n = engine.load(path)
        print(f"loaded {n} entries from {path}")
        return 0
    if args.action == "warm":
        engine = InvariantEngine()
        engine.load(path)
        value = welschinger(spec, engine)
        st = engine.cache.stats
        print(json.dumps({"value": str(value), "hits": st["hits"], "misses": st["misses"]}))
        return 0
    # roundtrip: compute, save, reload in a fresh interpreter
    engine = InvariantEngine()
    value = welschinger(spec, engine)
    engine.save(path)
    proc = subprocess.run(
        [sys.executable, "-m", "twi.cli", "cache", "warm", path, "--spec", spec.text()],
        capture_output=True, text=True, check=False,
    )
    if proc.returncode != 0:
        raise CliError(f"fresh process failed: {proc.stderr.strip()}")
    warm = json.loads(proc.stdout)
    ok = warm["value"] == str(value) and warm["hits"] > 0 and warm["misses"] == 0
    print(f"cold {value} warm {warm['value']} hits {warm['hits']} misses {warm['misses']}: {'ok' if ok else 'FAILED'}")
    return 0 if ok else 1


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--cache", help="memo cache file (TWI_CACHE overrides)")
    common.add_argument("--threads", type=int, default=1)

    def spec_args(p):
        p.add_argument("--spec", help="p2:d=5, p1xp1:2,3 or p2k:k=3,d=4,d1=1,d2=1,d3=1")
        p.add_argument("--surface", choices=("p2", "p1xp1", "p2k"))
        p.add_argument("--k", type=int, default=0)
        for name in ("d", "d1", "d2", "d3"):
            p.add_argument(f"--{name}", type=int, default=0)

    parser = argparse.ArgumentParser(prog="twi", description="Relative tropical Welschinger invariants.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="W(Sigma, D) of a surface and divisor")
    spec_args(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("relative", parents=[common], help="one relative invariant")
    p.add_argument("--polygon", required=True, help="six side lengths W,SW,S,E,NE,N or a P:/vs:/pt: key")
    p.add_argument("--alpha", default="0")
    p.add_argument("--beta", default="0")
    p.add_argument("--genus", type=int, default=0)
    p.add_argument("--irreducible", action="store_true")
    p.set_defaults(func=cmd_relative)

    p = sub.add_parser("table", parents=[common], help="table of W(Sigma, D) over a range")
    p.add_argument("--surface", choices=("p2", "p1xp1", "p2k"), required=True)
    p.add_argument("--max-d", type=int, default=0)
    p.add_argument("--max", type=int, default=0)
    p.add_argument("--k", type=int, default=0)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES) + ["all"])
    p.add_argument("--box", type=parse_box, default=None, help="expid truncation box, e.g. 3x3")
    p.add_argument("--nmax", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("genfunc-check", parents=[common], help="compare Z with exp(Z_irr)")
    p.add_argument("--shape", choices=SURFACES, default="P2")
    p.add_argument("--box", type=parse_box, default=(3, 3))
    p.add_argument("--nmax", type=int, default=8)
    p.set_defaults(func=cmd_genfunc_check)

    p = sub.add_parser("cache", parents=[common], help="save, load or round-trip a cache file")
    p.add_argument("action", choices=("save", "load", "roundtrip", "warm"))
    p.add_argument("path")
    p.add_argument("--spec", default="p2:d=5")
    p.set_defaults(func=cmd_cache)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    if args.command == "verify" and not args.suite:
        args.suite = ["all"]
    try:
        return args.func(args)
    except (CliError, CacheFormatError, ValueError, ConservationError) as exc:
        print(f"twi {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
