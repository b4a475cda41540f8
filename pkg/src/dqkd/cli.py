"""Command-line front end.

Exit codes: 0 success, 1 verification or statistical failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict

from .galois import FieldSpec, factor_prime_power, is_prime, make_field
from .montecarlo import (qdc_curve, scan_dimensions, scan_to_csv,
                         scan_to_json, simulate_records, summarize)
from .mub import build_mub, verify_mub
from .pauli import verify_appendix
from .protocol import STRATEGIES, ProtocolConfig, RunRecord, normalize_strategy, write_transcript

MAX_VERIFY_D = 64
MAX_SIM_D = 32
DEFAULT_SCAN_DIMS = "2,3,4,5,7,8,9,11,13,16,17,19,23,25,27,29,31,32"


class UsageError(Exception):
    pass


def resolve_field(d=None, p=None, m=None, limit=None) -> FieldSpec:
    """Field from either --d or --p/--m; rejects anything but a prime power."""
    if d is not None and p is not None:
        raise UsageError("give either --d or --p/--m, not both")
    if d is None:
        if p is None:
            raise UsageError("a dimension is required (--d or --p/--m)")
        m = 1 if m is None else m
        if m < 1:
            raise UsageError(f"bad degree m={m}")
        if not is_prime(p):
            try:
                factor_prime_power(p ** m)
            except ValueError:
                raise UsageError(f"{p}**{m} = {p ** m} is not a prime power") from None
            raise UsageError(f"p={p} is not prime; use --d {p ** m}")
        d = p ** m
    try:
        p, m = factor_prime_power(d)
    except ValueError:
        raise UsageError(f"{d} is not a prime power") from None
    if limit is not None and d > limit:
        raise UsageError(f"dimension {d} exceeds the supported maximum {limit}")
    return make_field(p, m)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _bits_list(text: str) -> list[float]:
    """'128', '0,8,16' or 'start:stop:step' (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            out, x = [], start
            while x <= stop + 1e-12:
                out.append(x)
                x += step
            return out
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --bits specification {text!r}") from None


def _emit(text: str, out) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_dim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, help="dimension (must be a prime power)")
    p.add_argument("--p", type=int, help="characteristic")
    p.add_argument("--m", type=int, help="extension degree (default 1)")


def cmd_verify_mub(args) -> int:
    f = resolve_field(args.d, args.p, args.m, MAX_VERIFY_D)
    tab = build_mub(f)
    rep = verify_mub(tab, args.tol)
    if args.export:
        _emit(tab.to_json(), args.export)
    status = "PASS" if rep.passed else "FAIL"
    print(f"d={f.d} (p={f.p}, m={f.m}) max deviation {rep.max_deviation:.3e} "
          f"tol {args.tol:.1e}: {status}")
    return 0 if rep.passed else 1


def cmd_verify_appendix(args) -> int:
    f = resolve_field(args.d, args.p, args.m, MAX_VERIFY_D)
    rep = verify_appendix(f, args.tol, corrected=not args.wrong_sign)
    if args.json:
        _emit(rep.to_json(), args.out)
    else:
        for name, c in rep.checks.items():
            if c.skipped:
                line = f"  {name:20s} skipped ({c.skipped})"
            else:
                line = f"  {name:20s} {c.max_deviation:.3e}  {'pass' if rep.passed(name) else 'FAIL'}"
            print(line)
        print(f"d={f.d}: {'all identities pass' if rep.all_passed else 'FAILED: ' + ', '.join(rep.failures())}")
    return 0 if rep.all_passed else 1


def _config_from_args(args) -> ProtocolConfig:
    f = resolve_field(args.d, args.p, args.m, MAX_SIM_D)
    if not 0 < args.c <= 1:
        raise UsageError(f"--c must lie in (0, 1], got {args.c}")
    try:
        attack = normalize_strategy(args.attack)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    message = None
    if args.message:
        message = tuple(_int_list(args.message))
        if not message or any(not 0 <= a < f.d for a in message):
            raise UsageError(f"--message symbols must lie in 0..{f.d - 1}")
    return ProtocolConfig(field=f, c=args.c, eve=attack, seed=args.seed, message=message,
                          ir_independent_bases=args.independent_bases)


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    if args.runs < 1:
        raise UsageError("--runs must be positive")
    rec = simulate_records(cfg, args.runs, args.workers)
    stats = summarize(cfg, rec)
    _emit(stats.to_json(), args.out)
    if args.transcript:
        write_transcript((RunRecord.from_row(r) for r in rec), args.transcript)
    if args.check:
        dist = stats.sigma_distance()
        ok = dist <= 4
        print(f"detection rate {stats.pe_hat} vs expected {stats.expected_detection:.6f}: "
              f"{dist:.2f} sigma -> {'PASS' if ok else 'FAIL'}", file=sys.stderr)
        return 0 if ok else 1
    return 0


def cmd_scan(args) -> int:
    dims = _int_list(args.dims)
    if not dims:
        raise UsageError("--dims is empty")
    for d in dims:
        resolve_field(d=d, limit=MAX_SIM_D)
    if args.runs < 0:
        raise UsageError("--runs must be non-negative")
    rows = scan_dimensions(dims, args.runs, args.c, args.seed, args.workers)
    _emit(scan_to_csv(rows) if args.format == "csv" else scan_to_json(rows), args.out)
    return 0


def cmd_qdc(args) -> int:
    f = resolve_field(args.d, args.p, args.m)
    if not 0 < args.c <= 1:
        raise UsageError(f"--c must lie in (0, 1], got {args.c}")
    bits = _bits_list(args.bits)
    if any(b < 0 for b in bits):
        raise UsageError("--bits must be non-negative")
    points = qdc_curve(args.c, f.d, bits)
    if args.format == "json":
        text = json.dumps({"c": args.c, "d": f.d, "points": [asdict(p) for p in points]},
                          indent=2)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("bits", "success", "detect"))
        for pt in points:
            w.writerow((pt.bits, pt.success, pt.detect))
        text = buf.getvalue()
    _emit(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dqkd", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version="dqkd 0.1.0")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-mub", help="build the d+1 bases and check unbiasedness")
    _add_dim_args(p)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--export", metavar="PATH", help="write the bases as JSON")
    p.set_defaults(func=cmd_verify_mub)

    p = sub.add_parser("verify-appendix", help="exhaustive operator-identity suite")
    _add_dim_args(p)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--wrong-sign", action="store_true",
                   help="use the uncorrected p=2 square-root sign (negative control)")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_verify_appendix)

    p = sub.add_parser("simulate", help="Monte Carlo session; writes SessionStats JSON")
    _add_dim_args(p)
    p.add_argument("--runs", type=int, default=100_000)
    p.add_argument("--c", type=float, default=0.5, help="control-mode probability")
    p.add_argument("--attack", default="none",
                   help="one of " + ", ".join(s.replace("_", "-") for s in STRATEGIES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--message", help="fixed symbol schedule, e.g. 0,2,1 (cycled)")
    p.add_argument("--independent-bases", action="store_true",
                   help="intercept-resend draws a fresh basis on the backward leg")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--transcript", metavar="PATH", help="JSON-lines run transcript")
    p.add_argument("--check", action="store_true",
                   help="exit 1 unless the detection rate is within 4 sigma of its closed form")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="P_E versus dimension, analytic and simulated")
    p.add_argument("--dims", default=DEFAULT_SCAN_DIMS)
    p.add_argument("--runs", type=int, default=20_000, help="runs per dimension (0: analytic only)")
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("qdc", help="probability Eve eavesdrops I bits undetected")
    _add_dim_args(p)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--bits", default="0:128:8", help="I values: '128', '0,8,16' or 'start:stop:step'")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_qdc)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
