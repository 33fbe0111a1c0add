"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure
(I/O, corrupt files, allocation), 3 self-test failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analytics, bench
from .config import ConfigError, FilterConfig
from .core import BloomFilter, FormatError
from .layout import Layout, LayoutError
from .selftest import run_selftest

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_SELFTEST = 0, 1, 2, 3

_UNITS = {"": None, "b": 1, "kb": 1 << 10, "kib": 1 << 10, "mb": 1 << 20, "mib": 1 << 20,
          "gb": 1 << 30, "gib": 1 << 30}


class UsageError(Exception):
    pass


def parse_bits(text: str) -> int:
    """Filter size in bits.

    A bare integer (or ``2^25``) is a bit count. A byte suffix such as
    ``32mb`` or ``1gb`` is read as binary units, so ``32mb`` is 32 MiB.
    """
    t = text.strip().lower().replace("_", "")
    pow_match = re.fullmatch(r"2(?:\^|\*\*)(\d+)", t)
    if pow_match:
        return 1 << int(pow_match.group(1))
    match = re.fullmatch(r"(\d+(?:\.\d+)?)\s*([a-z]*)", t)
    if not match or match.group(2) not in _UNITS:
        raise argparse.ArgumentTypeError(f"invalid size {text!r}")
    value, unit = match.groups()
    if not unit:
        if "." in value:
            raise argparse.ArgumentTypeError(f"bit count must be an integer: {text!r}")
        return int(value)
    return int(float(value) * _UNITS[unit] * 8)


def _count(text: str) -> int:
    try:
        value = int(float(text)) if re.fullmatch(r"\d+(\.\d+)?e\d+", text.lower()) else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid count {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"count must be non-negative: {text!r}")
    return value


def _csv_list(conv):
    def parse(text: str):
        return [conv(part) for part in text.split(",") if part.strip()]
    return parse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _filter_flags(p: argparse.ArgumentParser, require_m: bool = True) -> None:
    g = p.add_argument_group("filter")
    g.add_argument("--variant", default="SBF", help="CBF, BBF, RBBF, SBF or CSBF (default SBF)")
    g.add_argument("--m", type=parse_bits, required=require_m, default=None,
                   help="filter size in bits, or with a byte suffix (32mb, 1gb)")
    g.add_argument("--block", type=int, default=256, help="block size B in bits (default 256)")
    g.add_argument("--word", type=int, default=64, help="word size S in bits (default 64)")
    g.add_argument("--k", type=int, default=16, help="fingerprint bits per key (default 16)")
    g.add_argument("--z", type=int, default=0, help="CSBF group count (default 0, unused)")
    g.add_argument("--seed", type=int, default=0, help="hash and key seed (default 0)")


def _layout_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta", type=int, default=None, help="lanes per key (default: host default)")
    p.add_argument("--phi", type=int, default=None, help="words per lane per step (default: host default)")


def _config(args) -> FilterConfig:
    B = args.word if args.variant.upper() == "RBBF" and args.block == 256 else args.block
    return FilterConfig(args.variant, m=args.m, B=B, S=args.word, k=args.k, z=args.z, seed=args.seed)


def _layout(args) -> Optional[Layout]:
    if args.theta is None and args.phi is None:
        return None
    return Layout(args.theta or 1, args.phi or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockbloom", description="Blocked and sectorized Bloom filter toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="closed-form accuracy for m bits and n keys")
    p.add_argument("--m", type=parse_bits, required=True)
    p.add_argument("--n", type=_count, required=True)
    p.add_argument("--k", type=int, default=None, help="evaluate at this k (default: optimal)")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("fpr", help="measure the false-positive rate at the half-full load")
    _filter_flags(p)
    p.add_argument("--queries", type=_count, default=10**7)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("bench", help="time bulk add or contains")
    _filter_flags(p)
    _layout_flags(p)
    p.add_argument("--op", choices=("add", "contains"), default="contains")
    p.add_argument("--keys", type=_count, default=10**7)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--out", type=Path, default=None, help="write the report as CSV")
    p.add_argument("--json", action="store_true", help="print/write JSON instead of CSV")

    p = sub.add_parser("grid", help="time every valid layout")
    _filter_flags(p)
    p.add_argument("--op", choices=("add", "contains"), default="contains")
    p.add_argument("--keys", type=_count, default=10**7)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("frontier", help="throughput vs accuracy sweep")
    p.add_argument("--variants", type=_csv_list(str), default=["RBBF", "SBF", "CSBF", "CBF"])
    p.add_argument("--blocks", type=_csv_list(int), default=[64, 128, 256, 512, 1024])
    p.add_argument("--sizes", type=_csv_list(parse_bits), default=[parse_bits("32mb")])
    p.add_argument("--word", type=int, default=64)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--keys", type=_count, default=10**7)
    p.add_argument("--queries", type=_count, default=10**7)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-grid", action="store_true", help="use default layouts instead of a grid search")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--json", type=Path, default=None, help="also write a JSON mirror here")

    p = sub.add_parser("build", help="build a filter from a key file")
    _filter_flags(p)
    p.add_argument("--keys-file", type=Path, required=True)
    p.add_argument("--text", action="store_true", help="key file holds one decimal per line")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("query", help="query a saved filter; prints 0/1 per key")
    p.add_argument("--filter", type=Path, required=True)
    p.add_argument("--keys-file", type=Path, required=True)
    p.add_argument("--text", action="store_true")

    p = sub.add_parser("selftest", help="oracle equivalence and invariant checks")
    p.add_argument("--configs", type=int, default=25)
    p.add_argument("--keys", type=int, default=2000)
    return parser


def read_keys(path: Path, text: bool = False) -> np.ndarray:
    """Raw little-endian uint64 keys, or one decimal per line with ``text``."""
    if text:
        try:
            return np.asarray([int(tok) for tok in path.read_text().split()], dtype=np.uint64)
        except (ValueError, OverflowError) as exc:
            raise FormatError(f"{path}: {exc}") from None
    data = path.read_bytes()
    if len(data) % 8:
        raise FormatError(f"{path}: size {len(data)} is not a multiple of 8 bytes")
    return np.frombuffer(data, dtype="<u8").astype(np.uint64)


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2))


def _cmd_analyze(args) -> None:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    c = args.m / args.n
    k_real, k_opt = analytics.optimal_k(c)
    k = args.k or k_opt
    out = {
        "m_bits": args.m,
        "n": args.n,
        "bits_per_element": c,
        "k_optimal_real": k_real,
        "k_optimal": k_opt,
        "k": k,
        "fpr_predicted": analytics.fpr_estimate(args.m, args.n, k),
        "fpr_min": analytics.min_fpr(c),
        "n_half_full": analytics.optimal_n(args.m, k),
    }
    if args.json:
        _print_json(out)
    else:
        for key, value in out.items():
            print(f"{key}: {value:.6g}" if isinstance(value, float) else f"{key}: {value}")


def _cmd_fpr(args) -> None:
    cfg = _config(args)
    res = bench.measure_fpr(cfg, args.queries, args.seed, args.workers)
    out = {
        **cfg.summary(),
        "m_effective": cfg.m_effective,
        "inserted": res.inserted,
        "queries": res.queries,
        "positives": res.positives,
        "fpr": res.fpr,
        "fpr_stderr": res.stderr,
        "fill_ratio": res.fill_ratio,
        "fpr_classical_bound": analytics.fpr_estimate(cfg.m_effective, res.inserted, cfg.k),
    }
    if args.json:
        _print_json(out)
    else:
        for key, value in out.items():
            print(f"{key}: {value:.6g}" if isinstance(value, float) else f"{key}: {value}")


def _emit(reports, out: Optional[Path], as_json: bool) -> None:
    if out is not None:
        bench.write_reports(reports, out, fmt="json" if as_json else "csv")
        return
    rows = [r.to_row() for r in reports]
    if as_json:
        _print_json(rows)
        return
    writer = csv.DictWriter(sys.stdout, fieldnames=bench.CSV_FIELDS)
    writer.writeheader()
    writer.writerows(rows)


def _cmd_bench(args) -> None:
    cfg = _config(args)
    rep = bench.measure_throughput(
        cfg, args.op, args.keys, workers=args.workers, repetitions=args.repetitions,
        layout=_layout(args), seed=args.seed,
    )
    _emit([rep], args.out, args.json)


def _cmd_grid(args) -> None:
    cfg = _config(args)
    res = bench.layout_grid_search(cfg, args.op, args.keys, args.workers, args.seed, args.repetitions)
    if args.out is not None:
        res.to_csv(args.out)
    print(res.table())


def _cmd_frontier(args) -> None:
    bench.frontier_sweep(
        args.variants, args.blocks, args.sizes, args.out, S=args.word, k=args.k,
        key_count=args.keys, query_count=args.queries, workers=args.workers,
        grid=not args.no_grid, seed=args.seed, json_path=args.json,
    )
    print(f"wrote {args.out}")


def _cmd_build(args) -> None:
    cfg = _config(args)
    keys = read_keys(args.keys_file, args.text)
    filt = BloomFilter(cfg)
    filt.bulk_add(keys)
    filt.save(args.out)


def _cmd_query(args) -> None:
    filt = BloomFilter.load(args.filter)
    keys = read_keys(args.keys_file, args.text)
    answers = filt.bulk_contains(keys)
    sys.stdout.write("".join("1\n" if a else "0\n" for a in answers))


def _cmd_selftest(args) -> int:
    failures = run_selftest(args.configs, args.keys, report=print)
    for name in failures:
        print(f"FAIL {name}", file=sys.stderr)
    print("selftest: " + ("FAILED" if failures else "passed"))
    return EXIT_SELFTEST if failures else EXIT_OK


_COMMANDS = {
    "analyze": _cmd_analyze,
    "fpr": _cmd_fpr,
    "bench": _cmd_bench,
    "grid": _cmd_grid,
    "frontier": _cmd_frontier,
    "build": _cmd_build,
    "query": _cmd_query,
    "selftest": _cmd_selftest,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        code = _COMMANDS[args.command](args)
    except (UsageError, ConfigError, LayoutError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        name = exc.filename or ""
        print(f"error: {name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (FormatError, MemoryError, AssertionError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return code or EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
