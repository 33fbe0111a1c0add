"""Throughput and false-positive measurements.

Protocol:

* keys are distinct pseudo-random 64-bit integers from a seeded bijection,
  so insertion and query sets drawn from different streams never overlap;
* accuracy is measured at the half-full load ``round(m*ln2/k)`` by querying
  keys that were never inserted;
* throughput times only the bulk call. Key generation, allocation and
  result verification happen outside the timed region, and repetitions
  continue until the relative standard error of the mean drops under a
  threshold (2% by default) or a repetition cap is hit.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .analytics import optimal_n
from .config import ConfigError, FilterConfig, Variant
from .core import BloomFilter
from .layout import Layout, default_layout, enumerate_layouts

__all__ = [
    "AllocationError",
    "BenchReport",
    "CSV_FIELDS",
    "FprMeasurement",
    "GridResult",
    "frontier_configs",
    "frontier_sweep",
    "generate_unique_keys",
    "layout_grid_search",
    "measure_fpr",
    "measure_throughput",
    "random_access_baseline",
    "write_reports",
]

log = logging.getLogger(__name__)

CSV_FIELDS = (
    "variant,m_bits,B,S,k,z,theta,phi,op,workers,keys,"
    "elapsed_s,throughput_eps,fpr,fill_ratio,sol_fraction"
).split(",")

_M64 = (1 << 64) - 1
_STREAM_BITS = 48


class AllocationError(MemoryError):
    """The filter or key buffers could not be allocated."""


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; a bijection on 64-bit integers
    u = np.uint64
    x = x ^ (x >> u(30))
    x = x * u(0xBF58476D1CE4E5B9)
    x = x ^ (x >> u(27))
    x = x * u(0x94D049BB133111EB)
    return x ^ (x >> u(31))


def generate_unique_keys(count: int, seed: int = 0, stream: int = 0, start: int = 0) -> np.ndarray:
    """``count`` distinct uniform-looking ``uint64`` keys.

    Keys are a bijective scramble of the counters ``stream * 2**48 + i`` for
    ``i`` in ``[start, start + count)``, so different streams with the same
    seed are guaranteed disjoint. ``start`` lets large sets be produced in
    pieces.
    """
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if start < 0 or start + count > 1 << _STREAM_BITS:
        raise ValueError(f"counter range must stay below 2**{_STREAM_BITS}")
    if not 0 <= stream < 1 << (64 - _STREAM_BITS):
        raise ValueError(f"stream must be in [0, {1 << (64 - _STREAM_BITS)})")
    whitening = int(_mix64(np.array([seed & _M64], dtype=np.uint64))[0])
    counters = np.arange(start, start + count, dtype=np.uint64)
    counters += np.uint64(stream << _STREAM_BITS)
    return _mix64(counters ^ np.uint64(whitening))


@dataclass
class BenchReport:
    variant: str
    m_bits: int
    B: int
    S: int
    k: int
    z: int
    theta: int
    phi: int
    op: str
    keys_processed: int
    elapsed: float
    throughput: float
    worker_count: int = 1
    repetitions: int = 1
    relative_stderr: float = 0.0
    measured_fpr: Optional[float] = None
    fill_ratio: Optional[float] = None
    sol_fraction: Optional[float] = None
    timings: list[float] = field(default_factory=list, repr=False)

    @property
    def layout(self) -> Layout:
        return Layout(self.theta, self.phi)

    def to_row(self) -> dict:
        return {
            "variant": self.variant,
            "m_bits": self.m_bits,
            "B": self.B,
            "S": self.S,
            "k": self.k,
            "z": self.z,
            "theta": self.theta,
            "phi": self.phi,
            "op": self.op,
            "workers": self.worker_count,
            "keys": self.keys_processed,
            "elapsed_s": self.elapsed,
            "throughput_eps": self.throughput,
            "fpr": "" if self.measured_fpr is None else self.measured_fpr,
            "fill_ratio": "" if self.fill_ratio is None else self.fill_ratio,
            "sol_fraction": "" if self.sol_fraction is None else self.sol_fraction,
        }


def write_reports(reports: Iterable[BenchReport], path, fmt: str = "csv", extra: Optional[dict] = None) -> None:
    """Write reports as CSV (fixed schema) or as a JSON list of the same records."""
    rows = [r.to_row() for r in reports]
    if extra:
        for row, more in zip(rows, extra.get("rows", [])):
            row.update(more)
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(rows, indent=2))
        return
    fields = CSV_FIELDS + [f for f in (rows[0] if rows else {}) if f not in CSV_FIELDS]
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def _allocate(config: FilterConfig) -> BloomFilter:
    try:
        return BloomFilter(config)
    except MemoryError as exc:
        raise AllocationError(
            f"cannot allocate {config.word_count * config.S // 8} bytes for {config.variant.name}"
        ) from exc


def _relative_stderr(times: Sequence[float]) -> float:
    if len(times) < 2:
        return math.inf
    mean = statistics.fmean(times)
    return statistics.stdev(times) / math.sqrt(len(times)) / mean if mean > 0 else math.inf


def _snapshot(filt: BloomFilter) -> tuple[np.ndarray, np.ndarray]:
    nz = np.flatnonzero(filt.words)
    return nz, filt.words[nz].copy()


def _precheck(filt: BloomFilter, sample: np.ndarray, layout: Layout, op: str) -> None:
    """No false negatives and layout invariance on a small sample."""
    reference = Layout(1, 1)
    if op == "add":
        filt.clear()
        filt.bulk_add(sample, layout=layout)
        got = _snapshot(filt)
        filt.clear()
        filt.bulk_add(sample, layout=reference)
        want = _snapshot(filt)
        if not (np.array_equal(got[0], want[0]) and np.array_equal(got[1], want[1])):
            raise AssertionError(f"layout {layout} changed the filter contents")
    answers = filt.bulk_contains(sample, layout=layout)
    if not answers.all():
        raise AssertionError("false negative on an inserted key")
    if not np.array_equal(answers, filt.bulk_contains(sample, layout=reference)):
        raise AssertionError(f"layout {layout} changed query answers")


def measure_throughput(
    config: FilterConfig,
    op: str,
    key_count: int,
    workers: int = 1,
    repetitions: int = 10,
    layout: Optional[Layout] = None,
    seed: int = 0,
    rse_target: float = 0.02,
    min_repetitions: int = 3,
    keys: Optional[np.ndarray] = None,
    filt: Optional[BloomFilter] = None,
) -> BenchReport:
    """Time bulk ``add`` or ``contains`` over ``key_count`` keys.

    ``repetitions`` caps the number of timed runs. For ``contains`` the
    filter is first populated with the same keys, so every answer must be
    true; that is checked after timing. ``keys`` and ``filt`` let callers
    reuse buffers across runs.
    """
    if op not in ("add", "contains"):
        raise ValueError(f"op must be 'add' or 'contains', got {op!r}")
    if key_count < 1:
        raise ValueError("key_count must be positive")
    layout = layout or config.layout or default_layout(op, config.words_per_block)
    if keys is None:
        try:
            keys = generate_unique_keys(key_count, seed)
        except MemoryError as exc:
            raise AllocationError(f"cannot allocate {key_count} keys") from exc
    keys = keys[:key_count]
    if filt is None:
        filt = _allocate(config)

    if op == "contains":
        filt.clear()
        filt.bulk_add(keys, workers=workers)
    _precheck(filt, keys[: min(len(keys), 2048)], layout, op)

    times: list[float] = []
    result = None
    cap = max(1, repetitions)
    while len(times) < cap:
        if op == "add":
            filt.clear()
            t0 = time.perf_counter()
            filt.bulk_add(keys, layout=layout, workers=workers)
            times.append(time.perf_counter() - t0)
        else:
            t0 = time.perf_counter()
            result = filt.bulk_contains(keys, layout=layout, workers=workers)
            times.append(time.perf_counter() - t0)
        if len(times) >= min(min_repetitions, cap) and _relative_stderr(times) < rse_target:
            break

    if op == "contains" and not result.all():
        raise AssertionError("pre-populated filter returned a negative")

    elapsed = sum(times)
    rse = _relative_stderr(times)
    c = config
    return BenchReport(
        variant=c.variant.name, m_bits=c.m, B=c.B, S=c.S, k=c.k, z=c.z,
        theta=layout.theta, phi=layout.phi, op=op,
        keys_processed=len(keys), elapsed=elapsed,
        throughput=len(keys) * len(times) / elapsed,
        worker_count=workers, repetitions=len(times),
        relative_stderr=0.0 if math.isinf(rse) else rse,
        fill_ratio=filt.fill_ratio(), timings=times,
    )


@dataclass(frozen=True)
class FprMeasurement:
    fpr: float
    fill_ratio: float
    inserted: int
    queries: int
    positives: int

    @property
    def stderr(self) -> float:
        """Binomial standard error of :attr:`fpr`."""
        return math.sqrt(self.fpr * (1 - self.fpr) / self.queries)


def measure_fpr(
    config: FilterConfig,
    query_count: int = 10**7,
    seed: int = 0,
    workers: int = 1,
    n_insert: Optional[int] = None,
) -> FprMeasurement:
    """Insert the half-full load, then query keys that were never inserted."""
    if n_insert is None:
        n_insert = optimal_n(config.m_effective, config.k)
    filt = _allocate(config)
    if n_insert:
        filt.bulk_add(generate_unique_keys(n_insert, seed, stream=0), workers=workers)
    positives = 0
    chunk = 1 << 22
    for start in range(0, query_count, chunk):
        count = min(chunk, query_count - start)
        queries = generate_unique_keys(count, seed, stream=1, start=start)
        positives += int(filt.bulk_contains(queries, workers=workers).sum())
    return FprMeasurement(
        fpr=positives / query_count,
        fill_ratio=filt.fill_ratio(),
        inserted=n_insert,
        queries=query_count,
        positives=positives,
    )


@dataclass
class GridResult:
    rows: list[BenchReport]
    best: BenchReport

    def to_csv(self, path) -> None:
        marks = [{"best": int(r is self.best)} for r in self.rows]
        write_reports(self.rows, path, extra={"rows": marks})

    def table(self) -> str:
        lines = ["theta phi  throughput_eps"]
        for r in self.rows:
            star = " *" if r is self.best else ""
            lines.append(f"{r.theta:5d} {r.phi:3d}  {r.throughput:14.1f}{star}")
        return "\n".join(lines)


def layout_grid_search(
    config: FilterConfig,
    op: str,
    key_count: int,
    workers: int = 1,
    seed: int = 0,
    repetitions: int = 5,
    layouts: Optional[Sequence[Layout]] = None,
) -> GridResult:
    """Time every valid layout and report the fastest.

    All layouts share one filter; before timing, their answers on a probe
    set of inserted and fresh keys are checked to be identical.
    """
    layouts = list(layouts or enumerate_layouts(config.words_per_block))
    keys = generate_unique_keys(key_count, seed)
    filt = _allocate(config)

    filt.bulk_add(keys)
    probe = np.concatenate([keys[:1024], generate_unique_keys(1024, seed, stream=2)])
    expected = filt.bulk_contains(probe, layout=Layout(1, 1))
    for lay in layouts:
        if not np.array_equal(filt.bulk_contains(probe, layout=lay), expected):
            raise AssertionError(f"layout {lay} changed query answers")

    rows = [
        measure_throughput(
            config, op, key_count, workers=workers, layout=lay, seed=seed,
            repetitions=repetitions, keys=keys, filt=filt,
        )
        for lay in layouts
    ]
    best = max(rows, key=lambda r: r.throughput)
    return GridResult(rows, best)


def random_access_baseline(
    array_bytes: int,
    op: str = "read",
    access_count: int = 10**7,
    seed: int = 0,
    repetitions: int = 3,
) -> float:
    """Random 64-bit reads or OR-writes per second on an ``array_bytes`` buffer.

    The best of ``repetitions`` runs is returned. Index generation and
    first-touch page faults are kept out of the timed region.
    """
    if op not in ("read", "write"):
        raise ValueError(f"op must be 'read' or 'write', got {op!r}")
    n = max(1, array_bytes // 8)
    try:
        arr = np.ones(n, dtype=np.uint64)
    except MemoryError as exc:
        raise AllocationError(f"cannot allocate {array_bytes} bytes") from exc
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, access_count, dtype=np.int64)
    best = math.inf
    if op == "read":
        out = np.empty(access_count, dtype=np.uint64)
        for _ in range(repetitions):
            t0 = time.perf_counter()
            np.take(arr, idx, out=out)
            best = min(best, time.perf_counter() - t0)
    else:
        one = np.uint64(1)
        for _ in range(repetitions):
            t0 = time.perf_counter()
            np.bitwise_or.at(arr, idx, one)
            best = min(best, time.perf_counter() - t0)
    return access_count / best


def frontier_configs(
    variants: Sequence[str],
    blocks: Sequence[int],
    m_bits: int,
    S: int = 64,
    k: int = 16,
    seed: int = 0,
) -> list[FilterConfig]:
    """Expand a variant list and block sizes into valid configurations.

    CBF and RBBF ignore the block list (one configuration each). CSBF
    expands into ``z = 2, 4, ..., s``. Combinations that violate a variant
    constraint are skipped.
    """
    out: list[FilterConfig] = []
    for name in variants:
        v = Variant.parse(name)
        if v is Variant.CBF:
            candidates = [dict(B=0)]
        elif v is Variant.RBBF:
            candidates = [dict(B=S)]
        elif v is Variant.CSBF:
            candidates = []
            for B in blocks:
                z = 2
                while z <= B // S:
                    candidates.append(dict(B=B, z=z))
                    z *= 2
        else:
            candidates = [dict(B=B) for B in blocks]
        for extra in candidates:
            try:
                out.append(FilterConfig(v, m=m_bits, S=S, k=k, seed=seed, **extra))
            except ConfigError as exc:
                log.info("skipping %s %s: %s", v.name, extra, exc)
    return out


def frontier_sweep(
    variants: Sequence[str],
    blocks: Sequence[int],
    sizes: Sequence[int],
    out_path,
    S: int = 64,
    k: int = 16,
    key_count: int = 10**7,
    query_count: int = 10**7,
    workers: int = 1,
    grid: bool = True,
    seed: int = 0,
    json_path=None,
    baseline_accesses: int = 10**7,
) -> list[BenchReport]:
    """Best-layout add/contains throughput plus measured accuracy per configuration.

    ``sizes`` are filter sizes in bits. Rows are appended to ``out_path``
    and flushed as soon as each configuration finishes; a configuration
    that fails is logged and skipped. ``sol_fraction`` is throughput divided
    by the random read (contains) or write (add) rate on a buffer of the
    same size.
    """
    reports: list[BenchReport] = []
    out_path = Path(out_path)
    with out_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        fh.flush()
        for m_bits in sizes:
            sol = {
                "contains": random_access_baseline(m_bits // 8, "read", baseline_accesses, seed),
                "add": random_access_baseline(m_bits // 8, "write", baseline_accesses, seed),
            }
            for config in frontier_configs(variants, blocks, m_bits, S, k, seed):
                try:
                    acc = measure_fpr(config, query_count, seed, workers)
                    cell = []
                    for op in ("add", "contains"):
                        if grid:
                            rep = layout_grid_search(config, op, key_count, workers, seed).best
                        else:
                            rep = measure_throughput(config, op, key_count, workers, seed=seed)
                        rep.measured_fpr = acc.fpr
                        rep.fill_ratio = acc.fill_ratio
                        rep.sol_fraction = rep.throughput / sol[op]
                        cell.append(rep)
                except Exception:  # one bad cell must not lose the sweep
                    log.exception("frontier cell %s failed", config.summary())
                    continue
                for rep in cell:
                    writer.writerow(rep.to_row())
                    reports.append(rep)
                fh.flush()
    if json_path is not None:
        write_reports(reports, json_path, fmt="json")
    return reports
