"""Filter storage and membership operations for all five variants."""

from __future__ import annotations

import struct
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from . import hashing
from .config import ConfigError, FilterConfig, Variant
from .hashing import StripPattern, make_pattern, salt_table_for
from .layout import Layout, default_layout, schedule, validate_layout

__all__ = [
    "BloomFilter",
    "FormatError",
    "deserialize",
    "new_filter",
    "serialize",
]

MAGIC = b"BLMV"
VERSION = 1
_HEADER = struct.Struct("<4sHBBHHHQQQQ")

# keys processed per vectorized pass
STRIP = 1 << 15


class FormatError(ValueError):
    """Raised when serialized filter bytes cannot be decoded."""


def _aligned_zeros(count: int, dtype, align: int) -> np.ndarray:
    itemsize = np.dtype(dtype).itemsize
    raw = np.zeros(count * itemsize + align, dtype=np.uint8)
    offset = (-raw.ctypes.data) % align
    return raw[offset : offset + count * itemsize].view(dtype)


def _word_dtype(S: int):
    return np.dtype("<u4") if S == 32 else np.dtype("<u8")


def _as_key_array(keys):
    if isinstance(keys, np.ndarray) and keys.dtype.kind in "iu":
        return keys
    keys = list(keys)
    if all(isinstance(k, (int, np.integer)) for k in keys):
        return np.asarray([int(k) for k in keys], dtype=np.uint64)
    return keys


class BloomFilter:
    """A bit array plus the addressing policy from its :class:`FilterConfig`.

    Keys are 64-bit unsigned integers (fast path) or byte strings. Bulk
    operations accept a ``layout`` that controls the order in which block
    words are visited, and a ``workers`` count that splits the input into
    contiguous partitions processed on a thread pool. Neither affects the
    resulting bits or answers.
    """

    def __init__(self, config: FilterConfig):
        self.config = config
        self.salts = salt_table_for(config)
        self.dtype = _word_dtype(config.S)
        self.words = _aligned_zeros(config.word_count, self.dtype, config.alignment)
        self._write_lock = threading.Lock()

    def __repr__(self) -> str:
        c = self.config
        return (
            f"BloomFilter({c.variant.name}, m={c.m}, B={c.B}, S={c.S}, k={c.k}, "
            f"z={c.z}, fill={self.fill_ratio():.4f})"
        )

    @property
    def nbytes(self) -> int:
        return self.words.nbytes

    def _blocks_view(self) -> np.ndarray:
        return self.words.reshape(self.config.block_count, self.config.words_per_block)

    def _layout(self, layout: Optional[Layout], op: str) -> Layout:
        s = self.config.words_per_block
        if layout is None:
            layout = self.config.layout or default_layout(op, s)
        validate_layout(layout, s)
        return layout

    # single-key operations

    def add(self, key) -> None:
        h = hashing.base_hash(key, self.config.seed)
        updates = make_pattern(h, self.config, self.salts).updates(self.config)
        with self._write_lock:
            for idx, mask in updates:
                self.words[idx] = int(self.words[idx]) | mask

    def contains(self, key) -> bool:
        h = hashing.base_hash(key, self.config.seed)
        for idx, mask in make_pattern(h, self.config, self.salts).updates(self.config):
            if int(self.words[idx]) & mask != mask:
                return False
        return True

    __contains__ = contains

    # bulk operations

    def _partitioned(self, n: int, workers: int, fn: Callable[[int, int], None]) -> None:
        if workers < 1:
            raise ValueError(f"workers must be positive, got {workers}")
        if n == 0:
            return
        workers = min(workers, n)
        if workers == 1:
            fn(0, n)
            return
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(fn, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])
            ]
            for f in futures:
                f.result()

    def _strip(self, keys, start: int, stop: int) -> StripPattern:
        # the only place keys are hashed; every lane reuses this result
        hashes = hashing.hash_keys(keys[start:stop], self.config.seed)
        return StripPattern(hashes, self.config, self.salts)

    def bulk_add(self, keys, layout: Optional[Layout] = None, workers: int = 1) -> None:
        """Insert every key. Equivalent to calling :meth:`add` on each."""
        layout = self._layout(layout, "add")
        keys = _as_key_array(keys)

        def run(lo: int, hi: int) -> None:
            for start in range(lo, hi, STRIP):
                self._add_strip(self._strip(keys, start, min(start + STRIP, hi)), layout)

        self._partitioned(len(keys), workers, run)

    def bulk_contains(
        self, keys, layout: Optional[Layout] = None, workers: int = 1
    ) -> np.ndarray:
        """Boolean answers in input order."""
        layout = self._layout(layout, "contains")
        keys = _as_key_array(keys)
        out = np.empty(len(keys), dtype=bool)

        def run(lo: int, hi: int) -> None:
            for start in range(lo, hi, STRIP):
                stop = min(start + STRIP, hi)
                out[start:stop] = self._test_strip(self._strip(keys, start, stop), layout)

        self._partitioned(len(keys), workers, run)
        return out

    def _cbf_cells(self, pattern: StripPattern) -> tuple[np.ndarray, np.ndarray]:
        pos = pattern.positions()
        log_S = self.config.S.bit_length() - 1
        return pos >> np.uint64(log_S), pos & np.uint64(self.config.S - 1)

    def _add_strip(self, pattern: StripPattern, layout: Layout) -> None:
        if self.config.variant is Variant.CBF:
            idx, bit = self._cbf_cells(pattern)
            masks = (np.uint64(1) << bit).astype(self.dtype)
            with self._write_lock:
                np.bitwise_or.at(self.words, idx.ravel(), masks.ravel())
            return
        s = self.config.words_per_block
        base = pattern.blocks * np.uint64(s)
        for _, _, cols in _schedule(layout, s):
            masks = pattern.masks(cols)
            nz = masks != 0
            idx = base[:, None] + np.asarray(cols, dtype=np.uint64)
            with self._write_lock:
                np.bitwise_or.at(self.words, idx[nz], masks[nz].astype(self.dtype))

    def _test_strip(self, pattern: StripPattern, layout: Layout) -> np.ndarray:
        if self.config.variant is Variant.CBF:
            idx, bit = self._cbf_cells(pattern)
            hits = (self.words[idx].astype(np.uint64) >> bit) & np.uint64(1)
            return hits.all(axis=1)
        s = self.config.words_per_block
        blocks = self._blocks_view()
        rows = pattern.blocks
        result = np.ones(len(pattern), dtype=bool)
        for _, _, cols in _schedule(layout, s):
            # phi contiguous words of the block in one load
            chunk = blocks[rows, cols[0] : cols[-1] + 1]
            masks = pattern.masks(cols).astype(self.dtype)
            result &= ((chunk & masks) == masks).all(axis=1)
        return result

    # state

    def fill_ratio(self) -> float:
        """Fraction of addressable bits that are set."""
        return int(np.bitwise_count(self.words).sum(dtype=np.int64)) / self.config.m_effective

    def clear(self) -> None:
        self.words.fill(0)

    def to_bytes(self) -> bytes:
        return serialize(self)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BloomFilter":
        return deserialize(data)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "BloomFilter":
        with open(path, "rb") as fh:
            return deserialize(fh.read())


_schedule_cache: dict[tuple[Layout, int], list] = {}


def _schedule(layout: Layout, s: int) -> list:
    key = (layout, s)
    if key not in _schedule_cache:
        _schedule_cache[key] = list(schedule(layout, s))
    return _schedule_cache[key]


def new_filter(config: FilterConfig) -> BloomFilter:
    return BloomFilter(config)


def serialize(filt: BloomFilter) -> bytes:
    """Little-endian header followed by the raw words. The layout is not stored."""
    c = filt.config
    header = _HEADER.pack(
        MAGIC, VERSION, int(c.variant), c.S, c.k, c.z, 0, c.m, c.B, c.seed, c.word_count
    )
    return header + filt.words.astype(filt.dtype, copy=False).tobytes()


def deserialize(data: bytes) -> BloomFilter:
    data = bytes(data)
    if len(data) < _HEADER.size:
        raise FormatError(f"truncated header: {len(data)} < {_HEADER.size} bytes")
    magic, version, variant, S, k, z, _reserved, m, B, seed, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    try:
        config = FilterConfig(Variant(variant), m=m, B=B, S=S, k=k, z=z, seed=seed)
    except (ConfigError, ValueError) as exc:
        raise FormatError(f"invalid stored config: {exc}") from None
    if count != config.word_count:
        raise FormatError(f"word count {count} does not match config ({config.word_count})")
    payload = data[_HEADER.size :]
    expected = count * (S // 8)
    if len(payload) != expected:
        raise FormatError(f"payload is {len(payload)} bytes, expected {expected}")
    filt = BloomFilter(config)
    filt.words[:] = np.frombuffer(payload, dtype=filt.dtype)
    return filt
