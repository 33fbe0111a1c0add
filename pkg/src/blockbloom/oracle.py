"""Naive scalar reference implementation.

Bits are set and tested one at a time from :func:`~blockbloom.hashing.make_pattern`
on Python integers: no strips, no lanes, no chunked loads, one worker.
The bulk paths in :mod:`blockbloom.core` must agree with it bit for bit.
"""

from __future__ import annotations

from .analytics import optimal_n
from .config import FilterConfig
from .core import BloomFilter
from .hashing import base_hash, make_pattern

__all__ = ["oracle_add", "oracle_contains", "oracle_fpr", "oracle_bits"]


def oracle_bits(filt: BloomFilter, key) -> list[tuple[int, int]]:
    """``(word index, bit index)`` pairs the key maps to."""
    cfg = filt.config
    pattern = make_pattern(base_hash(key, cfg.seed), cfg, filt.salts)
    out = []
    for word, mask in pattern.updates(cfg):
        bit = 0
        while mask:
            if mask & 1:
                out.append((word, bit))
            mask >>= 1
            bit += 1
    return out


def oracle_add(filt: BloomFilter, key) -> None:
    words = filt.words
    for word, bit in oracle_bits(filt, key):
        words[word] = int(words[word]) | (1 << bit)


def oracle_contains(filt: BloomFilter, key) -> bool:
    words = filt.words
    for word, bit in oracle_bits(filt, key):
        if not (int(words[word]) >> bit) & 1:
            return False
    return True


def oracle_fpr(config: FilterConfig, n_insert: int, n_query: int, seed: int = 0) -> float:
    """Fraction of positives among ``n_query`` keys that were never inserted.

    Inserts ``n_insert`` keys (``None`` means the half-full load for the
    config). Slow; meant for small filters.
    """
    from .bench import generate_unique_keys

    if n_insert is None:
        n_insert = optimal_n(config.m_effective, config.k)
    filt = BloomFilter(config)
    if n_insert:
        for key in generate_unique_keys(n_insert, seed, stream=0).tolist():
            oracle_add(filt, key)
    queries = generate_unique_keys(n_query, seed, stream=1).tolist()
    hits = sum(oracle_contains(filt, q) for q in queries)
    return hits / n_query
