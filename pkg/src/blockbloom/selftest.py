"""Quick randomized consistency checks, runnable without pytest."""

from __future__ import annotations

import random
from typing import Callable, Optional

import numpy as np

from .config import ConfigError, FilterConfig, Variant
from .core import BloomFilter, deserialize, serialize
from .layout import enumerate_layouts, schedule
from .oracle import oracle_add, oracle_contains

__all__ = ["random_config", "run_selftest"]

_BLOCKS = (64, 128, 256, 512, 1024)


def random_config(rng: random.Random, variant: Optional[Variant] = None, m: Optional[int] = None) -> FilterConfig:
    """A random valid configuration (small by default)."""
    v = variant if variant is not None else rng.choice(list(Variant))
    S = rng.choice((32, 64))
    m = m if m is not None else rng.randrange(1 << 12, 1 << 17)
    seed = rng.getrandbits(64)
    if v is Variant.CBF:
        return FilterConfig(v, m=m, S=S, k=rng.randint(1, 16), seed=seed)
    if v is Variant.RBBF:
        return FilterConfig(v, m=m, B=S, S=S, k=rng.randint(1, 16), seed=seed)
    B = rng.choice([b for b in _BLOCKS if b >= S])
    s = B // S
    if v is Variant.BBF:
        return FilterConfig(v, m=m, B=B, S=S, k=rng.randint(1, 16), seed=seed)
    if v is Variant.SBF:
        return FilterConfig(v, m=m, B=B, S=S, k=s * rng.randint(1, max(1, 32 // s)), seed=seed)
    zs = [z for z in (1, 2, 4, 8, 16, 32) if z <= s]
    z = rng.choice(zs)
    return FilterConfig(v, m=m, B=B, S=S, z=z, k=z * rng.randint(1, max(1, 16 // z)), seed=seed)


def _check(name: str, ok: bool, failures: list[str]) -> None:
    if not ok:
        failures.append(name)


def run_selftest(
    n_configs: int = 25,
    n_keys: int = 2000,
    seed: int = 0,
    report: Optional[Callable[[str], None]] = None,
) -> list[str]:
    """Run the checks and return the names of failed ones (empty on success)."""
    rng = random.Random(seed)
    failures: list[str] = []
    say = report or (lambda msg: None)

    for s in (1, 2, 4, 8, 16, 32):
        for lay in enumerate_layouts(s):
            words = sorted(w for _, _, ws in schedule(lay, s) for w in ws)
            _check(f"partition s={s} {lay}", words == list(range(s)), failures)

    variants = list(Variant)
    for i in range(n_configs):
        cfg = random_config(rng, variants[i % len(variants)])
        keys = np.array([rng.getrandbits(64) for _ in range(n_keys)], dtype=np.uint64)
        fresh = np.array([rng.getrandbits(64) for _ in range(n_keys)], dtype=np.uint64)
        ref = BloomFilter(cfg)
        for key in keys.tolist():
            oracle_add(ref, key)
        ref_answers = np.array([oracle_contains(ref, q) for q in fresh.tolist()])
        label = f"{cfg.variant.name} B={cfg.B} S={cfg.S} k={cfg.k} z={cfg.z}"
        for lay in enumerate_layouts(cfg.words_per_block):
            filt = BloomFilter(cfg)
            filt.bulk_add(keys, layout=lay)
            _check(f"oracle words {label} {lay}", np.array_equal(filt.words, ref.words), failures)
            _check(f"no false negatives {label} {lay}", filt.bulk_contains(keys, layout=lay).all(), failures)
            _check(
                f"oracle answers {label} {lay}",
                np.array_equal(filt.bulk_contains(fresh, layout=lay), ref_answers),
                failures,
            )
        multi = BloomFilter(cfg)
        multi.bulk_add(keys, workers=4)
        _check(f"4-worker add {label}", np.array_equal(multi.words, ref.words), failures)
        back = deserialize(serialize(multi))
        _check(f"round trip {label}", np.array_equal(back.words, multi.words), failures)
        say(f"{label}: {'ok' if not failures else 'FAILED'}")

    try:
        FilterConfig(Variant.SBF, m=1 << 12, B=256, S=64, k=10)
        failures.append("SBF k % s != 0 accepted")
    except ConfigError:
        pass
    return failures
