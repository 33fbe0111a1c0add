"""Key hashing and multiply-shift derivation of filter addresses.

Every key is hashed once with 64-bit xxHash. All addressing (block choice,
word selection inside a CSBF group, bit positions) is derived from that one
digest by multiplying it with odd 64-bit salts and keeping the top bits of
the product. Block selection and CBF positions use a multiply-high range
reduction instead, so their ranges need not be powers of two.

Two implementations live side by side: scalar functions on Python ints
(``base_hash``, ``make_pattern``), used by the reference oracle and by
single-key operations, and numpy kernels over ``uint64`` arrays
(``hash_keys``, :class:`StripPattern`) used by the bulk paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import xxhash

from .config import FilterConfig, Variant

__all__ = [
    "KeyPattern",
    "SaltTable",
    "StripPattern",
    "base_hash",
    "block_index",
    "hash_keys",
    "make_pattern",
    "make_salt_table",
    "mulhi",
    "salt_table_for",
]

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1

# xxHash64 primes
_P1 = 0x9E3779B185EBCA87
_P2 = 0xC2B2AE3D27D4EB4F
_P3 = 0x165667B19E3779F9
_P4 = 0x85EBCA77C2B2AE63
_P5 = 0x27D4EB2F165667C5

_GOLDEN = 0x9E3779B97F4A7C15

Key = Union[int, bytes, bytearray, memoryview]


def _key_bytes(key: Key) -> bytes:
    if isinstance(key, (bytes, bytearray, memoryview)):
        return bytes(key)
    key = int(key)
    if not 0 <= key <= MASK64:
        raise ValueError(f"integer keys must fit in 64 unsigned bits, got {key}")
    return key.to_bytes(8, "little")


def base_hash(key: Key, seed: int = 0) -> int:
    """64-bit xxHash of ``key``.

    Integers are hashed as their 8-byte little-endian encoding, so
    ``base_hash(x)`` equals ``base_hash(x.to_bytes(8, "little"))``.
    """
    return xxhash.xxh64_intdigest(_key_bytes(key), seed=seed)


def _rotl(x: np.ndarray, r: int) -> np.ndarray:
    return (x << np.uint64(r)) | (x >> np.uint64(64 - r))


def hash_keys(keys, seed: int = 0) -> np.ndarray:
    """Vectorized ``base_hash`` over many keys.

    Integer arrays take a numpy xxHash64 kernel specialized to 8-byte
    inputs. Any other sequence (byte strings, mixed) is hashed key by key.
    """
    if isinstance(keys, np.ndarray) and keys.dtype.kind in "iu":
        x = keys.astype(np.uint64, copy=False)
    else:
        keys = list(keys)
        if all(isinstance(k, (int, np.integer)) for k in keys):
            x = np.asarray([int(k) for k in keys], dtype=np.uint64)
        else:
            return np.fromiter(
                (base_hash(k, seed) for k in keys), dtype=np.uint64, count=len(keys)
            )
    u = np.uint64
    # single 8-byte lane: round(0, input), merge, then avalanche
    k1 = _rotl(x * u(_P2), 31) * u(_P1)
    h = np.full(x.shape, (seed + _P5 + 8) & MASK64, dtype=np.uint64)
    h ^= k1
    h = _rotl(h, 27) * u(_P1) + u(_P4)
    h ^= h >> u(33)
    h *= u(_P2)
    h ^= h >> u(29)
    h *= u(_P3)
    h ^= h >> u(32)
    return h


# salts


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


@dataclass(frozen=True)
class SaltTable:
    """Odd 64-bit multipliers.

    Index layout used by :func:`make_pattern` for a config with ``k`` bits:
    ``salts[0:k]`` pick bits, ``salts[k]`` picks the block and
    ``salts[k+1:]`` pick the word inside each CSBF group.
    """

    seed: int
    salts: tuple[int, ...]

    def __post_init__(self):
        if any(not (s & 1) for s in self.salts):
            raise ValueError("salts must be odd")
        if len(set(self.salts)) != len(self.salts):
            raise ValueError("salts must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.salts)

    def __getitem__(self, i):
        return self.salts[i]


def make_salt_table(seed: int, count: int) -> SaltTable:
    """``count`` distinct odd salts drawn from a splitmix64 stream."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    out: list[int] = []
    seen: set[int] = set()
    state = seed & MASK64
    while len(out) < count:
        state, z = _splitmix64(state)
        z |= 1
        if z not in seen:
            seen.add(z)
            out.append(z)
    return SaltTable(seed & MASK64, tuple(out))


def salt_table_for(config: FilterConfig) -> SaltTable:
    return make_salt_table(config.seed, config.salt_count)


# scalar addressing


def block_index(h: int, b: int, block_salt: int) -> int:
    """Multiply-high range reduction of the remixed hash onto ``[0, b)``."""
    if b < 1:
        raise ValueError(f"block count must be positive, got {b}")
    return (((h * block_salt) & MASK64) * b) >> 64


def _top(h: int, salt: int, bits: int) -> int:
    return ((h * salt) & MASK64) >> (64 - bits) if bits else 0


@dataclass(frozen=True)
class KeyPattern:
    """Bits one key sets or tests.

    Blocked variants fill ``block_index`` and one mask per word of the block.
    CBF uses ``positions``: global bit offsets in ``[0, m)``.
    ``selected_words`` lists, for CSBF, the word chosen in each group.
    """

    block_index: int
    word_masks: tuple[int, ...] = ()
    selected_words: Optional[tuple[int, ...]] = None
    positions: Optional[tuple[int, ...]] = None

    def updates(self, config: FilterConfig) -> list[tuple[int, int]]:
        """``(word offset into the filter array, mask)`` pairs with nonzero masks."""
        if self.positions is not None:
            S = config.S
            return [(p // S, 1 << (p % S)) for p in self.positions]
        base = self.block_index * config.words_per_block
        return [(base + w, mask) for w, mask in enumerate(self.word_masks) if mask]


def make_pattern(h: int, config: FilterConfig, salts: SaltTable) -> KeyPattern:
    """Derive the full bit pattern of a key from its base hash ``h``."""
    v, k = config.variant, config.k
    if v is Variant.CBF:
        m = config.m
        return KeyPattern(
            0, positions=tuple((((h * salts[i]) & MASK64) * m) >> 64 for i in range(k))
        )

    s = config.words_per_block
    log_S = config.S.bit_length() - 1
    block = block_index(h, config.block_count, salts[k])
    masks = [0] * s

    if v is Variant.BBF:
        log_B = config.B.bit_length() - 1
        for i in range(k):
            pos = _top(h, salts[i], log_B)
            masks[pos >> log_S] |= 1 << (pos & (config.S - 1))
        return KeyPattern(block, tuple(masks))

    if v in (Variant.SBF, Variant.RBBF):
        per_word = k // s
        for w in range(s):
            for j in range(per_word):
                masks[w] |= 1 << _top(h, salts[w * per_word + j], log_S)
        return KeyPattern(block, tuple(masks))

    # CSBF
    z = config.z
    group_size = s // z
    log_g = group_size.bit_length() - 1
    per_group = k // z
    selected = []
    for g in range(z):
        w = g * group_size + _top(h, salts[k + 1 + g], log_g)
        selected.append(w)
        for j in range(per_group):
            masks[w] |= 1 << _top(h, salts[g * per_group + j], log_S)
    return KeyPattern(block, tuple(masks), selected_words=tuple(selected))


# vectorized addressing


def mulhi(x: np.ndarray, n: int) -> np.ndarray:
    """``floor(x * n / 2**64)`` elementwise for ``uint64`` ``x`` and ``0 <= n < 2**64``."""
    u = np.uint64
    x_hi = x >> u(32)
    x_lo = x & u(MASK32)
    if n <= MASK32:
        return (x_hi * u(n) + ((x_lo * u(n)) >> u(32))) >> u(32)
    n_hi, n_lo = u(n >> 32), u(n & MASK32)
    lo_lo = x_lo * n_lo
    hi_lo = x_hi * n_lo
    lo_hi = x_lo * n_hi
    cross = (lo_lo >> u(32)) + (hi_lo & u(MASK32)) + lo_hi
    return x_hi * n_hi + (hi_lo >> u(32)) + (cross >> u(32))


def _top_bits(h: np.ndarray, salt: int, bits: int) -> np.ndarray:
    if bits == 0:
        return np.zeros_like(h)
    return (h * np.uint64(salt)) >> np.uint64(64 - bits)


_ONE = np.uint64(1)


class StripPattern:
    """Patterns for a strip of already-hashed keys.

    The strip is built from one hash per key. Lanes then ask for the masks
    of just the words they own via :meth:`masks`; work shared across lanes
    (BBF bit draws, CSBF group choices) is computed once and cached.
    """

    def __init__(self, hashes: np.ndarray, config: FilterConfig, salts: SaltTable):
        self.hashes = hashes
        self.config = config
        self.salts = salts
        self._log_S = config.S.bit_length() - 1
        self._bbf: Optional[tuple[np.ndarray, np.ndarray]] = None
        self._groups: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        if config.variant is Variant.CBF:
            self.blocks = None
        else:
            b = config.block_count
            remixed = hashes * np.uint64(salts[config.k])
            self.blocks = mulhi(remixed, b)

    def __len__(self) -> int:
        return len(self.hashes)

    def positions(self) -> np.ndarray:
        """CBF only: ``(n, k)`` global bit positions."""
        cfg = self.config
        out = np.empty((len(self.hashes), cfg.k), dtype=np.uint64)
        for i in range(cfg.k):
            out[:, i] = mulhi(self.hashes * np.uint64(self.salts[i]), cfg.m)
        return out

    def _word_mask(self, first_salt: int, count: int) -> np.ndarray:
        mask = np.zeros_like(self.hashes)
        for j in range(first_salt, first_salt + count):
            mask |= _ONE << _top_bits(self.hashes, self.salts[j], self._log_S)
        return mask

    def _bbf_draws(self) -> tuple[np.ndarray, np.ndarray]:
        if self._bbf is None:
            cfg = self.config
            log_B = cfg.B.bit_length() - 1
            pos = np.empty((len(self.hashes), cfg.k), dtype=np.uint64)
            for i in range(cfg.k):
                pos[:, i] = _top_bits(self.hashes, self.salts[i], log_B)
            word = pos >> np.uint64(self._log_S)
            bit = _ONE << (pos & np.uint64(cfg.S - 1))
            self._bbf = (word, bit)
        return self._bbf

    def _group(self, g: int) -> tuple[np.ndarray, np.ndarray]:
        if g not in self._groups:
            cfg = self.config
            group_size = cfg.words_per_group
            per_group = cfg.k // cfg.z
            sel = _top_bits(self.hashes, self.salts[cfg.k + 1 + g], group_size.bit_length() - 1)
            sel += np.uint64(g * group_size)
            self._groups[g] = (sel, self._word_mask(g * per_group, per_group))
        return self._groups[g]

    def masks(self, words: Sequence[int]) -> np.ndarray:
        """``(n, len(words))`` uint64 masks for the given in-block words."""
        cfg = self.config
        n = len(self.hashes)
        out = np.zeros((n, len(words)), dtype=np.uint64)
        v = cfg.variant
        if v in (Variant.SBF, Variant.RBBF):
            per_word = cfg.k // cfg.words_per_block
            for col, w in enumerate(words):
                out[:, col] = self._word_mask(w * per_word, per_word)
        elif v is Variant.CSBF:
            group_size = cfg.words_per_group
            for col, w in enumerate(words):
                sel, mask = self._group(w // group_size)
                out[:, col] = np.where(sel == np.uint64(w), mask, np.uint64(0))
        elif v is Variant.BBF:
            word, bit = self._bbf_draws()
            for col, w in enumerate(words):
                hit = word == np.uint64(w)
                out[:, col] = np.bitwise_or.reduce(np.where(hit, bit, np.uint64(0)), axis=1)
        else:
            raise ValueError("CBF has no block masks; use positions()")
        return out


def iter_strips(hashes: np.ndarray, size: int) -> Iterable[tuple[int, np.ndarray]]:
    for start in range(0, len(hashes), size):
        yield start, hashes[start : start + size]
