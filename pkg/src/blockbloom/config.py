"""Filter parameterization and its derived geometry."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

from .layout import Layout, LayoutError, is_power_of_two, validate_layout

__all__ = ["ConfigError", "FilterConfig", "Variant"]


class ConfigError(ValueError):
    """Raised when a filter configuration violates a structural constraint."""


class Variant(enum.IntEnum):
    """Filter variants. Integer values are the on-disk variant codes."""

    CBF = 0
    BBF = 1
    RBBF = 2
    SBF = 3
    CSBF = 4

    @classmethod
    def parse(cls, value: "Variant | str | int") -> "Variant":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                names = ", ".join(v.name for v in cls)
                raise ConfigError(f"unknown variant {value!r} (expected one of {names})")
        return cls(value)


@dataclass(frozen=True)
class FilterConfig:
    """Complete description of a filter.

    Attributes:
        variant: which addressing policy to use.
        m: requested filter size in bits. Blocked variants round up to a
            whole number of blocks.
        B: block size in bits (power of two, at least ``S``). Ignored by CBF.
        S: word size in bits, 32 or 64.
        k: number of fingerprint bits per key.
        z: number of word groups per block (CSBF only, otherwise 0).
        seed: seeds both the base hash and the salt table.
        layout: optional default bulk layout. ``None`` selects the
            per-operation host default.
    """

    variant: Variant
    m: int
    B: int = 256
    S: int = 64
    k: int = 16
    z: int = 0
    seed: int = 0
    layout: Optional[Layout] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.variant is not Variant.CSBF:
            object.__setattr__(self, "z", 0)
        self._check()

    def _check(self) -> None:
        v, m, B, S, k, z = self.variant, self.m, self.B, self.S, self.k, self.z
        if m < 1:
            raise ConfigError(f"filter size m must be positive, got {m}")
        if S not in (32, 64):
            raise ConfigError(f"word size S must be 32 or 64, got {S}")
        if k < 1:
            raise ConfigError(f"k must be at least 1, got {k}")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if v is not Variant.CBF:
            if not is_power_of_two(B):
                raise ConfigError(f"block size B must be a power of two, got {B}")
            if B < S:
                raise ConfigError(f"block size B={B} is smaller than word size S={S}")
        s = self.words_per_block
        if v is Variant.RBBF and B != S:
            raise ConfigError(f"RBBF requires B == S, got B={B}, S={S}")
        if v is Variant.SBF and (k < s or k % s):
            raise ConfigError(
                f"SBF requires k to be a positive multiple of s = B/S = {s}, got k={k}"
            )
        if v is Variant.CSBF:
            if z < 1 or z > s:
                raise ConfigError(f"CSBF requires 1 <= z <= s = {s}, got z={z}")
            if s % z:
                raise ConfigError(f"CSBF requires z to divide s = {s}, got z={z}")
            if k % z:
                raise ConfigError(f"CSBF requires k to be a multiple of z = {z}, got k={k}")
        if self.layout is not None:
            try:
                validate_layout(self.layout, s)
            except LayoutError as exc:
                raise ConfigError(f"layout {self.layout}: {exc}") from None

    # derived geometry

    @property
    def words_per_block(self) -> int:
        """``s = B/S``. CBF has no blocks; it schedules one word at a time."""
        if self.variant is Variant.CBF:
            return 1
        return self.B // self.S

    @property
    def block_count(self) -> int:
        """``b = ceil(m/B)``, or 1 for CBF."""
        if self.variant is Variant.CBF:
            return 1
        return -(-self.m // self.B)

    @property
    def m_effective(self) -> int:
        """Addressable bits: ``b*B`` for blocked variants, ``m`` for CBF."""
        if self.variant is Variant.CBF:
            return self.m
        return self.block_count * self.B

    @property
    def word_count(self) -> int:
        if self.variant is Variant.CBF:
            return -(-self.m // self.S)
        return self.block_count * self.words_per_block

    @property
    def words_per_group(self) -> int:
        return self.words_per_block // self.z if self.z else self.words_per_block

    @property
    def salt_count(self) -> int:
        """k bit salts, one block salt, then one salt per word group."""
        return self.k + 1 + self.words_per_block

    @property
    def alignment(self) -> int:
        """Storage alignment in bytes, ``min(B/8, 32)``."""
        if self.variant is Variant.CBF:
            return self.S // 8
        return min(self.B // 8, 32)

    def with_layout(self, layout: Optional[Layout]) -> "FilterConfig":
        return replace(self, layout=layout)

    def summary(self) -> dict:
        return {
            "variant": self.variant.name,
            "m_bits": self.m,
            "B": self.B,
            "S": self.S,
            "k": self.k,
            "z": self.z,
        }
