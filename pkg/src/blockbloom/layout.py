"""Vectorization layouts for bulk filter execution.

A layout is the pair ``(theta, phi)``: ``theta`` lanes cooperate on one key,
and each lane handles ``phi`` contiguous words of the block per step. Lanes
stride through the block in increments of ``theta * phi`` until every word
has been visited exactly once.

Layouts only change the order in which words are fetched and updated. The
resulting filter contents and query answers never depend on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

__all__ = [
    "Layout",
    "LayoutError",
    "default_layout",
    "enumerate_layouts",
    "is_power_of_two",
    "schedule",
    "validate_layout",
    "word_assignment",
]


def is_power_of_two(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


class LayoutError(ValueError):
    """Raised for an invalid ``(theta, phi)`` pair or out-of-range lane/step."""


@dataclass(frozen=True, order=True)
class Layout:
    theta: int = 1
    phi: int = 1

    def __str__(self) -> str:
        return f"(theta={self.theta}, phi={self.phi})"

    @property
    def stride(self) -> int:
        """Words covered by all lanes in one step."""
        return self.theta * self.phi


def validate_layout(layout: Layout, s: int) -> None:
    """Check ``layout`` against a block of ``s`` words.

    Returns None when the layout is usable and raises :class:`LayoutError`
    naming the failed constraint otherwise.
    """
    if not is_power_of_two(s):
        raise LayoutError(f"words per block must be a power of two, got s={s}")
    if not is_power_of_two(layout.theta):
        raise LayoutError(f"theta must be a power of two, got {layout.theta}")
    if not is_power_of_two(layout.phi):
        raise LayoutError(f"phi must be a power of two, got {layout.phi}")
    if layout.stride > s:
        raise LayoutError(
            f"theta*phi = {layout.stride} exceeds the {s} words of a block"
        )


def enumerate_layouts(s: int) -> list[Layout]:
    """All valid layouts for ``s`` words, ordered by theta then phi."""
    if not is_power_of_two(s):
        raise LayoutError(f"words per block must be a power of two, got s={s}")
    log_s = s.bit_length() - 1
    return [
        Layout(1 << t, 1 << p)
        for t in range(log_s + 1)
        for p in range(log_s + 1 - t)
    ]


def word_assignment(layout: Layout, s: int, lane: int, step: int) -> list[int]:
    """Word indices loaded by ``lane`` at ``step``.

    The result is ``phi`` consecutive indices starting at a multiple of
    ``phi``. Over all lanes and steps the indices partition ``range(s)``.
    """
    validate_layout(layout, s)
    steps = s // layout.stride
    if not 0 <= lane < layout.theta:
        raise LayoutError(f"lane {lane} outside [0, {layout.theta})")
    if not 0 <= step < steps:
        raise LayoutError(f"step {step} outside [0, {steps})")
    start = step * layout.stride + lane * layout.phi
    return list(range(start, start + layout.phi))


def schedule(layout: Layout, s: int) -> Iterator[tuple[int, int, list[int]]]:
    """Yield ``(step, lane, words)`` in execution order."""
    validate_layout(layout, s)
    for step in range(s // layout.stride):
        for lane in range(layout.theta):
            start = step * layout.stride + lane * layout.phi
            yield step, lane, list(range(start, start + layout.phi))


def default_layout(op: str, s: int) -> Layout:
    """Host defaults: lookups load up to four words at a time, inserts one."""
    if op == "contains":
        return Layout(1, min(s, 4))
    if op == "add":
        return Layout(1, 1)
    raise ValueError(f"unknown op {op!r}; expected 'add' or 'contains'")
