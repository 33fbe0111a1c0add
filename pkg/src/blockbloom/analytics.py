"""Closed-form accuracy formulas for the classical Bloom filter.

For blocked and sectorized variants these numbers are optimistic lower
bounds; measure those variants empirically (see :mod:`blockbloom.bench`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SizingResult",
    "capacity_for_fpr",
    "fpr_estimate",
    "min_fpr",
    "optimal_k",
    "optimal_n",
    "sizing",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SizingResult:
    c: float
    k_opt: int
    f_predicted: float
    n_opt: int


def fpr_estimate(m: float, n: float, k: int) -> float:
    """``(1 - exp(-k*n/m))**k``."""
    if m < 1 or n < 1 or k < 1:
        raise ValueError(f"m, n and k must all be >= 1 (got m={m}, n={n}, k={k})")
    # -expm1 keeps precision when k*n/m is tiny
    return (-math.expm1(-k * n / m)) ** k


def optimal_k(c: float) -> tuple[float, int]:
    """Real-valued optimum ``c*ln2`` and the best integer neighbour.

    The integer is whichever of floor/ceil gives the lower false positive
    rate at ``c`` bits per element (never below 1).
    """
    if c <= 0:
        raise ValueError(f"bits per element must be positive, got {c}")
    k_real = c * LN2
    lo = max(1, math.floor(k_real))
    hi = max(1, math.ceil(k_real))
    best = min((lo, hi), key=lambda k: (-math.expm1(-k / c)) ** k)
    return k_real, best


def min_fpr(c: float) -> float:
    """``0.5 ** (c*ln2)``, the rate reached at the real-valued optimal k."""
    if c <= 0:
        raise ValueError(f"bits per element must be positive, got {c}")
    return 0.5 ** (c * LN2)


def optimal_n(m_effective: int, k: int) -> int:
    """Element count that leaves the filter half full: ``round(m*ln2/k)``, at least 1."""
    if m_effective < 1 or k < 1:
        raise ValueError("m_effective and k must be >= 1")
    return max(1, round(m_effective * LN2 / k))


def capacity_for_fpr(m_effective: int, target_f: float) -> tuple[int, int]:
    """Largest ``n`` and its ``k`` such that the minimum rate meets ``target_f``."""
    if not 0 < target_f < 1:
        raise ValueError(f"target false positive rate must be in (0, 1), got {target_f}")
    c = -math.log(target_f) / LN2**2
    n = max(1, math.floor(m_effective / c))
    return n, optimal_k(c)[1]


def sizing(m_effective: int, k: int) -> SizingResult:
    """Load and predicted rate for ``k`` hash bits at the half-full load."""
    n = optimal_n(m_effective, k)
    c = m_effective / n
    return SizingResult(c=c, k_opt=optimal_k(c)[1], f_predicted=fpr_estimate(m_effective, n, k), n_opt=n)
