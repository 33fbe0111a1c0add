"""Blocked, sectorized and classical Bloom filters with layout-parametric bulk operations.

Quick start::

    import numpy as np
    from blockbloom import BloomFilter, FilterConfig

    filt = BloomFilter(FilterConfig("SBF", m=1 << 20, B=256, S=64, k=16))
    keys = np.arange(10_000, dtype=np.uint64)
    filt.bulk_add(keys)
    assert filt.bulk_contains(keys).all()
"""

from .analytics import (
    SizingResult,
    capacity_for_fpr,
    fpr_estimate,
    min_fpr,
    optimal_k,
    optimal_n,
    sizing,
)
from .config import ConfigError, FilterConfig, Variant
from .core import BloomFilter, FormatError, deserialize, new_filter, serialize
from .hashing import (
    KeyPattern,
    SaltTable,
    base_hash,
    block_index,
    hash_keys,
    make_pattern,
    make_salt_table,
)
from .layout import (
    Layout,
    LayoutError,
    enumerate_layouts,
    validate_layout,
    word_assignment,
)

__version__ = "0.1.0"
