# %% [markdown]
# # Saving a filter and using it elsewhere
#
# The on-disk form is a fixed little-endian header followed by the raw words,
# so a filter built once can be shipped and queried without the original keys.

# %%
import tempfile
from pathlib import Path

import numpy as np

from blockbloom import BloomFilter, FilterConfig
from blockbloom.bench import generate_unique_keys

cfg = FilterConfig("CSBF", m=1 << 22, B=1024, S=64, k=16, z=4, seed=2024)
known = generate_unique_keys(100_000, seed=5)
unknown = generate_unique_keys(100_000, seed=5, stream=1)

built = BloomFilter(cfg)
built.bulk_add(known)

# %% write, read back, compare answers
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "users.blm"
    built.save(path)
    print(f"{path.name}: {path.stat().st_size:,} bytes for {len(known):,} keys")
    loaded = BloomFilter.load(path)

assert loaded.config == cfg
assert np.array_equal(loaded.bulk_contains(known), np.ones(len(known), bool))
print("false positives among unseen keys:", int(loaded.bulk_contains(unknown).sum()))

# %% byte-string keys work too, hashed with the same seed
loaded.add(b"alice@example.org")
print(b"alice@example.org" in loaded, b"bob@example.org" in loaded)
