# %% [markdown]
# # Choosing how a query walks a block
#
# A layout (theta, phi) splits the s words of a block across theta lanes,
# each loading phi contiguous words per step. The choice changes memory
# access order only. It never changes which bits are set or what a query
# returns, and this script checks that directly.

# %%
import numpy as np

from blockbloom import BloomFilter, FilterConfig, Layout, enumerate_layouts
from blockbloom.bench import generate_unique_keys
from blockbloom.layout import schedule

# %% all layouts for an 8-word block, and the order in which words are visited
for lay in enumerate_layouts(8):
    print(f"theta={lay.theta} phi={lay.phi}:", [words for _, _, words in schedule(lay, 8)])

# %% every layout builds the same bit array
cfg = FilterConfig("SBF", m=1 << 20, B=512, S=64, k=16)
keys = generate_unique_keys(50_000, seed=3)
probes = generate_unique_keys(50_000, seed=3, stream=1)
reference = BloomFilter(cfg)
reference.bulk_add(keys, layout=Layout(1, 1))
answers = reference.bulk_contains(probes, layout=Layout(1, 1))
for lay in enumerate_layouts(cfg.words_per_block):
    f = BloomFilter(cfg)
    f.bulk_add(keys, layout=lay)
    same_bits = np.array_equal(f.words, reference.words)
    same_answers = np.array_equal(f.bulk_contains(probes, layout=lay), answers)
    print(f"{lay}: bits {'match' if same_bits else 'DIFFER'}, answers {'match' if same_answers else 'DIFFER'}")
