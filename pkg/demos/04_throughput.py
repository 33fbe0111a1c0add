# %% [markdown]
# # Throughput on the host
#
# Blocked variants touch one block per key, the classical filter touches up
# to k unrelated words. On a filter much larger than the caches that shows
# up as a throughput gap. Sizes here are kept modest so the script runs in
# well under a minute; raise `M` to 8 * 2**30 for the 1 GiB regime.

# %%
from blockbloom import FilterConfig
from blockbloom.bench import layout_grid_search, measure_throughput, random_access_baseline

M, K, KEYS = 8 * (1 << 26), 16, 1 << 20  # 64 MiB filter

# %% contains throughput for a classical and a sectorized filter
baseline = random_access_baseline(M // 8, "read", access_count=5_000_000)
for name, cfg in {
    "CBF": FilterConfig("CBF", m=M, k=K),
    "SBF B=256": FilterConfig("SBF", m=M, B=256, S=64, k=K),
}.items():
    rep = measure_throughput(cfg, "contains", KEYS, repetitions=3)
    print(f"{name:10s} {rep.throughput:,.0f} lookups/s  ({rep.throughput / baseline:.3f} of random reads)")

# %% which layout is fastest here? the answer depends on the host, so measure it
grid = layout_grid_search(FilterConfig("SBF", m=M, B=1024, S=64, k=K), "contains", KEYS, repetitions=2)
print(grid.table())
