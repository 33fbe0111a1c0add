# %% [markdown]
# # Sizing a filter before building it
#
# The closed-form model answers three questions: how many bits per key a
# target false-positive rate needs, which k to pick, and what rate to expect
# for a given load.

# %%
import numpy as np

from blockbloom import capacity_for_fpr, fpr_estimate, min_fpr, optimal_k, optimal_n

# %% 1 MiB of bits holding about 840k keys is roughly 10 bits per key
m, n = 1 << 23, 840_000
c = m / n
k_real, k = optimal_k(c)
print(f"c={c:.2f} bits/key  k*={k_real:.2f} -> k={k}  predicted fpr={fpr_estimate(m, n, k):.3e}")

# %% [markdown]
# Working backwards from a target rate gives the key budget for a fixed size.

# %%
for target in (1e-2, 1e-3, 1e-4):
    n_max, k = capacity_for_fpr(m, target)
    print(f"target {target:g}: at most {n_max:,} keys with k={k} (c={m / n_max:.2f})")

# %% the best attainable rate falls off exponentially in bits per key
for c in np.arange(4, 25, 4):
    print(f"c={c:2d}  min fpr={min_fpr(c):.2e}")

# %% the half-full load used by every accuracy experiment
print("keys for a 2^25-bit filter at k=16:", optimal_n(1 << 25, 16))
