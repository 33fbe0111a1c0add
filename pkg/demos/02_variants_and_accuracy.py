# %% [markdown]
# # Five layouts of the same bits, five accuracies
#
# All variants below use the same memory and the same k. Confining a key to
# one block, one word or a few words per block makes queries cheaper and
# raises the false-positive rate. This script measures by how much.

# %%
from blockbloom import FilterConfig, fpr_estimate, optimal_n
from blockbloom.bench import measure_fpr

M, K = 1 << 22, 16
configs = {
    "CBF": FilterConfig("CBF", m=M, k=K),
    "BBF B=512": FilterConfig("BBF", m=M, B=512, S=64, k=K),
    "RBBF B=64": FilterConfig("RBBF", m=M, B=64, S=64, k=K),
    "SBF B=256": FilterConfig("SBF", m=M, B=256, S=64, k=K),
    "SBF B=1024": FilterConfig("SBF", m=M, B=1024, S=64, k=K),
    "CSBF B=1024 z=4": FilterConfig("CSBF", m=M, B=1024, S=64, k=K, z=4),
}

# %% insert the half-full load, then query 2 million keys that were never inserted
n = optimal_n(M, K)
print(f"classical estimate at n={n:,}: {fpr_estimate(M, n, K):.2e}\n")
for name, cfg in configs.items():
    r = measure_fpr(cfg, query_count=2_000_000, seed=1)
    print(f"{name:16s} fpr={r.fpr:.2e} (+-{r.stderr:.1e})  fill={r.fill_ratio:.4f}")

# %% [markdown]
# Fill ratios below 0.5 come from multiply-shift draws landing on a bit that
# the same key already set. The effect is largest where many draws share a
# small word, as in RBBF.
