"""Cost of n^2 additions: ripple-carry baselines against runway adders."""

# %%
from approxperm.costs import AdderKind, CostParams, estimate, lowest_volume, sweep

# %% [markdown]
# A 4000-bit register with runways every 1000 bits, each 40 bits long, doing a
# million additions.

# %%
report = estimate(4000, AdderKind("runway", 1000), m=40, k=10 ** 6)
print(f"toffolis {report.toffoli_count:,}")
print(f"measurement depth {report.depth_low:,} .. {report.depth_high:,}")
print(f"trace distance at most {report.trace_bound:.4%}")

# %% [markdown]
# Sweeping register sizes under the default physical model. Runway lengths are
# chosen automatically to stay within the trace distance budget.

# %%
kinds = [AdderKind.parse(x) for x in ("ripple", "temp-and", "lookahead", "runway:256", "runway:512")]
params = CostParams()
for modular in (False, True):
    best = lowest_volume(sweep([1 << j for j in range(6, 15)], kinds, params, modular=modular))
    print("modular" if modular else "plain")
    for n, r in best.items():
        print(f"  n={n:5d}  {AdderKind(r.kind, r.spacing)!s:12s}  m={r.m:2d}  volume {r.volume:.3g}")
