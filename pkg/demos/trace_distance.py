"""How far the approximate adder lands from the ideal one on quantum inputs."""

# %%
import math

from approxperm import coset_aep, make_modular_runway_aep
from approxperm.quantum import InputDistribution, verify_many

# %% [markdown]
# The input register holds a superposition over G, spread uniformly over C.
# Comparing the state produced by the cheap permutation with the ideal one
# gives a trace distance never above twice the square root of the deviation.

# %%
for P in (coset_aep(7, 2, 3), coset_aep(7, 4, 3), make_modular_runway_aep(7, 3, (1, 3), 6)):
    inputs = [InputDistribution.uniform(P.g_size)]
    inputs += [InputDistribution.random(P.g_size, seed) for seed in range(5)]
    reports = verify_many(P, inputs)
    worst = max(r.trace_distance for r in reports)
    print(f"{P.label}\n  deviation {reports[0].deviation}, "
          f"worst T {worst:.4f}, bound {reports[0].bound:.4f}, "
          f"sqrt(dev) {math.sqrt(reports[0].deviation):.4f}")
