"""Carry runways: splitting a long addition into independent pieces."""

# %%
from approxperm import LayoutParams, deviation, make_multi_runway_aep, runway_aep
from approxperm.circuits import (
    build_layout_init,
    build_piecewise_adder,
    count_costs,
    simulate_addition_sequence,
)

# %% [markdown]
# A runway of m bits at position p lets the low piece absorb its own carries.
# The high piece starts pre-decremented by the runway value, so the register
# still represents g. Only a runway already full (2^m - 1) can overflow.

# %%
P = runway_aep(n=6, p=3, m=2, k=5)
for g in (0, 3, 7):
    print(g, [P.decode(P.apply(P.encode(g, c))) for c in range(P.c_size)])
print("deviation", deviation(P).deviation)

# %% [markdown]
# Several runways are nested one piece at a time. The deviation grows at most
# linearly in their number.

# %%
layout = LayoutParams(n=10, positions=(3, 7), m=2)
for k in (1, 100, 1023):
    report = deviation(make_multi_runway_aep(layout, k))
    print(f"k={k}: deviation {report.deviation}, bound {report.bound}")

# %% [markdown]
# At the gate level every piece gets its own ripple adder, so the adders run
# side by side and the Toffoli depth tracks the longest piece.

# %%
init = build_layout_init(layout)
adder = build_piecewise_adder(layout, 77)
print("init", count_costs(init))
print("piecewise adder", count_costs(adder))

# %%
for c in range(4):
    print(c, simulate_addition_sequence(layout, [300, 400, 77], g=200, c=c))
print("expected", (200 + 300 + 400 + 77) % 1024)
