"""Adding a constant to a coset-encoded residue without ever reducing mod N."""

# %%
from approxperm import coset_aep, deviated_coset, deviation

# %% [markdown]
# Residues mod N are stored as g + c*N with a random c of m bits. Adding k is a
# plain addition of k on the wider register, so the only failure is the top
# coset value running past N * 2^m.

# %%
N, m, k = 5, 3, 4
P = coset_aep(N, m, k)
print(P)
for g in range(N):
    encodings = [P.encode(g, c) for c in range(P.c_size)]
    print(f"g={g}: encodings {encodings}  deviated {deviated_coset(P, g)}")

# %%
report = deviation(P)
print("per-input deviated counts:", report.per_input_deviated)
print("deviation", report.deviation, "bound", report.bound)

# %% [markdown]
# Sweeping the padding shows the deviation halving with each extra bit.

# %%
for m in range(7):
    worst = max(deviation(coset_aep(N, m, k)).deviation for k in range(N))
    print(f"m={m}: worst deviation {worst}  ({float(worst):.4f})")
