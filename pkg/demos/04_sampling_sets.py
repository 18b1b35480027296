# %% [markdown]
# # Sampling sets and pair weights
#
# Boxes, Bernoulli thinnings and thresholded Gaussian moving averages. The
# pair weight a_l^n counts pairs of points at lag l per point; it converges
# to 1 for boxes and to E Y_0 Y_l / E Y_0 for random sets.

# %%
from levyfield import bernoulli_set, box_set, folner_diagnostics, limit_weights, pair_weights
from levyfield.sampling import thresholded_ma_set

ma = [((0,), 1.0), ((1,), 1.0)]
print(" n   box a_1   bernoulli(0.3) a_1   thresholded a_1")
for n in (8, 32, 128, 512, 2048):
    b = pair_weights(box_set(n, 1), [(1,)]).weight((1,))
    r = pair_weights(bernoulli_set(n, 1, 0.3, seed=1), [(1,)]).weight((1,))
    t = pair_weights(thresholded_ma_set(n, 1, ma, 0.0, seed=2), [(1,)]).weight((1,))
    print(f"{n:5d}  {b:.4f}    {r:.4f}               {t:.4f}")

lim = limit_weights(thresholded_ma_set(4, 1, ma, 0.0, seed=2), [(1,)])
print("limits: box 1, bernoulli 0.3, thresholded", round(lim.weight((1,)), 6))

# %% [markdown]
# Box defects |(G + k) symmetric difference G| / |G| shrink like 1/n.

# %%
diag = folner_diagnostics([2, 4, 8, 16, 32], [(1,), (2,)], 1)
for (n, k), v in diag.defects.items():
    print(f"n={n:2d} shift={k}: defect {v:.4f}")
print("tempered growth constant", diag.tempered_constant)
