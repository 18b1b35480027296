# %% [markdown]
# # Limit variances of the sample mean and the sample autocovariance
#
# Lattice sums of lag covariances are truncated at a radius chosen from the
# kernel's decay certificate, and every result carries a tail bound.

# %%
import numpy as np

from levyfield import QuadratureSpec, acov_avar, exponential, mean_avar
from levyfield.asymptotics import ALTERNATE, lag_sum_by_folding, summability_diagnostic
from levyfield.levy_basis import LevyTriplet, gaussian
from levyfield.sampling import PairWeights

quad = QuadratureSpec(0.125, 16)
ones = PairWeights({}, default=1.0)
res = mean_avar(exponential(1), 1.0, ones, quad)
print(f"sample mean: {res.value:.6f} (R={res.truncation_radius}, tail <= {res.tail_bound:.1e})")
print(f"folded route: {lag_sum_by_folding(exponential(1), 1.0, quad):.6f}")

# %% [markdown]
# The autocovariance matrix for lags 0 and 1 with two pairings of the
# Gaussian product terms. They agree except on the (1, 1) entry.

# %%
sym = LevyTriplet(jumps=((1.0, 1.0), (1.0, -1.0)))
for trip in (gaussian(2.0), sym):
    std = acov_avar(exponential(1), trip, [(0,), (1,)], ones, quad).value
    alt = acov_avar(exponential(1), trip, [(0,), (1,)], ones, quad, pairing=ALTERNATE).value
    print(np.round(std, 4), "\n", np.round(alt, 4), "\n")

# %%
rep = summability_diagnostic(exponential(1), ones, quad, [1, 2, 4, 8, 16])
for r, s, t in zip(rep.radii, rep.partial_sums, rep.tail_bounds):
    print(f"R={r:2d} partial sum {s:.6f} tail <= {t:.2e}")
