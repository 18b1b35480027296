# %% [markdown]
# # Monte Carlo central limit experiments
#
# The harness runs replicated simulations, normalises the statistics and
# compares them with the Gaussian limit. The same runs are available from the
# command line as `levyfield mean-clt --config cfg.json --out results/`.

# %%
import numpy as np

from levyfield.harness import ExperimentConfig, run_acov_clt, run_mean_clt

base = {
    "triplet": {"jumps": [{"mass": 1.0, "size": 1.0}, {"mass": 1.0, "size": -1.0}]},
    "kernel": {"type": "exp", "params": {"d": 1}},
    "quadrature": {"resolution": 0.25, "box_halfwidth": 12},
    "sampling": {"type": "box", "n": 16},
    "replicates": 2000,
    "root_seed": 11,
}

rep = run_mean_clt(ExperimentConfig.from_dict({**base, "experiment": "mean_clt"}))
s = rep.summary
print(f"v_theory {s['v_theory']:.4f}, finite-n {s['v_finite_n']:.4f}, "
      f"empirical {s['normality']['variance']:.4f}, KS p {s['normality']['ks_pvalue']:.3f}")

# %%
cfg = ExperimentConfig.from_dict({**base, "experiment": "acov_clt", "lags": [[0], [1]],
                                  "sampling": {"type": "bernoulli", "n": 16, "p": 0.5}})
s = run_acov_clt(cfg).summary
print("empirical\n", np.round(s["empirical_covariance"], 3))
print("theory\n", np.round(s["v_theory"], 3))
