import json

import numpy as np
import pytest
from scipy import stats

from levyfield.errors import ConfigError, DomainError
from levyfield.harness import (
    ExperimentConfig, normality_summary, run, run_acov_clt, run_mean_clt, write_outputs,
)

BASE = {
    "triplet": {"gaussian_var": 1.0},
    "kernel": {"type": "box", "params": {"d": 1}},
    "quadrature": {"resolution": 0.25, "box_halfwidth": 2},
    "sampling": {"type": "box", "n": 8},
    "replicates": 200,
    "root_seed": 5,
}


def config(**changes):
    data = json.loads(json.dumps(BASE))
    data.setdefault("experiment", "mean_clt")
    data.update(changes)
    return ExperimentConfig.from_dict(data)


class TestNormalitySummary:
    def test_standard_normal_self_test(self):
        # each check on its own; all three jointly hold in only about 91% of seeds
        skew = kurt = ks = 0
        for seed in range(100):
            x = np.random.default_rng(seed).standard_normal(10_000)
            s = normality_summary(x, 1.0)
            skew += abs(s["skewness"]) < 0.05
            kurt += abs(s["excess_kurtosis"]) < 0.1
            ks += s["ks_pvalue"] > 0.01
        assert min(skew, kurt, ks) >= 95

    def test_constant_degenerate(self):
        s = normality_summary(np.full(50, 2.0), 1.0)
        assert s["degenerate"] and s["ks_pvalue"] is None

    def test_scale_equivariance(self):
        x = np.random.default_rng(1).standard_normal(500)
        a = normality_summary(x, 1.3)
        b = normality_summary(4.0 * x, 1.3 * 16.0)
        assert a["ks_statistic"] == pytest.approx(b["ks_statistic"], abs=1e-15)

    def test_matches_scipy(self):
        x = np.random.default_rng(2).normal(0, 2, 300)
        s = normality_summary(x, 4.0)
        assert s["ks_statistic"] == stats.kstest(x, "norm", args=(0, 2)).statistic
        assert s["variance"] == pytest.approx(np.var(x, ddof=1))

    def test_too_few(self):
        with pytest.raises(DomainError):
            normality_summary(np.zeros(29), 1.0)

    def test_exchangeable(self):
        x = np.random.default_rng(3).standard_normal(200)
        a = normality_summary(x, 1.0)
        b = normality_summary(np.random.default_rng(4).permutation(x), 1.0)
        for key in ("ks_statistic", "ks_pvalue", "variance_ratio"):
            assert a[key] == pytest.approx(b[key], rel=1e-12)


class TestConfig:
    def test_roundtrip(self):
        c = config(lags=[[0], [1]], experiment="acov_clt")
        again = ExperimentConfig.from_dict(c.to_dict())
        assert again.to_dict() == c.to_dict()

    @pytest.mark.parametrize("changes", [
        {"replicates": 0}, {"experiment": "bogus"}, {"kernel": {"type": "nope"}},
        {"kernel": {"type": "box", "d": 1}}, {"sampling": {"type": "box"}},
        {"root_seed": -1}, {"quadrature": {"resolution": 0.3, "box_halfwidth": 2}},
    ])
    def test_rejects(self, changes):
        with pytest.raises(ConfigError):
            config(**changes)

    def test_spde_zero_mean_rejected(self):
        with pytest.raises(ConfigError, match="!= 0"):
            config(experiment="spde", kernel={"type": "green3d", "params": {"mu": 1.0}},
                   triplet={"gaussian_var": 1.0}, n_grid=[2])

    def test_spde_needs_green3d(self):
        with pytest.raises(ConfigError):
            config(experiment="spde", triplet={"drift": 1.0}, n_grid=[2])


class TestRuns:
    def test_deterministic_csv(self, tmp_path):
        c = config(sampling={"type": "bernoulli", "n": 6, "p": 0.5})
        a = write_outputs(run(c), tmp_path / "a")
        b = write_outputs(run(c), tmp_path / "b")
        assert open(a[0], "rb").read() == open(b[0], "rb").read()
        ja, jb = json.load(open(a[1])), json.load(open(b[1]))
        assert ja == jb and ja["root_seed"] == 5 and ja["version"]

    def test_block_size_and_workers_invariant(self):
        c = config(replicates=70)
        ref = run_mean_clt(c).statistics
        assert np.array_equal(ref, run_mean_clt(c.with_overrides(block_size=9)).statistics)
        assert np.array_equal(ref, run_mean_clt(c.with_overrides(workers=2, block_size=16)).statistics)

    def test_seed_changes_output(self):
        a = run_mean_clt(config()).statistics
        b = run_mean_clt(config(root_seed=6)).statistics
        assert not np.array_equal(a, b)

    def test_zero_kernel_degenerate(self):
        c = config(kernel={"type": "box", "params": {"d": 1, "height": 0.0}})
        rep = run_mean_clt(c)
        assert np.all(rep.statistics == 0)
        assert rep.summary["normality"]["degenerate"]

    def test_zero_field_acov_degenerate(self):
        c = config(experiment="acov_clt", kernel={"type": "box", "params": {"d": 1, "height": 0.0}},
                   lags=[[0]])
        rep = run_acov_clt(c)
        assert rep.summary["degenerate"]

    def test_gaussian_box_mean_clt(self):
        rep = run_mean_clt(config(sampling={"type": "box", "n": 16}, replicates=5000))
        norm = rep.summary["normality"]
        assert 0.9 <= norm["variance_ratio"] <= 1.1
        assert abs(norm["skewness"]) < 0.1
        assert rep.summary["v_theory"] == pytest.approx(1.0)
        assert not rep.summary["truncation_dominated"]

    def test_acov_box_gaussian(self):
        rep = run_acov_clt(config(experiment="acov_clt", lags=[[0], [1]],
                                  sampling={"type": "box", "n": 16}, replicates=5000))
        emp = rep.summary["empirical_covariance"][0][0]
        assert abs(emp / 2.0 - 1) < 0.15

    def test_acov_compound_poisson(self):
        rep = run_acov_clt(config(experiment="acov_clt", lags=[[0], [1]],
                                  triplet={"jumps": [{"mass": 1, "size": 1}, {"mass": 1, "size": -1}]},
                                  sampling={"type": "box", "n": 16}, replicates=5000))
        assert rep.summary["v_theory"][0][0] == pytest.approx(10.0)
        assert abs(rep.summary["empirical_covariance"][0][0] / 10.0 - 1) < 0.15

    def test_acov_nonzero_mean_warns(self):
        with pytest.warns(RuntimeWarning, match="nonzero"):
            run_acov_clt(config(experiment="acov_clt", triplet={"gaussian_var": 1.0, "drift": 0.5}))

    def test_csv_layout(self, tmp_path):
        rep = run_acov_clt(config(experiment="acov_clt", lags=[[0], [1]], replicates=40))
        csv_path, _ = write_outputs(rep, tmp_path)
        lines = open(csv_path).read().splitlines()
        assert lines[0] == "replicate_index,statistic,lag_0,lag_1,degenerate_flag"
        assert len(lines) == 41
        first = lines[1].split(",")
        assert first[0] == "0" and first[1] == first[2] and first[-1] == "0"
        assert float(first[2]) == rep.statistics[0, 0]

    def test_diag(self):
        rep = run(config(experiment="diag", kernel={"type": "exp", "params": {"d": 1}},
                         quadrature={"resolution": 0.125, "box_halfwidth": 12},
                         diag={"radii": [2, 4, 8], "n_sequence": [2, 4, 8], "shifts": [[1], [2]]}))
        s = rep.summary
        assert s["folner"]["defects"][0] == {"n": 2, "shift": [1], "defect": 0.5}
        assert s["summability"]["partial_sums"] == sorted(s["summability"]["partial_sums"])
        assert s["pair_weight_convergence"][0]["weights"]["[1]"] == 0.75
