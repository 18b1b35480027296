"""Acceptance criteria A1 to A8; each test records one PASS/FAIL line in the terminal summary."""

import itertools
import math
import time

import numpy as np

from levyfield.asymptotics import fourth_moment, periodization_identity
from levyfield.field_sim import ConvolutionPlan, build_noise_grid
from levyfield.harness import ExperimentConfig, run_acov_clt, run_mean_clt, run_spde
from levyfield.kernels import QuadratureSpec, box, exponential, gauss, inner_product
from levyfield.levy_basis import LevyTriplet, derive_moments, gaussian
from levyfield.sampling import (
    bernoulli_set, box_pair_weight, box_set, folner_diagnostics, limit_weights, pair_weights,
    thresholded_ma_set,
)
from levyfield.streams import replicate_stream

SYM = LevyTriplet(0.0, 0.0, ((1.0, 1.0), (1.0, -1.0)))
SYM_SPEC = {"jumps": [{"mass": 1.0, "size": 1.0}, {"mass": 1.0, "size": -1.0}]}
BASES = {"gaussian": ({"gaussian_var": 1.0}, gaussian(1.0)), "compound_poisson": (SYM_SPEC, SYM)}


def integrals(kernels, triplet, quad, seed, count, window=4):
    """``I(f) = int f(-u) L(du)`` for each kernel, all driven by the same noise."""
    grid = build_noise_grid(triplet, window, quad.resolution, replicate_stream(seed),
                            kernels[0].dimension, count=count)
    origin = np.zeros((1, kernels[0].dimension), dtype=np.int64)
    return [ConvolutionPlan(origin, k, quad.resolution, window)(grid)[:, 0] for k in kernels]


def cov_and_se(x, y):
    p = (x - x.mean()) * (y - y.mean())
    return p.mean() * len(p) / (len(p) - 1), p.std(ddof=1) / math.sqrt(len(p))


def ratio_se(sset, lag):
    """Delta-method SE of ``sum Y_t Y_{t+l} / sum Y_t`` on a 1-d set, with lag-window covariances."""
    n, l = sset.n, lag
    y = np.zeros(2 * n)
    y[sset.points[:, 0] + n] = 1
    z = np.zeros(2 * n)
    z[: 2 * n - l] = y[: 2 * n - l] * y[l:]
    a = z.sum() / y.sum()
    r = z - a * y
    var = np.sum(r * r) + 2 * sum(np.sum(r[:-h] * r[h:]) for h in range(1, l + 3))
    return math.sqrt(max(var, 0.0)) / y.sum()


def clt_config(experiment, triplet_spec, kernel, sampling, **extra):
    data = {"experiment": experiment, "triplet": triplet_spec, "kernel": kernel,
            "quadrature": {"resolution": 0.25, "box_halfwidth": 12 if kernel["type"] == "exp" else 2},
            "sampling": sampling, "replicates": 5000, "root_seed": 20240601}
    data.update(extra)
    return ExperimentConfig.from_dict(data)


def test_a1_isometry(record_acceptance):
    t0 = time.perf_counter()
    quad = QuadratureSpec(0.25, 2)
    checks = []
    for d in (1, 2):
        f, g = box(d), box(d, lower=0.5)
        for name, (_, trip) in BASES.items():
            s2 = derive_moments(trip).sigma2
            x, y = integrals([f, g], trip, quad, seed=17 + d, count=10_000)
            for a, b, target in [(x, y, s2 * inner_product(f, g, quad)),
                                 (x, x, s2 * inner_product(f, f, quad))]:
                c, se = cov_and_se(a, b)
                checks.append((abs(c - target) < 3 * se, f"d={d} {name} cov={c:.4f} target={target:.4f}"))
    elapsed = time.perf_counter() - t0
    ok = all(c for c, _ in checks) and elapsed < 30
    record_acceptance("A1 isometry", ok, f"{len(checks)} covariances within 3 SE, {elapsed:.1f}s")
    assert ok, [m for c, m in checks if not c]


def test_a2_fourth_moment(record_acceptance):
    t0 = time.perf_counter()
    quad = QuadratureSpec(0.25, 2)
    fs = [box(1), box(1, lower=0.5), box(1, lower=0.25), box(1, lower=-0.25, width=1.5)]
    f = box(1)
    exact_gauss = fourth_moment(f, f, f, f, gaussian(1.0), quad)
    checks = [(abs(exact_gauss - 3.0) < 1e-6, f"all-box gaussian {exact_gauss!r}")]
    for name, (_, trip) in BASES.items():
        eta = derive_moments(trip).eta
        theory = fourth_moment(*fs, trip, quad)
        vals = integrals(fs, trip, quad, seed=3, count=100_000)
        prod = vals[0] * vals[1] * vals[2] * vals[3]
        se = prod.std(ddof=1) / math.sqrt(prod.size)
        checks.append((abs(prod.mean() - theory) < 3 * se,
                       f"eta={eta:g} mc={prod.mean():.4f} theory={theory:.4f} se={se:.4f}"))
    elapsed = time.perf_counter() - t0
    ok = all(c for c, _ in checks) and elapsed < 60
    record_acceptance("A2 fourth moment", ok, "; ".join(m for _, m in checks) + f", {elapsed:.1f}s")
    assert ok


def test_a3_sample_mean_clt(record_acceptance):
    t0 = time.perf_counter()
    checks = []
    kern = {"type": "exp", "params": {"d": 1}}
    for sampling in ({"type": "box", "n": 16}, {"type": "bernoulli", "n": 16, "p": 0.5}):
        for name, (spec, _) in BASES.items():
            rep = run_mean_clt(clt_config("mean_clt", spec, kern, sampling))
            s = rep.summary["normality"]
            ok = (abs(s["variance_ratio"] - 1) < 0.1 and abs(s["skewness"]) < 0.1
                  and abs(s["excess_kurtosis"]) < 0.2 and s["ks_pvalue"] > 0.01
                  and not rep.summary["truncation_dominated"])
            checks.append((ok, f"{sampling['type']}/{name} ratio={s['variance_ratio']:.3f} "
                               f"skew={s['skewness']:.3f} kurt={s['excess_kurtosis']:.3f} "
                               f"p={s['ks_pvalue']:.3f}"))
    elapsed = time.perf_counter() - t0
    ok = all(c for c, _ in checks) and elapsed < 180
    record_acceptance("A3 sample-mean CLT", ok, "; ".join(m for _, m in checks) + f", {elapsed:.1f}s")
    assert ok, checks


def _within(emp, V, frac):
    return bool(np.all(np.abs(emp - V) <= frac * np.trace(V)))


def test_a4_autocovariance_clt(record_acceptance):
    t0 = time.perf_counter()
    matrix_checks, cross, diag11 = [], [], []
    for kname in ("box", "exp"):
        kern = {"type": kname, "params": {"d": 1}}
        for name, (spec, _) in BASES.items():
            rep = run_acov_clt(clt_config("acov_clt", spec, kern, {"type": "box", "n": 16},
                                          lags=[[0], [1]]))
            emp = np.array(rep.summary["empirical_covariance"])
            V = np.array(rep.summary["v_theory"])
            Valt = np.array(rep.summary["v_theory_alternate"])
            matrix_checks.append((_within(emp, V, 0.15), f"{kname}/{name}"))
            # which pairing variants fall within the 15% band of each entry
            sel = lambda i, j: [lab for lab, M in (("standard", V), ("alternate", Valt))
                                if abs(emp[i, j] - M[i, j]) <= 0.15 * abs(M[i, j])]
            if kname == "exp":
                cross.append((sel(0, 1), f"{name} emp={emp[0, 1]:.3f} std={V[0, 1]:.3f} alt={Valt[0, 1]:.3f}"))
            diag11.append((sel(1, 1), f"{kname}/{name} emp={emp[1, 1]:.3f} std={V[1, 1]:.3f} "
                                      f"alt={Valt[1, 1]:.3f}"))
    elapsed = time.perf_counter() - t0
    mat_ok = all(c for c, _ in matrix_checks)
    cross_ok = all(len(s) == 1 for s, _ in cross)
    diag_sel = {tuple(s) for s, _ in diag11}
    detail = (f"matrices within 15%: {mat_ok}; (0,1) cross-term selections "
              f"{[s for s, _ in cross]} ({'; '.join(m for _, m in cross)}); "
              f"(1,1) selections {[s for s, _ in diag11]}; {elapsed:.1f}s")
    ok = mat_ok and cross_ok and elapsed < 240
    record_acceptance("A4 autocovariance CLT", ok, detail)
    assert mat_ok, matrix_checks
    assert elapsed < 240
    # the (1,1) entry separates the variants: every configuration must pick the same single one
    assert diag_sel == {("standard",)}, diag11
    assert cross_ok, "(0,1) cross term does not select exactly one pairing variant: " + str(cross)


def test_a5_pair_weights(record_acceptance):
    t0 = time.perf_counter()
    exact = True
    for n, d in itertools.product(range(1, 5), range(1, 4)):
        pts = [tuple(p) for p in box_set(n, d).points.tolist()]
        diffs = {}
        for t, s in itertools.product(pts, repeat=2):
            key = tuple(a - b for a, b in zip(t, s))
            diffs[key] = diffs.get(key, 0) + 1
        for lag in itertools.product(range(-3, 4), repeat=d):
            exact &= box_pair_weight(n, lag) == diffs.get(lag, 0) / len(pts)
    checks = [(exact, "box closed form equals enumeration")]
    bern = bernoulli_set(256, 1, 0.3, seed=41)
    for lag in (1, 2, 5):
        a = pair_weights(bern, [(lag,)]).weight((lag,))
        lim = limit_weights(bern, [(lag,)]).weight((lag,))
        checks.append((lim == 0.3 and abs(a - lim) < 3 * ratio_se(bern, lag), f"bernoulli l={lag} a={a:.4f}"))
    ma = thresholded_ma_set(256, 1, [((0,), 1.0), ((1,), 1.0)], 0.0, seed=42)
    a = pair_weights(ma, [(1,)]).weight((1,))
    lim = limit_weights(ma, [(1,)]).weight((1,))
    checks.append((abs(lim - 2 / 3) < 1e-12 and abs(a - lim) < 3 * ratio_se(ma, 1),
                   f"thresholded MA a={a:.4f} se={ratio_se(ma, 1):.4f}"))
    elapsed = time.perf_counter() - t0
    ok = all(c for c, _ in checks) and elapsed < 30
    record_acceptance("A5 pair weights", ok, "; ".join(m for _, m in checks) + f", {elapsed:.1f}s")
    assert ok, checks


def test_a6_periodization(record_acceptance):
    t0 = time.perf_counter()
    cases = [
        (box(1), QuadratureSpec(0.25, 2)), (box(2), QuadratureSpec(0.25, 2)),
        (exponential(1), QuadratureSpec(0.125, 16)), (exponential(2), QuadratureSpec(0.25, 16)),
        (gauss(1), QuadratureSpec(0.125, 8)), (gauss(2), QuadratureSpec(0.25, 8)),
    ]
    checks = []
    for kern, quad in cases:
        lhs, rhs, tail = periodization_identity(kern, quad)
        checks.append((abs(lhs - rhs) < 1e-3, f"{kern.name} d={kern.dimension} diff={abs(lhs - rhs):.1e}"))
    elapsed = time.perf_counter() - t0
    ok = all(c for c, _ in checks) and elapsed < 30
    record_acceptance("A6 periodization identity", ok, "; ".join(m for _, m in checks) + f", {elapsed:.1f}s")
    assert ok, checks


def test_a7_spde(record_acceptance):
    t0 = time.perf_counter()
    cfg = ExperimentConfig.from_dict({
        "experiment": "spde",
        "triplet": {"drift": 1.0, "jumps": [{"mass": 1.0, "size": 1.0}]},
        "kernel": {"type": "green3d", "params": {"mu": 1.0}},
        "quadrature": {"resolution": 0.5, "box_halfwidth": 12, "subdivisions": 8},
        "sampling": {"type": "box"}, "n_grid": [2, 4, 8], "replicates": 500, "root_seed": 7,
    })
    s = run_spde(cfg).summary
    per_n = s["per_n"]
    biases = [abs(e["bias"]) for e in per_n]
    last = per_n[-1]
    norm = last["inverse_normality"]
    checks = [
        (biases[0] > biases[1] > biases[2], f"|bias| {[round(b, 5) for b in biases]}"),
        (biases[2] < 2 * last["mu_hat_se"], f"n=8 se={last['mu_hat_se']:.5f}"),
        (abs(norm["skewness"]) < 0.15 and norm["ks_pvalue"] > 0.01,
         f"skew={norm['skewness']:.3f} p={norm['ks_pvalue']:.3f}"),
        (abs(s["integral_green"] - 1.0) < 0.02, f"int G={s['integral_green']:.5f}"),
    ]
    elapsed = time.perf_counter() - t0
    ok = all(c for c, _ in checks) and elapsed < 300
    ratio = norm["variance"] / last["v_inverse_finite_n"]
    record_acceptance("A7 SPDE estimator", ok, "; ".join(m for _, m in checks)
                      + f"; var/finite-n var={ratio:.3f}, var/limit={norm['variance_ratio']:.3f}"
                      + f", {elapsed:.1f}s")
    assert ok, checks
    assert abs(ratio - 1) < 0.2


def test_a8_folner(record_acceptance):
    t0 = time.perf_counter()
    ns = [2, 4, 8, 16, 32]
    shifts = [k for k in itertools.product(range(-2, 3), repeat=1) if any(k)]
    diag = folner_diagnostics(ns, shifts, 1)
    hand = diag.defects[(2, (1,))] == 0.5 and diag.defects[(2, (2,))] == 1.0
    mono = all(diag.defects[(a, k)] > diag.defects[(b, k)] for k in shifts for a, b in zip(ns, ns[1:]))
    small = max(diag.defects[(32, k)] for k in shifts) < 0.1
    d2 = folner_diagnostics([32], list(itertools.product(range(-2, 3), repeat=2)), 2)
    elapsed = time.perf_counter() - t0
    ok = hand and mono and small and elapsed < 5
    record_acceptance("A8 Folner diagnostics", ok,
                      f"hand={hand} monotone={mono} max n=32 defect={max(diag.defects[(32, k)] for k in shifts):.4f}"
                      f" (d=2 max {max(d2.defects.values()):.4f}), {elapsed:.2f}s")
    assert ok
