"""Replicated Monte Carlo experiments comparing simulated statistics with their limits.

Replicate ``i`` draws its noise from ``replicate_stream(root_seed, i, ...)``
and, for random sampling sets, its set from a seed derived from
``(root_seed, i)``. Replicates are processed in fixed blocks whose results
are written back by index, so the output does not depend on the block size
or on the number of worker processes.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import json
import math
import multiprocessing
import os
import warnings

import numpy as np
from scipy import stats

from . import __version__
from .asymptotics import ALTERNATE, STANDARD, acov_avar, mean_avar, summability_diagnostic
from .errors import ConfigError, DomainError
from .estimators import sample_acov, sample_mean, spde_mu_hat
from .field_sim import (
    MEMORY_BUDGET, FieldSample, build_noise_grid, lattice_box, plan_simulation,
)
from .kernels import QuadratureSpec, integral, kernel_from_spec, lag_covariance
from .levy_basis import LevyTriplet, derive_moments
from .sampling import (
    BOX, PairWeights, box_pair_weight, box_pair_weights_all, box_set, folner_diagnostics, limit_weights,
    pair_weights, sampling_set_from_spec,
)
from .streams import derive_seed, replicate_stream

EXPERIMENTS = ("mean_clt", "acov_clt", "spde", "diag")
SKIP_WARN_FRACTION = 0.01
TRUNCATION_FRACTION = 0.01


# -- configuration -----------------------------------------------------------

def _lag_list(lags, d):
    out = []
    for lag in lags:
        lag = tuple(int(x) for x in np.atleast_1d(lag))
        if len(lag) != d:
            raise ConfigError(f"lag {lag} does not match dimension {d}")
        out.append(lag)
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment description (see :meth:`from_dict` for the JSON keys)."""

    experiment: str
    triplet: LevyTriplet
    kernel_spec: dict
    quadrature: QuadratureSpec
    sampling: dict
    lags: tuple = ()
    replicates: int = 1000
    root_seed: int = 0
    n_grid: tuple = ()
    block_size: int = 32
    workers: int = 1
    window_halfwidth: int = None
    diag: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ConfigError("replicates must be an integer >= 1")
        if not 0 <= int(self.root_seed) < 2**64:
            raise ConfigError("root_seed must be a 64-bit unsigned integer")
        if self.block_size < 1 or self.workers < 1:
            raise ConfigError("block_size and workers must be >= 1")
        try:
            kern = kernel_from_spec(self.kernel_spec)
        except (TypeError, DomainError) as exc:
            raise ConfigError(f"invalid kernel spec: {exc}") from exc
        object.__setattr__(self, "_kernel", kern)
        d = kern.dimension
        object.__setattr__(self, "lags", _lag_list(self.lags or [(0,) * d], d))
        if self.experiment != "diag":
            if "n" not in self.sampling and self.experiment != "spde":
                raise ConfigError("sampling.n is required")
            if self.sampling.get("type", BOX) not in ("box", "bernoulli", "thresholded_ma"):
                raise ConfigError(f"unknown sampling type {self.sampling.get('type')!r}")
        if self.experiment == "spde":
            if d != 3 or "mu" not in kern.params:
                raise ConfigError("spde experiments need the d = 3 green3d kernel")
            if derive_moments(self.triplet).mean == 0:
                raise ConfigError("spde experiments need E L([0,1]^3) != 0")
            if not self.n_grid:
                raise ConfigError("spde experiments need a nonempty n_grid")

    @property
    def kernel(self):
        return self._kernel

    @property
    def dimension(self):
        return self._kernel.dimension

    @classmethod
    def from_dict(cls, data):
        """Build from a mapping with keys ``experiment``, ``triplet``, ``kernel``,
        ``quadrature`` (``resolution``, ``box_halfwidth``, optional ``subdivisions``),
        ``sampling`` (``type``, ``n``, ``p``, ``coeffs``, ``threshold``), ``lags``,
        ``replicates``, ``root_seed`` and for spde runs ``n_grid``."""
        data = dict(data)
        try:
            quad = QuadratureSpec(**data["quadrature"])
            triplet = LevyTriplet.from_dict(data.get("triplet", {}))
            return cls(
                experiment=str(data.get("experiment", "")).replace("-", "_"),
                triplet=triplet,
                kernel_spec=data["kernel"],
                quadrature=quad,
                sampling=dict(data.get("sampling", {"type": "box"})),
                lags=tuple(tuple(np.atleast_1d(l).tolist()) for l in data.get("lags", ())),
                replicates=int(data.get("replicates", 1000)),
                root_seed=int(data.get("root_seed", 0)),
                n_grid=tuple(int(n) for n in data.get("n_grid", ())),
                block_size=int(data.get("block_size", 32)),
                workers=int(data.get("workers", 1)),
                window_halfwidth=data.get("window_halfwidth"),
                diag=dict(data.get("diag", {})),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from exc
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def with_overrides(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes) if changes else self

    def to_dict(self):
        out = {
            "experiment": self.experiment,
            "triplet": self.triplet.to_dict(),
            "kernel": self.kernel_spec,
            "quadrature": self.quadrature.to_dict(),
            "sampling": self.sampling,
            "lags": [list(l) for l in self.lags],
            "replicates": self.replicates,
            "root_seed": self.root_seed,
            "block_size": self.block_size,
            "workers": self.workers,
        }
        if self.n_grid:
            out["n_grid"] = list(self.n_grid)
        if self.window_halfwidth is not None:
            out["window_halfwidth"] = self.window_halfwidth
        if self.diag:
            out["diag"] = self.diag
        return out


# -- normality summaries -----------------------------------------------------

def normality_summary(samples, v_theory):
    """Moments of ``samples`` and a KS test against ``N(0, v_theory)``.

    Zero sample variance or a nonpositive ``v_theory`` sets ``degenerate`` and
    skips the KS test.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 30:
        raise DomainError(f"normality summary needs at least 30 samples, got {x.size}")
    var = float(np.var(x, ddof=1))
    out = {
        "count": int(x.size),
        "mean": float(np.mean(x)),
        "variance": var,
        "v_theory": float(v_theory),
        "variance_ratio": var / v_theory if v_theory > 0 else None,
        "skewness": None,
        "excess_kurtosis": None,
        "ks_statistic": None,
        "ks_pvalue": None,
        "degenerate": False,
    }
    if var == 0 or np.ptp(x) == 0 or not v_theory > 0:
        out["degenerate"] = True
        return out
    out["skewness"] = float(stats.skew(x))
    out["excess_kurtosis"] = float(stats.kurtosis(x))
    ks = stats.kstest(x, "norm", args=(0.0, math.sqrt(v_theory)))
    out["ks_statistic"] = float(ks.statistic)
    out["ks_pvalue"] = float(ks.pvalue)
    return out


# -- replicate engine ----------------------------------------------------------

_CONTEXT = {}


def _noise_block(ctx, indices, tags=()):
    cells = [build_noise_grid(ctx["triplet"], ctx["window"], ctx["resolution"],
                              replicate_stream(ctx["seed"], i, *tags), ctx["d"],
                              memory_budget=ctx.get("budget", MEMORY_BUDGET)).cells
             for i in indices]
    return ctx["plan"].apply(np.stack(cells))


def _replicate_set(ctx, i):
    spec = ctx["sampling"]
    if spec.get("type", BOX) == BOX:
        return ctx["fixed_set"]
    return sampling_set_from_spec(spec, ctx["d"], seed=derive_seed(ctx["seed"], i, "sampling"))


def _mean_block(ctx, indices):
    field = FieldSample(ctx["plan"].points, _noise_block(ctx, indices), _sorted=True)
    stat = np.full(len(indices), np.nan)
    for b, i in enumerate(indices):
        sset = _replicate_set(ctx, i)
        if sset.empty:
            continue
        stat[b] = math.sqrt(sset.size) * (sample_mean(field.replicate(b), sset) - ctx["center"])
    return stat[:, None]


def _acov_block(ctx, indices):
    field = FieldSample(ctx["plan"].points, _noise_block(ctx, indices), _sorted=True)
    lags, gamma = ctx["lags"], ctx["gamma"]
    stat = np.full((len(indices), len(lags)), np.nan)
    for b, i in enumerate(indices):
        sset = _replicate_set(ctx, i)
        if sset.empty:
            continue
        est = sample_acov(field.replicate(b), sset, lags).as_array()
        stat[b] = math.sqrt(sset.size) * (est - gamma)
    return stat


def _spde_block(ctx, indices):
    field = FieldSample(ctx["plan"].points, _noise_block(ctx, indices, ("spde", ctx["n"])),
                        _sorted=True)
    sset = ctx["fixed_set"]
    mu_hat = spde_mu_hat(field, sset, ctx["levy_mean"])
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = math.sqrt(sset.size) * (1.0 / mu_hat - ctx["inv_target"])
    return np.stack([mu_hat, inv], axis=1)


_BLOCKS = {"mean": _mean_block, "acov": _acov_block, "spde": _spde_block}


def _run_block(kind, indices):
    return _BLOCKS[kind](_CONTEXT, indices)


def _run_replicates(ctx, kind, replicates, block_size, workers, width):
    """Evaluate all replicates; row ``i`` of the result belongs to replicate ``i``."""
    blocks = [list(range(s, min(s + block_size, replicates))) for s in range(0, replicates, block_size)]
    out = np.empty((replicates, width))
    _CONTEXT.clear()
    _CONTEXT.update(ctx)
    try:
        if workers > 1 and len(blocks) > 1 and "fork" in multiprocessing.get_all_start_methods():
            mp = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=workers, mp_context=mp) as pool:
                results = pool.map(_run_block, [kind] * len(blocks), blocks)
                for idx, res in zip(blocks, results):
                    out[idx] = res
        else:
            for idx in blocks:
                out[idx] = _run_block(kind, idx)
    finally:
        _CONTEXT.clear()
    return out


def _simulation_context(config, points):
    kern, quad = config.kernel, config.quadrature
    plan = plan_simulation(kern, points, config.lags if config.experiment == "acov_clt" else None,
                           quad, config.window_halfwidth)
    return {
        "plan": plan, "triplet": config.triplet, "window": plan.window,
        "resolution": quad.resolution, "d": kern.dimension, "seed": int(config.root_seed),
        "sampling": config.sampling,
    }


def _box_points(config, n):
    return lattice_box(int(n), config.dimension)


# -- reports -------------------------------------------------------------------

@dataclass
class CLTReport:
    """Per-replicate statistics with their summaries and the theoretical limit."""

    experiment: str
    columns: tuple
    statistics: np.ndarray
    degenerate: np.ndarray
    summary: dict
    config: ExperimentConfig = None
    extra_columns: dict = field(default_factory=dict)

    @property
    def valid(self):
        return self.statistics[~self.degenerate]

    def summary_json(self):
        out = dict(self.summary)
        out["config"] = self.config.to_dict() if self.config is not None else None
        out["version"] = __version__
        out["root_seed"] = self.config.root_seed if self.config is not None else None
        return out


def _skip_info(degenerate, replicates):
    skipped = int(np.count_nonzero(degenerate))
    info = {"replicates": replicates, "skipped": skipped, "warnings": []}
    if skipped > SKIP_WARN_FRACTION * replicates:
        msg = f"{skipped} of {replicates} replicates were degenerate and skipped"
        info["warnings"].append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
    return info


def _theory_block(result):
    value = result.value
    scale = float(np.trace(value)) if np.ndim(value) == 2 else abs(float(value))
    flagged = not (result.tail_bound < TRUNCATION_FRACTION * scale) if scale > 0 else True
    return {
        "v_theory": value.tolist() if np.ndim(value) else float(value),
        "tail_bound": float(result.tail_bound),
        "truncation_radius": int(result.truncation_radius),
        "truncation_dominated": bool(flagged),
    }


def _weights_for(config, radius_hint=None):
    spec = config.sampling
    if spec.get("type", BOX) == BOX:
        return limit_weights(box_set(1, config.dimension))
    probe = sampling_set_from_spec({**spec, "n": 1}, config.dimension, seed=0)
    return limit_weights(probe, [])


def run_mean_clt(config):
    """Normalised centred sample means ``|Gamma|^{-1/2} sum_{Gamma} (X_t - E L int f)``."""
    kern, quad, d = config.kernel, config.quadrature, config.dimension
    n = int(config.sampling["n"])
    points = _box_points(config, n)
    ctx = _simulation_context(config, points)
    mom = derive_moments(config.triplet)
    weights = _weights_for(config)
    ctx["center"] = mom.mean * integral(kern, quad)
    if config.sampling.get("type", BOX) == BOX:
        ctx["fixed_set"] = box_set(n, d)
    stats_ = _run_replicates(ctx, "mean", config.replicates, config.block_size, config.workers, 1)[:, 0]
    degenerate = ~np.isfinite(stats_)
    theory = mean_avar(kern, mom.sigma2, weights, quad)
    summary = {"experiment": "mean_clt", **_skip_info(degenerate, config.replicates),
               **_theory_block(theory)}
    valid = stats_[~degenerate]
    summary["normality"] = normality_summary(valid, theory.value) if valid.size >= 30 else None
    summary["weights_source"] = weights.source
    if config.sampling.get("type", BOX) == BOX:
        summary["v_finite_n"] = mean_avar(kern, mom.sigma2, box_pair_weights_all(n, d), quad).value
    return CLTReport("mean_clt", ("statistic",), stats_[:, None], degenerate, summary, config)


def run_acov_clt(config):
    """Normalised sample autocovariances ``sqrt|Gamma| (gamma*_n(D) - gamma(D))`` per lag."""
    kern, quad, d = config.kernel, config.quadrature, config.dimension
    mom = derive_moments(config.triplet)
    if mom.mean != 0:
        warnings.warn("basis mean is nonzero; the autocovariance limits assume E L([0,1]^d) = 0",
                      RuntimeWarning, stacklevel=2)
    n = int(config.sampling["n"])
    points = _box_points(config, n)
    ctx = _simulation_context(config, points)
    lags = config.lags
    ctx["lags"] = lags
    ctx["gamma"] = np.array([lag_covariance(kern, mom.sigma2, l, quad) for l in lags])
    if config.sampling.get("type", BOX) == BOX:
        ctx["fixed_set"] = box_set(n, d)
    stat = _run_replicates(ctx, "acov", config.replicates, config.block_size, config.workers, len(lags))
    degenerate = ~np.all(np.isfinite(stat), axis=1)
    weights = _weights_for(config)
    summary = {"experiment": "acov_clt", **_skip_info(degenerate, config.replicates),
               "lags": [list(l) for l in lags], "gamma": ctx["gamma"].tolist()}
    valid = stat[~degenerate]
    try:
        std = acov_avar(kern, config.triplet, lags, weights, quad, pairing=STANDARD)
        alt = acov_avar(kern, config.triplet, lags, weights, quad, pairing=ALTERNATE)
    except DomainError as exc:
        summary["theory_error"] = str(exc)
        std = alt = None
    if std is not None:
        summary.update(_theory_block(std))
        summary["v_theory_alternate"] = alt.value.tolist()
        V = std.value
    if valid.shape[0] >= 2:
        summary["empirical_covariance"] = np.atleast_2d(np.cov(valid, rowvar=False)).tolist()
    marg = []
    for j in range(len(lags)):
        v = float(V[j, j]) if std is not None else 0.0
        marg.append(normality_summary(valid[:, j], v) if valid.shape[0] >= 30 else None)
    summary["normality"] = marg
    summary["degenerate"] = any(m is None or m["degenerate"] for m in marg)
    cols = ("statistic",) + tuple("lag_" + "_".join(str(x) for x in l) for l in lags)
    return CLTReport("acov_clt", cols, stat, degenerate, summary, config)


def run_spde(config):
    """Replicates of the moment estimator of ``mu`` on boxes ``[-n, n)^3`` for each ``n``."""
    kern, quad = config.kernel, config.quadrature
    mom = derive_moments(config.triplet)
    mu = float(kern.params["mu"])
    c = float(kern.params.get("c", 1.0 / (4 * math.pi)))
    levy_mean = mom.mean
    # E X(0) / E L = int G = 4 pi c / mu; the default c = 1/(4 pi) gives 1/mu.
    inv_target = 4 * math.pi * c / mu
    theory = mean_avar(kern, mom.sigma2, limit_weights(box_set(1, 3)), quad)
    v_inv = theory.value / levy_mean**2
    int_f, int_tail = integral(kern, quad, return_tail=True)
    per_n, rows, flags, ns = [], [], [], []
    for n in config.n_grid:
        points = lattice_box(int(n), 3)
        ctx = _simulation_context(config, points)
        ctx.update(levy_mean=levy_mean, inv_target=inv_target, n=int(n), fixed_set=box_set(n, 3))
        res = _run_replicates(ctx, "spde", config.replicates, config.block_size, config.workers, 2)
        mu_hat, inv = res[:, 0], res[:, 1]
        deg = ~np.isfinite(mu_hat)
        good = mu_hat[~deg]
        entry = {
            "n": int(n), "set_size": (2 * int(n)) ** 3, **_skip_info(deg, config.replicates),
            "mu_hat_mean": float(np.mean(good)) if good.size else None,
            "mu_hat_se": float(np.std(good, ddof=1) / math.sqrt(good.size)) if good.size > 1 else None,
        }
        entry["bias"] = entry["mu_hat_mean"] - mu if good.size else None
        finite = mean_avar(kern, mom.sigma2, box_pair_weights_all(int(n), 3), quad)
        entry["v_inverse_finite_n"] = finite.value / levy_mean**2
        valid_inv = inv[~deg]
        entry["inverse_normality"] = normality_summary(valid_inv, v_inv) if valid_inv.size >= 30 else None
        mu_scaled = math.sqrt(entry["set_size"]) * (good - mu)
        # delta method: sqrt|G| (mu_hat - mu) ~ N(0, mu^4 v_inv) when int G = 1/mu
        entry["mu_hat_normality"] = (normality_summary(mu_scaled, v_inv * mu**4)
                                     if good.size >= 30 else None)
        per_n.append(entry)
        rows.append(res)
        flags.append(deg)
        ns.append(np.full(config.replicates, int(n)))
    summary = {
        "experiment": "spde", "mu": mu, "levy_mean": levy_mean,
        "integral_green": float(int_f), "integral_tail": float(int_tail),
        "inverse_target": inv_target, **_theory_block(theory), "v_inverse": float(v_inv),
        "per_n": per_n, "skipped": int(sum(int(np.count_nonzero(f)) for f in flags)),
    }
    allrows = np.concatenate(rows)
    report = CLTReport("spde", ("statistic", "mu_hat"), allrows[:, [1, 0]],
                       np.concatenate(flags), summary, config,
                       extra_columns={"n": np.concatenate(ns)})
    return report


def run_diag(config):
    """Summability partial sums, box defects and pair-weight convergence tables."""
    kern, quad, d = config.kernel, config.quadrature, config.dimension
    diag = config.diag
    radii = diag.get("radii", [1, 2, 4, 8])
    n_seq = diag.get("n_sequence", [2, 4, 8, 16, 32])
    shifts = [tuple(s) for s in diag.get("shifts", [[1] * d])]
    weights = PairWeights({}, default=1.0)
    summ = summability_diagnostic(kern, weights, quad, radii)
    fol = folner_diagnostics(n_seq, shifts, d)
    conv = []
    for n in n_seq:
        sset = sampling_set_from_spec({**config.sampling, "n": n}, d,
                                      seed=derive_seed(config.root_seed, 0, "sampling"))
        if sset.empty:
            conv.append({"n": n, "empty": True})
            continue
        pw = pair_weights(sset, shifts)
        conv.append({"n": n, "size": sset.size,
                     "weights": {str(list(k)): v for k, v in pw.values.items()},
                     "box_formula": {str(list(k)): box_pair_weight(n, k) for k in shifts}})
    summary = {
        "experiment": "diag",
        "summability": {"radii": list(summ.radii), "partial_sums": list(summ.partial_sums),
                        "tail_bounds": list(summ.tail_bounds), "plateau_ratio": summ.plateau_ratio,
                        "eps": summ.eps},
        "folner": {"defects": [{"n": n, "shift": list(k), "defect": v}
                               for (n, k), v in fol.defects.items()],
                   "tempered_ratios": {str(k): v for k, v in fol.tempered_ratios.items()},
                   "tempered_constant": fol.tempered_constant},
        "pair_weight_convergence": conv,
        "skipped": 0,
    }
    return CLTReport("diag", (), np.zeros((0, 0)), np.zeros(0, bool), summary, config)


RUNNERS = {"mean_clt": run_mean_clt, "acov_clt": run_acov_clt, "spde": run_spde, "diag": run_diag}


def run(config):
    return RUNNERS[config.experiment](config)


def _fmt(x):
    return "nan" if not np.isfinite(x) else repr(float(x))


def write_outputs(report, out_dir):
    """Write ``replicates.csv`` and ``summary.json`` into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "replicates.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        extra = list(report.extra_columns)
        w.writerow(["replicate_index", *extra, *report.columns, "degenerate_flag"])
        stat = report.statistics
        for i in range(stat.shape[0]):
            row = [i] + [int(report.extra_columns[k][i]) for k in extra]
            vals = list(stat[i])
            if report.experiment == "acov_clt":
                vals = [vals[0]] + vals
            row += [_fmt(v) for v in vals]
            row.append(int(report.degenerate[i]))
            w.writerow(row)
    json_path = os.path.join(out_dir, "summary.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report.summary_json()), fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return csv_path, json_path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
