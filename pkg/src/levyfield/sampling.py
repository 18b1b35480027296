"""Sampling sets ``Gamma_n`` in ``Z^d`` and their pair weights.

Deterministic sets are the boxes ``[-n, n)^d``. Random sets keep the points
``t`` of the box where a ``{0,1}``-valued field ``Y_t`` equals one; ``Y`` is
either i.i.d. Bernoulli or a thresholded finite moving average of i.i.d.
standard normals. All randomness is point-indexed (a pure function of the
seed and the lattice point), so ``Gamma_n`` is nested in ``n``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import stats

from .errors import DegenerateError, DomainError, UnsupportedProvenanceError
from .field_sim import lattice_box, point_keys
from .streams import point_normals, point_uniforms

BOX, BERNOULLI, THRESHOLDED_MA = "box", "bernoulli", "thresholded_ma"


@dataclass(frozen=True)
class Provenance:
    kind: str
    p: float = None
    coeffs: tuple = ()
    threshold: float = None
    seed: int = None

    def to_dict(self):
        out = {"type": self.kind}
        if self.kind == BERNOULLI:
            out["p"] = self.p
        if self.kind == THRESHOLDED_MA:
            out["coeffs"] = [{"lag": list(l), "value": v} for l, v in self.coeffs]
            out["threshold"] = self.threshold
        return out


@dataclass(frozen=True, eq=False)
class SamplingSet:
    """Finite ``Gamma_n`` inside ``[-n, n)^d``, points in lexicographic order."""

    dimension: int
    n: int
    points: np.ndarray
    provenance: Provenance

    @property
    def size(self):
        return int(self.points.shape[0])

    def __len__(self):
        return self.size

    @property
    def empty(self):
        return self.size == 0

    @property
    def keys(self):
        return point_keys(self.points)

    def contains(self, points):
        return np.isin(point_keys(points), self.keys)


@dataclass(frozen=True)
class PairWeights:
    """Weights ``a_l`` by lag; lags not listed take ``default`` (when given)."""

    values: dict
    default: float = None
    source: str = "exact"
    extra: dict = field(default_factory=dict)

    def weight(self, lag):
        lag = _lag_tuple(lag)
        if lag in self.values:
            return self.values[lag]
        if self.default is None:
            raise KeyError(f"no weight for lag {lag}")
        return self.default

    __getitem__ = weight

    @property
    def max_weight(self):
        vals = list(self.values.values()) + ([self.default] if self.default is not None else [])
        return max(vals) if vals else 0.0

    def weights_on(self, lags):
        return np.array([self.weight(l) for l in lags], dtype=np.float64)


def _lag_tuple(lag):
    return tuple(int(x) for x in np.atleast_1d(lag))


def _check_nd(n, d):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n}")
    if int(d) != d or d < 1:
        raise DomainError(f"d must be an integer >= 1, got {d}")


def box_set(n, d=1):
    """All ``(2n)^d`` lattice points of ``[-n, n)^d``."""
    _check_nd(n, d)
    return SamplingSet(d, int(n), lattice_box(int(n), int(d)), Provenance(BOX))


def bernoulli_set(n, d, p, seed):
    """Keep each point of ``[-n, n)^d`` independently with probability ``p``."""
    _check_nd(n, d)
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    pts = lattice_box(int(n), int(d))
    keep = point_uniforms(seed, pts, tag="bernoulli") < p
    return SamplingSet(d, int(n), pts[keep], Provenance(BERNOULLI, p=float(p), seed=seed))


def _normalise_coeffs(coeffs, d):
    items = coeffs.items() if isinstance(coeffs, dict) else coeffs
    out = {}
    for lag, val in items:
        lag = _lag_tuple(lag)
        if len(lag) != d:
            raise DomainError(f"coefficient lag {lag} has wrong dimension")
        out[lag] = out.get(lag, 0.0) + float(val)
    return tuple(sorted((l, v) for l, v in out.items() if v != 0.0))


def thresholded_ma_field(points, coeffs, threshold, seed):
    """``Y_t = 1{sum_l a_l Z_{t-l} > threshold}`` at the given points."""
    pts = np.asarray(points, dtype=np.int64)
    m = np.zeros(len(pts))
    for lag, val in coeffs:
        m += val * point_normals(seed, pts - np.asarray(lag), tag="innovation")
    return m > threshold


def thresholded_ma_set(n, d, coeffs, threshold, seed):
    """``Gamma_n = {t in [-n, n)^d : Y_t = 1}`` for a thresholded Gaussian moving average."""
    _check_nd(n, d)
    cf = _normalise_coeffs(coeffs, d)
    if not cf:
        raise DegenerateError("moving-average coefficients are all zero")
    threshold = float(threshold)
    pts = lattice_box(int(n), int(d))
    keep = thresholded_ma_field(pts, cf, threshold, seed)
    return SamplingSet(d, int(n), pts[keep],
                       Provenance(THRESHOLDED_MA, coeffs=cf, threshold=threshold, seed=seed))


def sampling_set_from_spec(spec, d, seed=0):
    kind = spec.get("type")
    n = spec["n"]
    if kind == BOX:
        return box_set(n, d)
    if kind == BERNOULLI:
        return bernoulli_set(n, d, spec["p"], seed)
    if kind == THRESHOLDED_MA:
        coeffs = [(c["lag"], c["value"]) for c in spec["coeffs"]]
        return thresholded_ma_set(n, d, coeffs, spec.get("threshold", 0.0), seed)
    raise DomainError(f"unknown sampling type {kind!r}")


def box_pair_weight(n, lag):
    """Closed form ``prod_i max(2n - |l_i|, 0) / (2n)`` for the box ``[-n, n)^d``."""
    lag = _lag_tuple(lag)
    # integer numerator over |Gamma_n| so the value matches direct counting exactly
    return math.prod(max(2 * n - abs(l), 0) for l in lag) / (2 * n) ** len(lag)


def count_pair_weights(sset, lags):
    """``|{(t, s) in Gamma^2 : t - s = l}| / |Gamma|`` by direct counting."""
    if sset.empty:
        raise DomainError("pair weights need a nonempty set")
    keys = sset.keys
    vals = {}
    for lag in lags:
        lag = _lag_tuple(lag)
        shifted = point_keys(sset.points + np.asarray(lag, dtype=np.int64))
        vals[lag] = float(np.count_nonzero(np.isin(shifted, keys))) / sset.size
    return vals


def pair_weights(sset, lags):
    """Finite-``n`` pair weights ``a_l^n`` (closed form for boxes, counted otherwise)."""
    if sset.empty:
        raise DomainError("pair weights need a nonempty set")
    if sset.provenance.kind == BOX:
        vals = {_lag_tuple(l): box_pair_weight(sset.n, l) for l in lags}
        return PairWeights(vals, default=None, source="exact")
    return PairWeights(count_pair_weights(sset, lags), default=None, source="empirical")


def box_pair_weights_all(n, d):
    """Finite-``n`` box weights ``a_l^n`` for every lag (zero once ``|l|_inf >= 2n``)."""
    ls = np.arange(-2 * n + 1, 2 * n)
    lags = np.stack(np.meshgrid(*[ls] * d, indexing="ij"), -1).reshape(-1, d)
    num = np.prod(2 * n - np.abs(lags), axis=1)
    vals = dict(zip(map(tuple, lags.tolist()), (num / (2 * n) ** d).tolist()))
    return PairWeights(vals, default=0.0, source="exact")


# -- limits -----------------------------------------------------------------

def _ma_variance_and_corr(coeffs, lag):
    cf = dict(coeffs)
    var = sum(v * v for v in cf.values())
    lag = _lag_tuple(lag)
    cov = sum(v * cf.get(tuple(a + b for a, b in zip(k, lag)), 0.0) for k, v in cf.items())
    return var, cov / var


def _orthant(c, rho):
    """``P(U > c, V > c)`` for standard bivariate normals with correlation ``rho``."""
    if rho >= 1.0 - 1e-15:
        return float(stats.norm.sf(c))
    if c == 0.0:
        return 0.25 + math.asin(rho) / (2 * math.pi)
    # by symmetry P(U > c, V > c) = P(U < -c, V < -c)
    return float(stats.multivariate_normal.cdf([-c, -c], mean=[0.0, 0.0], cov=[[1.0, rho], [rho, 1.0]],
                                               abseps=1e-12, releps=1e-12))


def thresholded_ma_moments(coeffs, threshold, lag):
    """``(E Y_0, E Y_0 Y_l)`` for the thresholded Gaussian moving average."""
    var, rho = _ma_variance_and_corr(coeffs, lag)
    c = threshold / math.sqrt(var)
    return float(stats.norm.sf(c)), _orthant(c, rho)


def limit_weights(provenance, lags=()):
    """Limits ``a_l = lim a_l^n``: 1 for boxes, ``E Y_0 Y_l / E Y_0`` for random sets."""
    if isinstance(provenance, SamplingSet):
        provenance = provenance.provenance
    lags = [_lag_tuple(l) for l in lags]
    if provenance.kind == BOX:
        return PairWeights({l: 1.0 for l in lags}, default=1.0, source="exact")
    if provenance.kind == BERNOULLI:
        p = provenance.p
        d = len(lags[0]) if lags else 1
        vals = {l: (1.0 if not any(l) else p) for l in lags}
        vals[(0,) * d] = 1.0
        return PairWeights(vals, default=p, source="analytic", extra={"mean_y": p})
    if provenance.kind == THRESHOLDED_MA:
        cf = provenance.coeffs
        d = len(cf[0][0])
        supp = [np.asarray(l) for l, _ in cf]
        dep = {tuple(int(x) for x in a - b) for a in supp for b in supp}
        ey0, _ = thresholded_ma_moments(cf, provenance.threshold, (0,) * d)
        vals = {}
        for lag in sorted(dep | set(lags)):
            _, eyy = thresholded_ma_moments(cf, provenance.threshold, lag)
            vals[lag] = eyy / ey0
        if ey0 <= 0:
            raise DegenerateError("P(Y_0 = 1) = 0 for this threshold")
        return PairWeights(vals, default=ey0, source="analytic", extra={"mean_y": ey0})
    raise UnsupportedProvenanceError(f"no analytic limit weights for provenance {provenance.kind!r}")


# -- Følner diagnostics --------------------------------------------------------

@dataclass(frozen=True)
class FolnerDiagnostics:
    defects: dict
    tempered_ratios: dict
    tempered_constant: float


def set_defect(sset, shift):
    """``|(Gamma + k) symmetric-difference Gamma| / |Gamma|`` by enumeration."""
    if sset.empty:
        raise DomainError("defect of an empty set")
    keys = sset.keys
    moved = point_keys(sset.points + np.asarray(_lag_tuple(shift), dtype=np.int64))
    inter = np.count_nonzero(np.isin(moved, keys))
    return 2.0 * (sset.size - inter) / sset.size


def _box_difference_union_ratio(n, d):
    # -Gamma_k + Gamma_n for boxes is the box [-n-k+1, n+k-1]^d; nested in k.
    if n <= 1:
        return 0.0
    side = 2 * n + 2 * (n - 1) - 1
    return side**d / (2 * n) ** d


def folner_diagnostics(n_sequence, shifts, d):
    """Defects of the box sequence for each ``(n, shift)`` and the tempered-growth ratios."""
    defects = {}
    ratios = {}
    for n in n_sequence:
        sset = box_set(n, d)
        for k in shifts:
            defects[(int(n), _lag_tuple(k))] = set_defect(sset, k)
        ratios[int(n)] = _box_difference_union_ratio(int(n), d)
    return FolnerDiagnostics(defects, ratios, max(ratios.values()) if ratios else 0.0)
