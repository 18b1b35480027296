"""Limit variances for the sample mean and the sample autocovariance.

All lattice sums use the discrete lag covariance of the quadrature grid,
``gamma(l) = sigma2 delta^d sum_u V[u] V[u + l/delta]`` with ``V`` the
kernel's cell values. This is exactly the covariance of the simulated field,
so Monte Carlo comparisons only see statistical error.

Lattice sums are cut at a radius ``R`` chosen from the decay certificate:
for ``|f(x)| <= C exp(-rate |x|)`` and ``0 < eps < rate``,
``|int f(u) f(u+l) du| <= M_eps exp(-eps |l|)`` with
``M_eps = int f^2 exp(2 eps |u|)`` (Cauchy-Schwarz), which bounds the tail.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from ._summation import pairwise_sum
from .errors import DomainError, UnsupportedKernelError
from .kernels import (
    exp_outside_ball, kernel_grid, lattice_correlation, lattice_exp_tail, max_nonzero_lag, periodization_norm,
    periodized_sum, tail_rate, weighted_l2,
)
from .levy_basis import derive_moments
from .sampling import PairWeights

STANDARD, ALTERNATE = "standard", "alternate"


@dataclass(frozen=True)
class AvarResult:
    """A limit variance (scalar or matrix) with its lattice-sum truncation data."""

    value: object
    truncation_radius: int
    tail_bound: float
    term_breakdown: dict = field(default_factory=dict, repr=False)

    @property
    def relative_tail(self):
        scale = np.trace(self.value) if np.ndim(self.value) == 2 else abs(self.value)
        return self.tail_bound / scale if scale > 0 else math.inf


def _lags(d, radius):
    return list(itertools.product(range(-radius, radius + 1), repeat=d))


def _require_certificate(kernel):
    if not kernel.certified:
        raise UnsupportedKernelError(f"{kernel.name} has neither compact support nor a decay bound")


def _weight_array(weights, d, radius):
    lags = _lags(d, radius)
    w = np.array([weights.weight(l) for l in lags], dtype=np.float64)
    if np.any(np.abs(w) > 1 + 1e-12):
        raise DomainError("pair weights must be bounded by 1 in absolute value")
    return lags, w.reshape((2 * radius + 1,) * d)


def _window_error(kernel, quad):
    """``||f||_1 sup_u sum_l |a(u + l)|`` with ``a = f - f 1_{[-h,h)^d}``.

    ``sum_l int |b(u)| |a(u + l)| du`` is at most this for any ``|b| <= |f|``,
    so it controls how much cutting ``f`` to the window moves a lattice sum.
    Each lattice point ``p`` outside the window is charged to its unit cell,
    on which ``exp(-rate |x|) >= exp(-rate (|p| + sqrt(d)/2))``.
    """
    h = quad.box_halfwidth
    if kernel.support_radius <= h:
        return 0.0
    if kernel.decay_bound is None:
        return math.inf
    c, rate = kernel.decay_bound
    d = kernel.dimension
    if kernel.singular_at_origin and h < 1.5:
        return math.inf
    sup_a = c * math.exp(rate * math.sqrt(d) / 2) * exp_outside_ball(d, rate, h - 0.5)
    v = kernel_grid(kernel, quad)
    l1 = pairwise_sum(np.abs(v).ravel()) * quad.resolution**d + c * exp_outside_ball(d, rate, h)
    return l1 * sup_a


class _CertifiedTail:
    """``sum_{|l|_inf > R} |gamma(l)|`` bound from the kernel certificate.

    Every ``eps`` below the decay rate gives a valid bound; without an explicit
    ``eps`` the smallest of a few candidates is used.
    """

    CANDIDATES = (0.5, 0.75, 0.9)

    def __init__(self, kernel, sigma2, quad, eps=None):
        self.cap = max_nonzero_lag(kernel, quad)
        self.d = kernel.dimension
        self.compact = kernel.compact
        self.rates = []
        if kernel.decay_bound is not None:
            rate = kernel.decay_bound[1]
            eps_list = [tail_rate(kernel, eps)] if eps is not None else [c * rate for c in self.CANDIDATES]
            self.rates = [(e, sigma2 * weighted_l2(kernel, e, quad)) for e in eps_list]

    def __call__(self, radius):
        if radius < 0:
            return math.inf
        if self.compact and radius >= self.cap:
            return 0.0
        if not self.rates:
            return math.inf
        return min(scale * lattice_exp_tail(self.d, e, radius) for e, scale in self.rates)


def _choose_radius(tail, cap, target, start=0):
    r = start
    while r < cap and tail(r) > target:
        r += 1
    return r


# -- sample mean -------------------------------------------------------------

def mean_avar(kernel, sigma2, weights, quad, tol=1e-6, eps=None, radius=None):
    """``sum_l a_l gamma(l)`` over ``|l|_inf <= R`` plus a certified tail bound.

    ``R`` is the smallest radius whose tail bound is below ``tol * gamma(0)``,
    capped at the largest lag with nonzero discrete overlap.
    """
    _require_certificate(kernel)
    d = kernel.dimension
    tail = _CertifiedTail(kernel, sigma2, quad, eps)
    v = kernel_grid(kernel, quad)
    gamma0 = sigma2 * quad.resolution**d * pairwise_sum((v * v).ravel())
    if radius is None:
        radius = _choose_radius(tail, tail.cap, tol * abs(gamma0))
    radius = int(radius)
    k = quad.cells_per_unit
    table = sigma2 * quad.resolution**d * lattice_correlation(v, v, k, radius)
    lags, w = _weight_array(weights, d, radius)
    terms = (w * table).ravel()
    value = pairwise_sum(terms)
    tail_bound = float(weights.max_weight * (tail(radius) + 2 * sigma2 * _window_error(kernel, quad)))
    return AvarResult(value, radius, float(tail_bound), dict(zip(lags, terms.tolist())))


def lag_sum_by_folding(kernel, sigma2, quad):
    """``sum_{l in Z^d} gamma(l)`` via the unit-lattice fold of the cell values.

    ``sum_l sum_u V[u] V[u + l k] = sum_j P[j]^2`` with ``P`` the fold of ``V``
    modulo ``k`` cells; an independent route to ``mean_avar`` with ``a = 1``.
    """
    v = kernel_grid(kernel, quad)
    p = periodized_sum(v, quad.cells_per_unit)
    return sigma2 * quad.resolution**kernel.dimension * pairwise_sum((p * p).ravel())


# -- fourth moments ------------------------------------------------------------

def _centered_moments(triplet):
    mom = derive_moments(triplet)
    if mom.mean != 0:
        raise DomainError("autocovariance limits need a mean-zero basis (E L([0,1]^d) = 0)")
    if mom.sigma2 <= 0:
        raise DomainError("basis has zero variance")
    return mom


def fourth_moment(f1, f2, f3, f4, triplet, quad):
    """``E[I(f1) I(f2) I(f3) I(f4)]`` for ``I(f) = int f dL`` with a centered basis.

    ``(eta - 3) sigma^4 int f1 f2 f3 f4`` plus the three pairings
    ``sigma^4 <fi, fj><fk, fl>``.
    """
    mom = _centered_moments(triplet)
    s4 = mom.sigma2**2
    quartic = (mom.eta - 3.0) * s4
    d = f1.dimension
    vs = [kernel_grid(f, quad) for f in (f1, f2, f3, f4)]
    vol = quad.resolution**d

    def ip(a, b):
        return pairwise_sum((a * b).ravel()) * vol

    q = pairwise_sum((vs[0] * vs[1] * vs[2] * vs[3]).ravel()) * vol
    pairs = ip(vs[0], vs[1]) * ip(vs[2], vs[3]) + ip(vs[0], vs[2]) * ip(vs[1], vs[3]) \
        + ip(vs[0], vs[3]) * ip(vs[1], vs[2])
    return quartic * q + s4 * pairs


# -- autocovariance covariance --------------------------------------------------

def _shift_product(v, lag, k):
    """``g[u] = V[u] V[u + lag k]`` (zero where ``u + lag k`` leaves the grid)."""
    m = v.shape[0]
    out = np.zeros_like(v)
    src, dst = [], []
    for l in lag:
        s = l * k
        if s >= 0:
            src.append(slice(s, m))
            dst.append(slice(0, max(m - s, 0)))
        else:
            src.append(slice(0, max(m + s, 0)))
            dst.append(slice(-s, m))
    out[tuple(dst)] = v[tuple(dst)] * v[tuple(src)]
    return out


class _AcovTables:
    """Lag tables shared by every entry of the limit covariance matrix."""

    def __init__(self, kernel, triplet, lags, quad, radius):
        mom = _centered_moments(triplet)
        self.d = kernel.dimension
        self.lags = [tuple(int(x) for x in np.atleast_1d(l)) for l in lags]
        for lag in self.lags:
            if len(lag) != self.d:
                raise DomainError(f"lag {lag} does not match dimension {self.d}")
        self.radius = int(radius)
        self.s4 = mom.sigma2**2
        self.quartic = (mom.eta - 3.0) * self.s4
        k, vol = quad.cells_per_unit, quad.resolution**self.d
        v = kernel_grid(kernel, quad)
        self.shift = max((max(abs(x) for x in l) for l in self.lags), default=0)
        self.gr = self.radius + 2 * self.shift
        self.gamma = mom.sigma2 * vol * lattice_correlation(v, v, k, self.gr)
        g = {lag: _shift_product(v, lag, k) for lag in self.lags}
        self.quart = {}
        for p, q in itertools.product(self.lags, repeat=2):
            if (p, q) not in self.quart:
                self.quart[(p, q)] = vol * lattice_correlation(g[p], g[q], k, self.radius)

    def gamma_at(self, offset):
        """``gamma(l + offset)`` for every ``|l|_inf <= R`` as an array indexed by ``l + R``."""
        sl = tuple(slice(self.gr - self.radius + o, self.gr + self.radius + 1 + o) for o in offset)
        return self.gamma[sl]


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _acov_terms(tables, dp, dq, pairing):
    """``T_l`` for ``|l|_inf <= R`` as an array indexed by ``l + R``."""
    zero = (0,) * tables.d
    if pairing == STANDARD:
        prod = tables.gamma_at(zero) * tables.gamma_at(_sub(dq, dp)) \
            + tables.gamma_at(dq) * tables.gamma_at(_sub(zero, dp))
    elif pairing == ALTERNATE:
        prod = tables.gamma_at(zero) * tables.gamma_at(_sub(dp, dq)) \
            + tables.gamma_at(dp) * tables.gamma_at(dq)
    else:
        raise DomainError(f"unknown pairing {pairing!r}")
    return tables.quartic * tables.quart[(dp, dq)] + prod


def _acov_entry(tables, w, dp, dq, pairing):
    terms = (w * _acov_terms(tables, dp, dq, pairing)).ravel()
    return pairwise_sum(terms), terms


def _acov_radius(kernel, triplet, lags, quad, eps):
    _require_certificate(kernel)
    mom = _centered_moments(triplet)
    d = kernel.dimension
    shift = max((int(np.max(np.abs(np.atleast_1d(l)))) for l in lags), default=0)
    gtail = _CertifiedTail(kernel, mom.sigma2, quad, eps)
    v = kernel_grid(kernel, quad)
    gamma0 = mom.sigma2 * quad.resolution**d * pairwise_sum((v * v).ravel())
    q_coef = abs(mom.eta - 3.0) * mom.sigma2**2
    sup = kernel.sup_norm if kernel.sup_norm is not None else float(np.max(np.abs(v)))

    def tail(r):
        # |Q(l)| <= sup^2 int |f(u)| |f(u+l)| and |gamma(a) gamma(b)| <= gamma(0) |gamma(b)|
        g = gtail(r - 2 * shift) if r >= 2 * shift else math.inf
        return (q_coef * sup**2 / mom.sigma2 + 2 * gamma0) * g

    cap = gtail.cap + 2 * shift
    window = _window_error(kernel, quad)
    # cutting f to the window: four quartic factors and two gamma products
    window_err = (4 * q_coef * sup**2 + 8 * gamma0 * mom.sigma2) * window

    def total(r):
        return tail(r) + window_err

    return total, cap, gamma0


def acov_avar(kernel, triplet, lags, weights, quad, pairing=STANDARD, tol=1e-6, eps=None,
              radius=None):
    """Limit covariance matrix ``V`` of ``sqrt|Gamma_n| (gamma*_n(D_p) - gamma(D_p))_p``.

    ``v_pq = sum_l a_l [(eta-3) sigma^4 Q_pq(l) + gamma(l) gamma(l+D_q-D_p)
    + gamma(l+D_q) gamma(l-D_p)]`` with
    ``Q_pq(l) = int f(u) f(u+D_p) f(u+l) f(u+l+D_q) du``. ``pairing="alternate"``
    uses ``gamma(l) gamma(l+D_p-D_q) + gamma(l+D_p) gamma(l+D_q)`` instead.
    """
    tail, cap, gamma0 = _acov_radius(kernel, triplet, lags, quad, eps)
    if radius is None:
        radius = _choose_radius(tail, cap, tol * gamma0**2)
    tables = _AcovTables(kernel, triplet, lags, quad, radius)
    lag_list, w = _weight_array(weights, tables.d, tables.radius)
    m = len(tables.lags)
    value = np.zeros((m, m))
    breakdown = {}
    for i, j in itertools.product(range(m), repeat=2):
        val, terms = _acov_entry(tables, w, tables.lags[i], tables.lags[j], pairing)
        value[i, j] = val
        breakdown[(i, j)] = dict(zip(lag_list, terms.tolist()))
    tail_bound = float(weights.max_weight * tail(tables.radius))
    return AvarResult(value, tables.radius, tail_bound, breakdown)


def acov_cov_limit(kernel, triplet, dp, dq, weights, quad, pairing=STANDARD, tol=1e-6, eps=None,
                   radius=None, lags=None):
    """``lim |Gamma_n| cov(gamma*_n(D_p), gamma*_n(D_q)) = sum_l a_l T_l``.

    Uses the same tables and entry function as :func:`acov_avar`; pass the full
    ``lags`` list of that call to get a bit-identical entry.
    """
    dp = tuple(int(x) for x in np.atleast_1d(dp))
    dq = tuple(int(x) for x in np.atleast_1d(dq))
    lags = [dp, dq] if lags is None else lags
    tail, cap, gamma0 = _acov_radius(kernel, triplet, lags, quad, eps)
    if radius is None:
        radius = _choose_radius(tail, cap, tol * gamma0**2)
    tables = _AcovTables(kernel, triplet, lags, quad, radius)
    _, w = _weight_array(weights, tables.d, tables.radius)
    return _acov_entry(tables, w, dp, dq, pairing)[0]


# -- summability -------------------------------------------------------------

@dataclass(frozen=True)
class SummabilityReport:
    radii: tuple
    partial_sums: tuple
    tail_bounds: tuple
    plateau_ratio: float
    eps: float = None


def summability_diagnostic(kernel, weights, quad, radii, eps=None):
    """Partial sums of ``sum_l a_l int |f(u) f(u+l)| du`` over ``|l|_inf <= R``.

    Tail bounds come from the decay certificate (or are exact for compact
    kernels). ``plateau_ratio`` is the relative change between the last two
    partial sums.
    """
    _require_certificate(kernel)
    radii = sorted(int(r) for r in radii)
    d = kernel.dimension
    v = np.abs(kernel_grid(kernel, quad))
    vol = quad.resolution**d
    k = quad.cells_per_unit
    rmax = radii[-1]
    table = vol * lattice_correlation(v, v, k, rmax)
    lags, w = _weight_array(weights, d, rmax)
    contrib = np.abs(w) * table
    cap = max_nonzero_lag(kernel, quad)
    use_eps = tail_rate(kernel, eps) if kernel.decay_bound is not None else None
    m_eps = weighted_l2(kernel, use_eps, quad) if use_eps is not None else 0.0
    sums, tails = [], []
    for r in radii:
        lo = rmax - r
        sl = (slice(lo, lo + 2 * r + 1),) * d
        sums.append(pairwise_sum(contrib[sl].ravel()))
        if kernel.compact and r >= cap:
            tails.append(0.0)
        elif use_eps is not None:
            tails.append(weights.max_weight * m_eps * lattice_exp_tail(d, use_eps, r))
        else:
            tails.append(pairwise_sum(contrib.ravel()) - sums[-1] if rmax >= cap else math.inf)
    if len(sums) >= 2 and sums[-1] > 0:
        plateau = abs(sums[-1] - sums[-2]) / sums[-1]
    else:
        plateau = 0.0
    return SummabilityReport(tuple(radii), tuple(sums), tuple(tails), plateau, use_eps)


def periodization_identity(kernel, quad, tol=1e-12):
    """Both sides of ``sum_t int |f(-u) f(t-u)| du = int_{[0,1]^d} F(u)^2 du``.

    The left side is a lattice correlation of the cell values over the
    window; the right side evaluates the kernel directly on the unit cell.
    Returns ``(lhs, rhs, rhs_tail)``.
    """
    cap = max_nonzero_lag(kernel, quad)
    rep = summability_diagnostic(kernel, PairWeights({}, default=1.0), quad, [cap])
    rhs, rhs_tail = periodization_norm(kernel, quad, tol=tol, return_tail=True)
    return rep.partial_sums[-1], rhs, rhs_tail
