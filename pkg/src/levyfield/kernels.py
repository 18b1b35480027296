"""Kernel functions and the midpoint-rule quadrature used for all kernel integrals.

Every integral is approximated on the uniform cell grid of edge ``delta``
covering ``[-h, h)^d`` with lattice points at cell corners. The same grid
(the *cell values* of a kernel) drives the field simulator, so simulated
moments and quadrature formulas share their discretisation exactly.

Cell values are midpoint evaluations, optionally averaged over
``subdivisions**d`` sub-cells. For kernels that are singular at the origin
the ``2**d`` cells touching the origin use the kernel's analytic cell average
when it provides one, otherwise a point shifted ``delta/4`` further out.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
import itertools
import math
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special
from scipy.signal import fftconvolve

from ._summation import pairwise_sum
from .errors import DomainError, UnsupportedKernelError

#: Number of cells above which grids are evaluated slab by slab.
SLAB_CELLS = 1 << 22


@dataclass(frozen=True, eq=False)
class Kernel:
    """A kernel ``f: R^d -> R`` plus the metadata the numerics rely on.

    ``evaluator`` maps an array of shape ``(..., d)`` to shape ``(...)``.
    ``support_radius`` ``r`` certifies ``f = 0`` outside ``[-r, r)^d``.
    ``decay_bound = (C, eps)`` certifies ``|f(x)| <= C exp(-eps |x|)``, for all
    ``x`` or, for singular kernels, for ``|x| >= 1``. ``radial`` is the profile
    ``rho -> f`` when ``f`` depends only on ``|x|``. ``cell_average(delta)`` is
    the mean of ``f`` over ``[0, delta]^d`` (used for the cells touching a
    singular origin, so it must be reflection symmetric).
    """

    dimension: int
    evaluator: Callable
    support_radius: float = math.inf
    decay_bound: Optional[tuple] = None
    singular_at_origin: bool = False
    name: str = "kernel"
    radial: Optional[Callable] = None
    cell_average: Optional[Callable] = None
    sup_norm: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dimension}")
        if self.decay_bound is not None:
            c, eps = self.decay_bound
            if not (c >= 0 and eps > 0):
                raise DomainError(f"invalid decay bound {self.decay_bound}")

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        return f"Kernel({self.name}, d={self.dimension})"

    @property
    def compact(self):
        return math.isfinite(self.support_radius)

    @property
    def certified(self):
        """True when lattice sums over this kernel have a certified tail."""
        return self.compact or self.decay_bound is not None


@dataclass(frozen=True)
class QuadratureSpec:
    """Cell edge ``resolution`` (``1/resolution`` an integer) and window half-width."""

    resolution: float
    box_halfwidth: float
    subdivisions: int = 1

    def __post_init__(self):
        if not self.resolution > 0:
            raise DomainError("resolution must be > 0")
        k = round(1.0 / self.resolution)
        if k < 1 or abs(1.0 / self.resolution - k) > 1e-9 * k:
            raise DomainError(f"1/resolution must be a positive integer, got {1 / self.resolution}")
        m = self.box_halfwidth * k
        if not self.box_halfwidth > 0 or abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise DomainError("box_halfwidth must be a positive multiple of resolution")
        if int(self.subdivisions) != self.subdivisions or self.subdivisions < 1:
            raise DomainError("subdivisions must be a positive integer")
        object.__setattr__(self, "resolution", 1.0 / k)

    @property
    def cells_per_unit(self):
        return round(1.0 / self.resolution)

    @property
    def cells_per_side(self):
        return round(2 * self.box_halfwidth * self.cells_per_unit)

    @property
    def cell_volume_1d(self):
        return self.resolution

    def with_halfwidth(self, h):
        return replace(self, box_halfwidth=h)

    def to_dict(self):
        return {"resolution": self.resolution, "box_halfwidth": self.box_halfwidth,
                "subdivisions": self.subdivisions}


@dataclass(frozen=True)
class LagCovariance:
    lag: tuple
    value: float


# -- construction ----------------------------------------------------------

def _norm(x):
    return np.sqrt(np.sum(np.square(x), axis=-1))


def box(d=1, lower=0.0, width=1.0, height=1.0):
    """``height * 1_{[lower, lower + width)^d}``."""
    lower, width, height = float(lower), float(width), float(height)
    if width <= 0:
        raise DomainError("box width must be > 0")
    upper = lower + width

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        inside = np.all((x >= lower) & (x < upper), axis=-1)
        return np.where(inside, height, 0.0)

    r = max(-lower, upper, 0.0)
    return Kernel(d, f, support_radius=r, decay_bound=None, name="box",
                  sup_norm=abs(height),
                  params={"d": d, "lower": lower, "width": width, "height": height})


def exponential(d=1, rate=1.0, amplitude=1.0):
    """``amplitude * exp(-rate |x|)``."""
    rate, amplitude = float(rate), float(amplitude)
    if rate <= 0:
        raise DomainError("rate must be > 0")

    def profile(r):
        return amplitude * np.exp(-rate * np.asarray(r))

    return Kernel(d, lambda x: profile(_norm(np.asarray(x, dtype=np.float64))),
                  decay_bound=(abs(amplitude), rate), name="exp", radial=profile,
                  sup_norm=abs(amplitude), params={"d": d, "rate": rate, "amplitude": amplitude})


def gauss(d=1, scale=1.0, amplitude=1.0):
    """``amplitude * exp(-|x|^2 / (2 scale^2))``; decays like ``e^{1/2} exp(-|x|/scale)``."""
    scale, amplitude = float(scale), float(amplitude)
    if scale <= 0:
        raise DomainError("scale must be > 0")

    def profile(r):
        r = np.asarray(r)
        return amplitude * np.exp(-0.5 * (r / scale) ** 2)

    return Kernel(d, lambda x: profile(_norm(np.asarray(x, dtype=np.float64))),
                  decay_bound=(abs(amplitude) * math.exp(0.5), 1.0 / scale), name="gauss",
                  radial=profile, sup_norm=abs(amplitude),
                  params={"d": d, "scale": scale, "amplitude": amplitude})


@lru_cache(maxsize=64)
def _yukawa_cube_integral(a):
    """``int_{[0,1]^3} exp(-a|s|)/|s| ds`` by splitting the cube into six pyramids."""

    def radial(p):
        if a == 0:
            return 0.5 * p * p
        return -math.expm1(-a * p) / a**2 - p * math.exp(-a * p) / a

    def integrand(theta, phi):
        return radial(1.0 / math.cos(theta)) * math.sin(theta)

    val, _ = integrate.dblquad(integrand, 0.0, math.pi / 4,
                               0.0, lambda phi: math.atan(1.0 / math.cos(phi)),
                               epsabs=1e-13, epsrel=1e-12)
    return 6.0 * val


def green3d(mu=1.0, c=1.0 / (4 * math.pi)):
    """``c * exp(-sqrt(mu) |x|) / |x|`` in d = 3, the Green kernel of ``mu - Laplacian``.

    With the default ``c = 1/(4 pi)`` the kernel integrates to ``1/mu``.
    """
    mu, c = float(mu), float(c)
    if mu <= 0:
        raise DomainError("mu must be > 0")
    a = math.sqrt(mu)

    def profile(r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return c * np.exp(-a * r) / r

    def cell_average(delta):
        return c * _yukawa_cube_integral(a * delta) / delta

    return Kernel(3, lambda x: profile(_norm(np.asarray(x, dtype=np.float64))),
                  decay_bound=(abs(c), a), singular_at_origin=True, name="green3d",
                  radial=profile, cell_average=cell_average,
                  params={"mu": mu, "c": c})


def truncate(kernel, h):
    """``f * 1_{[-h, h)^d}``."""
    h = float(h)
    if not h > 0:
        raise DomainError("truncation half-width must be > 0")
    f = kernel.evaluator

    def g(x):
        x = np.asarray(x, dtype=np.float64)
        inside = np.all((x >= -h) & (x < h), axis=-1)
        out = np.zeros(x.shape[:-1])
        if np.any(inside):
            out[inside] = f(x[inside])
        return out

    return replace(kernel, evaluator=g, support_radius=min(kernel.support_radius, h),
                   radial=None, name=f"{kernel.name}|h={h:g}",
                   params={**kernel.params, "truncation": h})


def scaled(kernel, alpha):
    """``alpha * f``."""
    alpha = float(alpha)
    f = kernel.evaluator
    db = None if kernel.decay_bound is None else (abs(alpha) * kernel.decay_bound[0], kernel.decay_bound[1])
    rad = None if kernel.radial is None else (lambda r: alpha * kernel.radial(r))
    avg = None if kernel.cell_average is None else (lambda dl: alpha * kernel.cell_average(dl))
    sup = None if kernel.sup_norm is None else abs(alpha) * kernel.sup_norm
    return replace(kernel, evaluator=lambda x: alpha * f(x), decay_bound=db, radial=rad,
                   cell_average=avg, sup_norm=sup, name=f"{alpha:g}*{kernel.name}")


def absolute(kernel):
    """``|f|``."""
    f = kernel.evaluator
    rad = None if kernel.radial is None else (lambda r: np.abs(kernel.radial(r)))
    avg = None if kernel.cell_average is None else (lambda dl: abs(kernel.cell_average(dl)))
    return replace(kernel, evaluator=lambda x: np.abs(f(x)), radial=rad, cell_average=avg,
                   name=f"|{kernel.name}|")


def shifted(kernel, offset):
    """``x -> f(x - offset)``. Not available for kernels singular at the origin."""
    if kernel.singular_at_origin:
        raise UnsupportedKernelError("cannot shift a kernel with a singular origin")
    offset = np.asarray(offset, dtype=np.float64).reshape(kernel.dimension)
    f = kernel.evaluator
    shift_inf = float(np.max(np.abs(offset)))
    db = None
    if kernel.decay_bound is not None:
        c, eps = kernel.decay_bound
        db = (c * math.exp(eps * float(np.linalg.norm(offset))), eps)
    return replace(kernel, evaluator=lambda x: f(np.asarray(x, dtype=np.float64) - offset),
                   support_radius=kernel.support_radius + shift_inf, decay_bound=db,
                   radial=None, cell_average=None,
                   name=f"{kernel.name}(.-{offset.tolist()})")


def evaluate(kernel, x):
    """``f(x)`` for a point ``x`` (or an array of points with trailing axis ``d``)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != kernel.dimension:
        raise DomainError(f"point dimension {x.shape[-1]} != kernel dimension {kernel.dimension}")
    if kernel.singular_at_origin and np.any(np.all(x == 0, axis=-1)):
        raise DomainError(f"{kernel.name} is singular at the origin")
    out = np.asarray(kernel.evaluator(x), dtype=np.float64)
    return float(out) if out.ndim == 0 else out


# -- cell grids -----------------------------------------------------------

def cell_midpoints(halfwidth, resolution):
    """Midpoints of the cells of edge ``resolution`` tiling ``[-halfwidth, halfwidth)``."""
    k = round(1.0 / resolution)
    m = round(2 * halfwidth * k)
    return -halfwidth + (np.arange(m) + 0.5) / k


def _grid_points(axes):
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def _cell_slab(kernel, halfwidth, resolution, subdivisions, rows):
    """Cell values for the cells whose first index lies in ``rows`` (a ``range``)."""
    d = kernel.dimension
    k = round(1.0 / resolution)
    mids = cell_midpoints(halfwidth, resolution)
    first = mids[rows.start:rows.stop]
    s = int(subdivisions)
    sub = (np.arange(s) + 0.5) / (s * k) - 0.5 / k
    out = np.zeros((len(first),) + (len(mids),) * (d - 1))
    for offs in itertools.product(sub, repeat=d):
        axes = [first + offs[0]] + [mids + o for o in offs[1:]]
        out += kernel.evaluator(_grid_points(axes))
    out /= s**d
    if kernel.singular_at_origin:
        centre = round(halfwidth * k)
        for corner in itertools.product((centre - 1, centre), repeat=d):
            if rows.start <= corner[0] < rows.stop:
                idx = (corner[0] - rows.start,) + corner[1:]
                if kernel.cell_average is not None:
                    out[idx] = kernel.cell_average(resolution)
                else:
                    mid = np.array([mids[c] for c in corner])
                    out[idx] = kernel.evaluator((mid + np.sign(mid) * 0.25 / k)[None, :])[0]
    return out


def _slab_rows(kernel, m):
    per_row = m ** (kernel.dimension - 1)
    step = max(1, SLAB_CELLS // max(per_row, 1))
    for start in range(0, m, step):
        yield range(start, min(m, start + step))


def cell_values(kernel, resolution, halfwidth, subdivisions=1):
    """Array of shape ``(m,)*d`` with the kernel's cell values on ``[-halfwidth, halfwidth)^d``."""
    k = round(1.0 / resolution)
    m = round(2 * halfwidth * k)
    return _cell_slab(kernel, halfwidth, resolution, subdivisions, range(0, m))


@lru_cache(maxsize=32)
def _cached_grid(kernel, resolution, halfwidth, subdivisions):
    arr = cell_values(kernel, resolution, halfwidth, subdivisions)
    arr.setflags(write=False)
    return arr


def kernel_grid(kernel, quad):
    """Cached cell values of ``kernel`` over the quadrature window (read-only)."""
    return _cached_grid(kernel, quad.resolution, quad.box_halfwidth, quad.subdivisions)


# -- certificate arithmetic ---------------------------------------------------

def sphere_area(d):
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def exp_outside_ball(d, rate, radius):
    """``int_{|x| >= radius} exp(-rate |x|) dx``."""
    return sphere_area(d) * math.gamma(d) * special.gammaincc(d, rate * radius) / rate**d


def lattice_exp_tail(d, eps, radius):
    """``sum_{l in Z^d, |l|_inf > radius} exp(-eps |l|_inf)``, an upper bound for ``exp(-eps |l|)``."""
    radius = int(radius)
    kmax = radius + 1 + int(math.ceil(80.0 / eps))
    ks = np.arange(radius + 1, kmax + 1, dtype=np.float64)
    shells = (2 * ks + 1) ** d - (2 * ks - 1) ** d
    return pairwise_sum(shells * np.exp(-eps * ks))


def tail_rate(kernel, eps=None):
    """Exponential rate used for lattice-sum tails: ``eps`` or half the kernel's decay rate."""
    if kernel.decay_bound is None:
        raise UnsupportedKernelError(f"{kernel.name} has no decay certificate")
    rate = kernel.decay_bound[1]
    eps = 0.5 * rate if eps is None else float(eps)
    if not 0 < eps < rate:
        raise DomainError(f"tail rate must lie in (0, {rate}), got {eps}")
    return eps


def weighted_l2(kernel, eps, quad=None):
    """``int f(u)^2 exp(2 eps |u|) du``, finite for ``eps`` below the decay rate.

    Sum over lattice lags: ``sum_l int |f(u) f(u+l)| du <= weighted_l2 * sum_l exp(-eps |l|)``.
    """
    d = kernel.dimension
    if kernel.radial is not None:
        area = sphere_area(d)

        def integrand(r):
            f = float(kernel.radial(r))
            if f == 0.0:
                return 0.0
            return math.exp(2 * (math.log(abs(f)) + eps * r)) * r ** (d - 1)

        upper = math.inf if not kernel.compact else kernel.support_radius * math.sqrt(d)
        val, _ = integrate.quad(integrand, 0.0, upper, limit=400)
        return area * val
    if quad is None:
        raise UnsupportedKernelError("non-radial kernel needs a quadrature spec for its weighted norm")
    h = quad.box_halfwidth
    vals = kernel_grid(kernel, quad)
    mids = cell_midpoints(h, quad.resolution)
    r = _norm(_grid_points([mids] * d))
    inside = pairwise_sum((vals**2 * np.exp(2 * eps * r)).ravel()) * quad.resolution**d
    outside = 0.0
    if kernel.support_radius > h:
        if kernel.decay_bound is None:
            return math.inf
        c, rate = kernel.decay_bound
        outside = c**2 * exp_outside_ball(d, 2 * (rate - eps), h)
    return inside + outside


def truncation_l2(kernel, h):
    """Upper bound on ``||f - f 1_{[-h,h)^d}||_{L^2}``."""
    if kernel.support_radius <= h:
        return 0.0
    if kernel.decay_bound is None:
        return math.inf
    c, rate = kernel.decay_bound
    return math.sqrt(c**2 * exp_outside_ball(kernel.dimension, 2 * rate, h))


def _window_tail(f, g, h):
    if f.support_radius <= h or g.support_radius <= h:
        return 0.0
    d = f.dimension
    if f.decay_bound is not None and g.decay_bound is not None:
        (cf, ef), (cg, eg) = f.decay_bound, g.decay_bound
        return cf * cg * exp_outside_ball(d, ef + eg, h)
    for a, b in ((f, g), (g, f)):
        if a.decay_bound is not None and b.sup_norm is not None:
            ca, ea = a.decay_bound
            return ca * b.sup_norm * exp_outside_ball(d, ea, h)
    return math.inf


# -- quadrature ---------------------------------------------------------------

def _check_dims(*kernels):
    dims = {k.dimension for k in kernels}
    if len(dims) != 1:
        raise DomainError(f"kernels have different dimensions {sorted(dims)}")


def inner_product(f, g, quad, return_tail=False):
    """Midpoint approximation of ``int_{[-h,h)^d} f g``; ``return_tail`` adds the window-tail bound."""
    _check_dims(f, g)
    h, dl, s = quad.box_halfwidth, quad.resolution, quad.subdivisions
    m = quad.cells_per_side
    d = f.dimension
    partial = []
    for rows in _slab_rows(f, m):
        a = _cell_slab(f, h, dl, s, rows)
        b = a if g is f else _cell_slab(g, h, dl, s, rows)
        partial.append(pairwise_sum((a * b).ravel()))
    value = pairwise_sum(partial) * dl**d
    if return_tail:
        return value, _window_tail(f, g, h)
    return value


def integral(kernel, quad, return_tail=False):
    """Midpoint approximation of ``int_{[-h,h)^d} f``."""
    h, dl, s = quad.box_halfwidth, quad.resolution, quad.subdivisions
    m = quad.cells_per_side
    partial = [pairwise_sum(_cell_slab(kernel, h, dl, s, rows).ravel())
               for rows in _slab_rows(kernel, m)]
    value = pairwise_sum(partial) * dl**kernel.dimension
    if not return_tail:
        return value
    if kernel.support_radius <= h:
        tail = 0.0
    elif kernel.decay_bound is not None:
        c, rate = kernel.decay_bound
        tail = c * exp_outside_ball(kernel.dimension, rate, h)
    else:
        tail = math.inf
    return value, tail


def _lag_slices(shift, m):
    """Slices pairing ``A[u]`` with ``B[u + shift]`` on one axis."""
    if shift >= 0:
        return slice(0, max(m - shift, 0)), slice(shift, m)
    return slice(-shift, m), slice(0, max(m + shift, 0))


def lattice_correlation(a, b, step, radius, method="auto"):
    """``C[l] = sum_u a[u] b[u + step*l]`` for integer lags ``|l|_inf <= radius``.

    Returns an array of shape ``(2*radius+1,)*d`` indexed by ``l + radius``.
    Small tables use direct overlapped products; large ones an FFT correlation.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d, m = a.ndim, a.shape[0]
    radius = int(radius)
    n_lags = (2 * radius + 1) ** d
    if method == "auto":
        method = "direct" if n_lags * a.size <= 3e7 else "fft"
    out = np.zeros((2 * radius + 1,) * d)
    if method == "direct":
        for lag in itertools.product(range(-radius, radius + 1), repeat=d):
            sa, sb = zip(*(_lag_slices(l * step, m) for l in lag))
            prod = a[sa] * b[sb]
            out[tuple(l + radius for l in lag)] = pairwise_sum(prod.ravel()) if prod.size else 0.0
        return out
    full = fftconvolve(b, a[(slice(None, None, -1),) * d], mode="full")
    # full[k + m - 1] = sum_u a[u] b[u + k]
    idx = np.arange(-radius, radius + 1) * step + (m - 1)
    valid = (idx >= 0) & (idx < 2 * m - 1)
    take = np.where(valid, idx, 0)
    sub = full[np.ix_(*([take] * d))]
    mask = valid
    for _ in range(d - 1):
        mask = np.multiply.outer(mask, valid)
    out[...] = np.where(mask, sub, 0.0)
    return out


def max_nonzero_lag(kernel, quad):
    """Largest ``|l|_inf`` with possibly nonzero overlap of the window-truncated kernel."""
    r = min(kernel.support_radius, quad.box_halfwidth)
    return max(int(math.ceil(2 * r)) - 1, 0)


def lag_covariance(kernel, sigma2, lag, quad):
    """``sigma2 * int f(v) f(v + lag) dv`` for the kernel truncated to the window."""
    if sigma2 < 0:
        raise DomainError("sigma2 must be >= 0")
    lag = tuple(int(x) for x in np.atleast_1d(lag))
    if len(lag) != kernel.dimension:
        raise DomainError("lag dimension mismatch")
    v = kernel_grid(kernel, quad)
    k, m = quad.cells_per_unit, quad.cells_per_side
    sa, sb = zip(*(_lag_slices(l * k, m) for l in lag))
    prod = v[sa] * v[sb]
    total = pairwise_sum(prod.ravel()) if prod.size else 0.0
    return sigma2 * total * quad.resolution**kernel.dimension


def lag_covariance_table(kernel, sigma2, quad, radius, method="auto"):
    """Array of ``gamma(l)`` for ``|l|_inf <= radius`` (index ``l + radius``)."""
    v = kernel_grid(kernel, quad)
    table = lattice_correlation(v, v, quad.cells_per_unit, radius, method=method)
    return sigma2 * quad.resolution**kernel.dimension * table


def periodization_norm(kernel, quad, tol=1e-12, return_tail=False):
    """``int_{[0,1]^d} F(u)^2 du`` with ``F(u) = sum_{t in Z^d} |f(u + t)|``.

    The lattice sum is truncated at ``|t|_inf <= T`` with ``T`` taken from the
    support radius or the decay certificate.
    """
    d = kernel.dimension
    if kernel.compact:
        T = int(math.ceil(kernel.support_radius)) + 1
        tail_f = 0.0
    elif kernel.decay_bound is not None:
        c, eps = kernel.decay_bound
        T = 1
        while c * math.exp(eps) * lattice_exp_tail(d, eps, T) > tol:
            T += 1
        tail_f = c * math.exp(eps) * lattice_exp_tail(d, eps, T)
    else:
        raise UnsupportedKernelError(f"{kernel.name} has neither compact support nor a decay bound")
    k = quad.cells_per_unit
    u = _grid_points([(np.arange(k) + 0.5) / k] * d).reshape(-1, d)
    F = np.zeros(len(u))
    for t in itertools.product(range(-T, T + 1), repeat=d):
        F += np.abs(kernel.evaluator(u + np.asarray(t, dtype=np.float64)))
    value = pairwise_sum(F**2) / k**d
    if return_tail:
        return value, 2 * math.sqrt(value) * tail_f + tail_f**2
    return value


def periodized_sum(values, cells_per_unit):
    """Fold a window array modulo the unit lattice: ``P[j] = sum_t values[j + t*k]``."""
    v = np.asarray(values, dtype=np.float64)
    k = cells_per_unit
    units = -(-v.shape[0] // k)
    pad = units * k - v.shape[0]
    if pad:
        v = np.pad(v, [(0, pad)] * v.ndim)
    shape = []
    for _ in range(v.ndim):
        shape += [units, k]
    folded = v.reshape(shape)
    return folded.sum(axis=tuple(range(0, 2 * v.ndim, 2)))


# -- configuration ------------------------------------------------------------

_BUILDERS = {"box": box, "exp": exponential, "gauss": gauss, "green3d": green3d}


def kernel_from_spec(spec):
    """Build a kernel from ``{"type": ..., "params": {...}}``.

    ``params`` may carry ``amplitude`` for every type (a multiplicative factor).
    """
    kind = spec.get("type")
    if kind not in _BUILDERS:
        raise DomainError(f"unknown kernel type {kind!r}")
    extra = set(spec) - {"type", "params"}
    if extra:
        raise DomainError(f"unexpected kernel spec keys {sorted(extra)}; parameters go under 'params'")
    params = dict(spec.get("params", {}))
    amp = params.pop("amplitude", None)
    if kind == "box":
        if "height" not in params and amp is not None:
            params["height"] = amp
            amp = None
    if kind in ("exp", "gauss") and amp is not None:
        params["amplitude"] = amp
        amp = None
    kern = _BUILDERS[kind](**params)
    if amp is not None:
        kern = scaled(kern, amp)
    return kern
