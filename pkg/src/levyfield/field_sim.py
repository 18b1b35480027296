"""Simulation of ``X_t = int f(t - s) dL(s)`` at lattice points.

The basis is realised exactly on a grid of cells of edge ``delta`` covering
``[-W, W)^d``; the field is the discrete convolution
``X_t = sum_cells f(t - u_cell) L(cell)`` with ``f`` replaced by its cell
values (see :mod:`levyfield.kernels`).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import fft as sp_fft

from ._summation import lexsort_points
from .errors import BoundaryError, CapacityError, CoverageError, DomainError
from .kernels import cell_values, kernel_grid, truncate
from .levy_basis import sample_increments

#: Default memory budget for one noise grid (bytes).
MEMORY_BUDGET = 1 << 29


@dataclass(frozen=True)
class NoiseGrid:
    """Increments ``L(cell)`` on ``[-window, window)^d``.

    ``cells`` has shape ``batch + (m,)*d`` with ``m = 2 * window / resolution``;
    cell ``i`` along an axis is ``[-window + i*delta, -window + (i+1)*delta)``.
    """

    dimension: int
    resolution: float
    window: int
    cells: np.ndarray

    @property
    def cells_per_side(self):
        return round(2 * self.window / self.resolution)

    @property
    def batch_shape(self):
        return self.cells.shape[: self.cells.ndim - self.dimension]

    def cell_index(self, corner):
        """Array index of the cell whose lower corner is ``corner``."""
        k = round(1.0 / self.resolution)
        return tuple(int(round((c + self.window) * k)) for c in np.atleast_1d(corner))


def required_bytes(dimension, window, resolution, count=1):
    m = round(2 * window / resolution)
    return 8 * count * m**dimension


def build_noise_grid(triplet, window_halfwidth, resolution, stream, dimension=1,
                     count=None, memory_budget=MEMORY_BUDGET):
    """Independent exact-law increments on every cell of ``[-W, W)^d``.

    ``count`` stacks that many grids drawn sequentially from ``stream``.
    """
    W = int(window_halfwidth)
    if W != window_halfwidth or W < 1:
        raise DomainError(f"window half-width must be an integer >= 1, got {window_halfwidth}")
    k = round(1.0 / resolution)
    if k < 1 or abs(1.0 / resolution - k) > 1e-9 * k:
        raise DomainError("1/resolution must be a positive integer")
    need = required_bytes(dimension, W, 1.0 / k, 1 if count is None else count)
    if need > memory_budget:
        raise CapacityError(
            f"noise grid needs {need} bytes, budget is {memory_budget}", required_bytes=need)
    m = 2 * W * k
    shape = (m,) * dimension if count is None else (int(count),) + (m,) * dimension
    cells = sample_increments(triplet, (1.0 / k) ** dimension, shape, stream)
    return NoiseGrid(dimension, 1.0 / k, W, cells)


def _key_bits(d):
    return 63 // d


def point_keys(points):
    """Order-preserving int64 keys for lattice points (lexicographic order)."""
    points = np.asarray(points, dtype=np.int64)
    if points.ndim == 1:
        points = points[:, None]
    d = points.shape[1]
    bits = _key_bits(d)
    off = 1 << (bits - 1)
    if points.size and (points.min() < -off or points.max() >= off):
        raise DomainError("lattice coordinates too large to index")
    keys = np.zeros(points.shape[0], dtype=np.int64)
    for j in range(d):
        keys = (keys << bits) | (points[:, j] + off)
    return keys


def canonical_points(points, dimension=None):
    """Unique lattice points as an ``(N, d)`` int64 array in lexicographic order."""
    pts = np.asarray(points, dtype=np.int64)
    if pts.ndim == 1:
        pts = pts[:, None] if dimension in (None, 1) else pts.reshape(-1, dimension)
    if pts.shape[0] == 0:
        return pts.reshape(0, dimension or pts.shape[1])
    return np.unique(pts, axis=0)


class FieldSample:
    """Field values at a finite set of lattice points.

    ``values`` has shape ``(N,)`` or ``batch + (N,)``; points are stored in
    lexicographic order and ``values`` follow that order.
    """

    def __init__(self, points, values, _sorted=False):
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts[:, None]
        vals = np.asarray(values, dtype=np.float64)
        if vals.shape[-1] != pts.shape[0]:
            raise DomainError("values do not match points")
        if not _sorted:
            order = lexsort_points(pts)
            pts, vals = pts[order], vals[..., order]
            keys = point_keys(pts)
            if np.any(np.diff(keys) == 0):
                raise DomainError("duplicate points in field sample")
        else:
            keys = point_keys(pts)
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        self.points = pts
        self.values = vals
        self._keys = keys

    @property
    def dimension(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def with_values(self, values):
        """Same point set, new values (shares the index)."""
        new = object.__new__(FieldSample)
        new.points, new._keys = self.points, self._keys
        new.values = np.asarray(values, dtype=np.float64)
        return new

    def replicate(self, i):
        return self.with_values(self.values[i])

    def index_of(self, points, what="point"):
        """Positions of ``points`` in this sample; :class:`CoverageError` if any is missing."""
        q = point_keys(points)
        pos = np.searchsorted(self._keys, q)
        pos_c = np.minimum(pos, len(self._keys) - 1)
        ok = (pos < len(self._keys)) & (self._keys[pos_c] == q) if len(self._keys) else np.zeros(len(q), bool)
        if not np.all(ok):
            bad = np.asarray(points).reshape(len(q), -1)[np.argmin(ok)]
            raise CoverageError(f"field sample has no value at {what} {tuple(int(x) for x in bad)}")
        return pos

    def value_at(self, point):
        return self.values[..., self.index_of(np.atleast_2d(point))[0]]

    def as_dict(self):
        if self.values.ndim != 1:
            raise DomainError("as_dict needs an unbatched sample")
        return {tuple(int(c) for c in p): float(v) for p, v in zip(self.points, self.values)}


class ConvolutionPlan:
    """Precomputed convolution of a compactly supported kernel at fixed points.

    ``method`` is ``"direct"`` (gathered dot products), ``"fft"`` or ``"auto"``.
    """

    def __init__(self, points, kernel, resolution, window, subdivisions=1, method="auto",
                 cells=None):
        if not math.isfinite(kernel.support_radius):
            raise BoundaryError(f"{kernel.name} has unbounded support; truncate it first")
        pts = canonical_points(points, kernel.dimension)
        if pts.shape[1] != kernel.dimension:
            raise DomainError("point and kernel dimensions differ")
        k = round(1.0 / resolution)
        d = kernel.dimension
        r = math.ceil(kernel.support_radius * k - 1e-9) / k
        W = int(window)
        self.points, self.dimension, self.window, self.k = pts, d, W, k
        self.radius = r
        given = np.asarray(points, dtype=np.int64).reshape(-1, d)
        bad = np.any((given - r < -W) | (given + r > W), axis=1)
        if np.any(bad):
            p = tuple(int(c) for c in given[np.argmax(bad)])
            raise BoundaryError(
                f"kernel support around point {p} leaves the window [-{W}, {W})^{d}", point=p)
        if cells is not None:
            self.kernel_cells = np.asarray(cells, dtype=np.float64)
            if self.kernel_cells.shape != (round(2 * r * k),) * d:
                raise DomainError("precomputed cells do not match the kernel support")
        elif r > 0:
            self.kernel_cells = cell_values(kernel, 1.0 / k, r, subdivisions)
        else:
            self.kernel_cells = np.zeros((0,) * d)
        m = self.kernel_cells.shape[0] if d else 0
        self.m = m
        self.starts = np.rint((pts - r + W) * k).astype(np.int64)
        work = len(pts) * m**d
        self.method = ("direct" if work <= 2_000_000 else "fft") if method == "auto" else method
        self._spec = None

    def __call__(self, grid):
        if grid.dimension != self.dimension or grid.window != self.window or round(1 / grid.resolution) != self.k:
            raise DomainError("noise grid does not match the convolution plan")
        return self.apply(grid.cells)

    def apply(self, cells):
        d, m = self.dimension, self.m
        batch = cells.shape[: cells.ndim - d]
        flat = cells.reshape((-1,) + cells.shape[-d:])
        if m == 0:
            return np.zeros(batch + (len(self.points),))
        if self.method == "direct":
            out = self._direct(flat)
        else:
            out = self._fft(flat)
        return out.reshape(batch + (len(self.points),))

    def _direct(self, flat):
        d, m = self.dimension, self.m
        side = flat.shape[-1]
        strides = side ** np.arange(d - 1, -1, -1)
        offs = np.stack(np.meshgrid(*([np.arange(m)] * d), indexing="ij"), -1).reshape(-1, d)
        off_lin = offs @ strides
        kflip = self.kernel_cells[(slice(None, None, -1),) * d].reshape(-1)
        base = self.starts @ strides
        lin = flat.reshape(flat.shape[0], -1)
        out = np.empty((flat.shape[0], len(self.points)))
        chunk = max(1, int(4_000_000 // max(1, flat.shape[0] * m**d)))
        for s in range(0, len(self.points), chunk):
            idx = base[s:s + chunk, None] + off_lin[None, :]
            out[:, s:s + chunk] = lin[:, idx] @ kflip
        return out

    def _spectrum(self, side):
        """Kernel transform for circular convolution of length ``L >= side`` per axis.

        Wrap-around only reaches full-convolution indices below ``m - 1``,
        which lie outside the valid region read by :meth:`_fft`.
        """
        if self._spec is None or self._spec[0] != side:
            L = sp_fft.next_fast_len(side, real=True)
            axes = tuple(range(self.dimension))
            K = sp_fft.rfftn(self.kernel_cells, s=(L,) * self.dimension, axes=axes)
            self._spec = (side, L, K)
        return self._spec[1], self._spec[2]

    def _fft(self, flat):
        d = self.dimension
        L, K = self._spectrum(flat.shape[-1])
        axes = tuple(range(1, d + 1))
        out = np.empty((flat.shape[0], len(self.points)))
        sel = tuple(self.starts[:, j] + self.m - 1 for j in range(d))
        chunk = max(1, int(2**25 // (L**d)))
        for b in range(0, flat.shape[0], chunk):
            spec = sp_fft.rfftn(flat[b:b + chunk], s=(L,) * d, axes=axes)
            full = sp_fft.irfftn(spec * K, s=(L,) * d, axes=axes)
            out[b:b + chunk] = full[(slice(None),) + sel]
        return out


def convolve_at(points, kernel, grid, subdivisions=1, method="auto"):
    """``X_t = sum_cells f(t - u_cell) L(cell)`` at every point; deterministic given the grid."""
    plan = ConvolutionPlan(points, kernel, grid.resolution, grid.window, subdivisions, method)
    return FieldSample(plan.points, plan(grid), _sorted=True)


def required_points(sample_points, lags, dimension):
    """``Gamma`` together with every shift ``Gamma + Delta``."""
    pts = _as_points(sample_points, dimension)
    lags = np.asarray(lags if lags is not None else [[0] * dimension], dtype=np.int64).reshape(-1, dimension)
    allp = np.concatenate([pts + lag for lag in lags] + [pts], axis=0)
    return canonical_points(allp, dimension)


def _as_points(sample_points, dimension):
    pts = getattr(sample_points, "points", sample_points)
    return np.asarray(pts, dtype=np.int64).reshape(-1, dimension)


def simulation_kernel(kernel, quad):
    """The kernel actually simulated: ``f`` truncated to the quadrature window."""
    if kernel.support_radius <= quad.box_halfwidth:
        return kernel
    return truncate(kernel, quad.box_halfwidth)


def window_for(points, kernel, quad):
    """Smallest integer ``W`` whose window covers the kernel support around every point."""
    k = quad.cells_per_unit
    r = math.ceil(simulation_kernel(kernel, quad).support_radius * k - 1e-9) / k
    pts = np.asarray(points)
    if pts.size == 0:
        return max(1, math.ceil(r))
    return max(1, math.ceil(max(pts.max() + r, r - pts.min())))


def plan_simulation(kernel, sample_points, lags, quad, window_halfwidth=None, method="auto"):
    """A :class:`ConvolutionPlan` for ``Gamma`` and its lag shifts."""
    d = kernel.dimension
    pts = required_points(sample_points, lags, d)
    sim_kernel = simulation_kernel(kernel, quad)
    W = window_for(pts, kernel, quad) if window_halfwidth is None else int(window_halfwidth)
    # a kernel cut to the quadrature window has the same cells as the quadrature grid
    cells = kernel_grid(kernel, quad) if sim_kernel is not kernel else None
    return ConvolutionPlan(pts, sim_kernel, quad.resolution, W, quad.subdivisions, method, cells)


def simulate(kernel, triplet, sample_points, lags, quad, stream, window_halfwidth=None,
             memory_budget=MEMORY_BUDGET, method="auto"):
    """One replicate of the field on ``Gamma`` and ``Gamma + Delta`` for every lag."""
    plan = plan_simulation(kernel, sample_points, lags, quad, window_halfwidth, method)
    grid = build_noise_grid(triplet, plan.window, quad.resolution, stream, kernel.dimension,
                            memory_budget=memory_budget)
    return FieldSample(plan.points, plan(grid), _sorted=True)


def lattice_box(n, d):
    """All points of ``[-n, n)^d`` in lexicographic order."""
    axes = [np.arange(-n, n)] * d
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)


__all__ = [
    "NoiseGrid", "FieldSample", "ConvolutionPlan", "build_noise_grid", "convolve_at",
    "simulate", "plan_simulation", "required_points", "simulation_kernel", "window_for",
    "point_keys", "canonical_points", "lattice_box", "MEMORY_BUDGET",
]
