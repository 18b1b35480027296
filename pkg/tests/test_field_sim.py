import math

import numpy as np
import pytest

from levyfield.errors import BoundaryError, CapacityError, CoverageError, DomainError
from levyfield.field_sim import (
    ConvolutionPlan, FieldSample, build_noise_grid, convolve_at, lattice_box, plan_simulation,
    required_points, simulate, simulation_kernel,
)
from levyfield.kernels import (
    QuadratureSpec, box, exponential, gauss, inner_product, integral, lag_covariance, scaled, truncate,
)
from levyfield.levy_basis import LevyTriplet, derive_moments, gaussian, poisson
from levyfield.streams import replicate_stream

SYM = LevyTriplet(0.0, 0.0, ((1.0, 1.0), (1.0, -1.0)))


def naive_field(points, kernel, grid):
    """Sum f(t - u_cell) L(cell) cell by cell."""
    k = round(1 / grid.resolution)
    m = grid.cells_per_side
    d = grid.dimension
    mids = -grid.window + (np.arange(m) + 0.5) / k
    u = np.stack(np.meshgrid(*[mids] * d, indexing="ij"), -1).reshape(-1, d)
    cells = grid.cells.reshape(-1)
    return np.array([np.sum(kernel.evaluator(np.asarray(t) - u) * cells) for t in points])


class TestNoiseGrid:
    def test_zero_triplet(self):
        g = build_noise_grid(LevyTriplet(), 2, 0.5, replicate_stream(0), 2)
        assert g.cells.shape == (8, 8) and np.all(g.cells == 0)

    def test_gaussian_cell_variance(self):
        g = build_noise_grid(gaussian(1.0), 4, 0.5, replicate_stream(1), 1, count=5000)
        x = g.cells.ravel()
        assert abs(x.var() - 0.5) < 3 * 0.5 * math.sqrt(2 / x.size)

    def test_additivity(self):
        W = 2
        g = build_noise_grid(SYM, W, 0.5, replicate_stream(2), 1, count=10_000)
        s = g.cells.sum(axis=1)
        v = derive_moments(SYM).sigma2 * (2 * W)
        se = math.sqrt((derive_moments(SYM).kappa4 * 2 * W + 2 * v**2) / len(s))
        assert abs(s.var() - v) < 3 * se

    def test_capacity(self):
        with pytest.raises(CapacityError) as exc:
            build_noise_grid(gaussian(), 64, 1 / 64, replicate_stream(0), 3)
        assert exc.value.required_bytes == 8 * (128 * 64) ** 3

    @pytest.mark.parametrize("W,res", [(0, 0.5), (1.5, 0.5), (2, 0.3)])
    def test_validation(self, W, res):
        with pytest.raises(DomainError):
            build_noise_grid(gaussian(), W, res, replicate_stream(0))


class TestConvolution:
    def test_single_cell_kernel(self):
        g = build_noise_grid(gaussian(), 3, 0.25, replicate_stream(3), 1)
        k = box(1, 0.0, 0.25)
        fs = convolve_at([[0], [1], [-2]], k, g)
        for t in (0, 1, -2):
            assert fs.value_at([t]) == g.cells[g.cell_index(t - 0.25)]

    @pytest.mark.parametrize("d", [1, 2])
    def test_matches_naive_sum(self, d):
        k = gauss(d, 0.6)
        kt = truncate(k, 2)
        pts = lattice_box(2, d)
        g = build_noise_grid(SYM, 4, 0.5, replicate_stream(4), d)
        fs = convolve_at(pts, kt, g)
        np.testing.assert_allclose(fs.values, naive_field(fs.points, kt, g), atol=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_direct_and_fft_agree(self, d):
        k = exponential(d)
        q = QuadratureSpec(0.5, 3)
        plan = plan_simulation(k, lattice_box(2, d), None, q)
        g = build_noise_grid(SYM, plan.window, 0.5, replicate_stream(5), d, count=3)
        a = ConvolutionPlan(plan.points, simulation_kernel(k, q), 0.5, plan.window, method="direct").apply(g.cells)
        b = ConvolutionPlan(plan.points, simulation_kernel(k, q), 0.5, plan.window, method="fft").apply(g.cells)
        np.testing.assert_allclose(a, b, atol=1e-12 * np.abs(a).max())

    def test_boundary_error_names_point(self):
        g = build_noise_grid(gaussian(), 2, 0.5, replicate_stream(0), 1)
        with pytest.raises(BoundaryError) as exc:
            convolve_at([[0], [2]], box(1, -0.5, 1.0), g)
        assert exc.value.point == (2,)

    def test_unbounded_kernel_rejected(self):
        g = build_noise_grid(gaussian(), 2, 0.5, replicate_stream(0), 1)
        with pytest.raises(BoundaryError):
            convolve_at([[0]], exponential(1), g)

    def test_linearity_exact(self):
        k = box(1, -1.0, 2.0)
        g = build_noise_grid(SYM, 6, 0.25, replicate_stream(6), 1)
        a = convolve_at(lattice_box(2, 1), k, g)
        b = convolve_at(lattice_box(2, 1), scaled(k, 2.0), g)
        np.testing.assert_array_equal(b.values, 2.0 * a.values)


class TestSimulate:
    def test_required_points(self):
        pts = required_points(lattice_box(3, 1), [[0], [2]], 1)
        assert len(pts) == 8 and len(pts) <= 2 * 6

    def test_same_as_convolve_at(self):
        q = QuadratureSpec(0.5, 2)
        k = box(1, 0, 1)
        a = simulate(k, SYM, lattice_box(3, 1), [[0]], q, replicate_stream(7), window_halfwidth=6)
        g = build_noise_grid(SYM, 6, 0.5, replicate_stream(7), 1)
        b = convolve_at(lattice_box(3, 1), k, g)
        np.testing.assert_array_equal(a.values, b.values)

    def test_deterministic(self):
        q = QuadratureSpec(0.25, 3)
        a = simulate(exponential(1), SYM, lattice_box(4, 1), [[1]], q, replicate_stream(8))
        b = simulate(exponential(1), SYM, lattice_box(4, 1), [[1]], q, replicate_stream(8))
        np.testing.assert_array_equal(a.values, b.values)
        assert a.value_at([4]) is not None

    def test_moments_match_quadrature(self):
        # E X_t = E L int f and Var X_t = sigma2 int f^2, the same at every t
        q = QuadratureSpec(0.25, 4)
        k = exponential(1)
        t = poisson(1.0, 1.0)
        m = derive_moments(t)
        plan = plan_simulation(k, lattice_box(3, 1), None, q)
        g = build_noise_grid(t, plan.window, q.resolution, replicate_stream(9), 1, count=10_000)
        x = plan.apply(g.cells)
        mean, var = m.mean * integral(k, q), m.sigma2 * inner_product(k, k, q)
        for j in range(x.shape[1]):
            assert abs(x[:, j].mean() - mean) < 3 * math.sqrt(var / len(x))
            assert abs(x[:, j].var() - var) < 4 * var * math.sqrt(3 / len(x))

    @pytest.mark.parametrize("kernel", [box(1, 0, 1.5), exponential(1)])
    def test_lag_covariance_matches(self, kernel):
        q = QuadratureSpec(0.25, 4)
        plan = plan_simulation(kernel, [[0]], [[0], [1], [2]], q)
        g = build_noise_grid(gaussian(), plan.window, q.resolution, replicate_stream(10), 1, count=10_000)
        fs = FieldSample(plan.points, plan.apply(g.cells), _sorted=True)
        x0 = fs.value_at([0])
        for l in (0, 1, 2):
            prod = x0 * fs.value_at([l])
            gam = lag_covariance(kernel, 1.0, l, q)
            assert abs(prod.mean() - gam) < 3 * prod.std() / math.sqrt(len(prod))


class TestFieldSample:
    def test_sorted_and_lookup(self):
        fs = FieldSample([[2], [0], [1]], [20.0, 0.0, 10.0])
        np.testing.assert_array_equal(fs.points.ravel(), [0, 1, 2])
        assert fs.value_at([1]) == 10.0
        assert fs.as_dict() == {(0,): 0.0, (1,): 10.0, (2,): 20.0}

    def test_missing_point(self):
        fs = FieldSample([[0]], [1.0])
        with pytest.raises(CoverageError):
            fs.index_of([[5]])

    def test_rejects_duplicates_and_nan(self):
        with pytest.raises(DomainError):
            FieldSample([[0], [0]], [1.0, 2.0])
        with pytest.raises(DomainError):
            FieldSample([[0]], [math.nan])
