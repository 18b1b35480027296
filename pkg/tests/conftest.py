import pytest

from levyfield.field_sim import FieldSample, build_noise_grid, plan_simulation
from levyfield.streams import replicate_stream

ACCEPTANCE = {}


def batch_field(kernel, triplet, points, lags, quad, seed, count):
    """``count`` independent replicates of the field as one batched :class:`FieldSample`."""
    plan = plan_simulation(kernel, points, lags, quad)
    grid = build_noise_grid(triplet, plan.window, quad.resolution, replicate_stream(seed),
                            kernel.dimension, count=count)
    return FieldSample(plan.points, plan.apply(grid.cells), _sorted=True)


@pytest.fixture
def record_acceptance(request):
    """Call with ``(criterion, passed, detail)`` to add a line to the acceptance summary."""
    def record(criterion, passed, detail=""):
        prev = ACCEPTANCE.get(criterion)
        ok = bool(passed) and (prev is None or prev[0])
        details = (prev[1] + "; " if prev else "") + detail
        ACCEPTANCE[criterion] = (ok, details)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo tests taking more than a few seconds")
