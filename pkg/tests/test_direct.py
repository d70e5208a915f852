import numpy as np
import pytest

from stefan import (
    ConfigurationError,
    StabilityError,
    StefanCase,
    TimeSignal,
    energy_residual,
    make_fixture,
    plan_grid,
    solve_direct,
)
from stefan.direct import BimGrid, bim_step, front_gradient
from stefan.experiment import table_error_metrics


def test_plan_grid_step_count():
    # N=10, b=0.1, T=1: k_max = 0.5 * 1e-2 * 1e-2 = 5e-5, so M_t = 20000,
    # comfortably past the 10000 a bound without the 1/2 factor would give.
    case = make_fixture("direct-exp")
    grid = plan_grid(case, 10, safety=1.0)
    assert grid.M_t == 20000
    assert grid.k == pytest.approx(5e-5)
    assert grid.h_xi == pytest.approx(0.1)
    assert grid.r == pytest.approx(grid.k / grid.h_xi**2)
    assert plan_grid(case, 10, safety=0.8).M_t == 25000


def test_plan_grid_rejects_bad_inputs():
    case = make_fixture("direct-exp")
    with pytest.raises(ConfigurationError):
        plan_grid(case, 3)
    with pytest.raises(ConfigurationError):
        plan_grid(case, 10, safety=0.0)
    with pytest.raises(ConfigurationError):
        plan_grid(case, 10, safety=1.5)


def test_front_gradient_exact_on_quadratics():
    h_xi = 0.1
    xi = np.linspace(0.0, 1.0, 11)
    u = 3.0 * xi**2 - xi
    assert front_gradient(u, h_xi) == pytest.approx(5.0, abs=1e-12)


def test_bim_step_zero_state_is_fixed_without_influx():
    case = make_fixture("direct-exp")
    grid = plan_grid(case, 10)
    u = np.zeros(11)
    un, z_next, zdot = bim_step(u, case.b**2, 0.0, 0.0, grid)
    assert np.all(un == 0.0) and z_next == case.b**2 and zdot == 0.0


def test_bim_step_influx_enters_only_boundary_node():
    case = make_fixture("direct-exp")
    grid = plan_grid(case, 10)
    u = np.zeros(11)
    un, _, _ = bim_step(u, case.b**2, 0.0, 2.0, grid)
    expected0 = 2.0 * grid.h_xi * grid.r / case.b * 2.0
    assert un[0] == pytest.approx(expected0, rel=1e-12)
    assert np.all(un[1:] == 0.0)


def test_bim_step_rejects_oversized_step():
    case = make_fixture("direct-exp")
    g = plan_grid(case, 10)
    big = BimGrid(N=10, M_t=10, T=1.0, k=0.1, h_xi=0.1, r=10.0)
    with pytest.raises(StabilityError) as e:
        bim_step(np.zeros(11), case.b**2, 0.0, 1.0, big, m=7)
    assert e.value.tag == "direct.cfl.violated"
    assert "step 7" in str(e.value)
    # the planned grid is fine
    bim_step(np.zeros(11), case.b**2, 0.0, 1.0, g)


def test_solve_direct_front_grows(direct_exp_runs):
    case, runs = direct_exp_runs
    for n, (grid, field, path) in runs.items():
        assert field.check(case.b) == []
        assert path.s[0] == pytest.approx(case.b)
        assert np.all(np.diff(path.s) > 0)
        assert field.U.shape[1] == n + 1


def test_solve_direct_matches_exact_front(direct_exp_runs):
    case, runs = direct_exp_runs
    # s(t) = t + b exactly; frozen relative front errors at T per N.
    expected = {10: 1.2e-3, 20: 3.0e-4, 40: 7.5e-5, 80: 2.0e-5}
    prev = None
    for n, (grid, field, path) in sorted(runs.items()):
        e_s = abs(path.s[-1] - (1.0 + case.b)) / (1.0 + case.b)
        assert e_s < expected[n]
        if prev is not None:
            assert e_s < prev
        prev = e_s


def test_solve_direct_matches_exact_temperature(direct_exp_runs):
    case, runs = direct_exp_runs
    grid, field, path = runs[40]
    m = field.m_stored[-1]
    x = path.s[m] * grid.xi
    exact = case.exact.u(x, path.t[m])
    err = np.linalg.norm(field.row(m) - exact) / np.linalg.norm(exact)
    assert err < 3e-4


def test_error_metrics_first_reported_step(direct_exp_runs):
    # Relative front error at the first reported step shrinks with N.
    case, runs = direct_exp_runs
    errs = []
    for n, (grid, field, path) in sorted(runs.items()):
        m = field.m_stored[1]
        metrics = table_error_metrics(field, path, case, path.t[m])
        errs.append(metrics["e_s"])
        assert metrics["e_u"] < 5e-3
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_front_velocity_tracks_exact(direct_exp_runs):
    case, runs = direct_exp_runs
    _, _, path = runs[40]
    half = path.sdot.size // 2
    assert np.max(np.abs(path.sdot[half:] - 1.0)) < 5e-3


def test_velocity_bounded_by_data():
    # The comparison principle caps the front speed by max(sup h, H).
    for name in ("direct-exp", "example1", "example3"):
        case = make_fixture(name)
        _, path = solve_direct(case, plan_grid(case, 20))
        assert np.max(path.sdot) <= case.data_bound + 0.1


def test_energy_residual_small_and_shrinking(direct_exp_runs):
    case, runs = direct_exp_runs
    vals = {}
    for n, (grid, field, path) in runs.items():
        assert abs(energy_residual(case, field, path, 0)) < 1e-12
        vals[n] = abs(energy_residual(case, field, path, grid.M_t))
    assert vals[10] < 2e-3
    assert vals[80] < vals[10]
    assert vals[80] < 5e-5


def test_monotone_dependence_on_influx():
    # Increasing the influx pointwise cannot slow the front down, and the
    # front gap is controlled by the influx gap.
    base = make_fixture("direct-exp")
    bumped = StefanCase(
        name="bumped", b=base.b, T=base.T,
        influx=TimeSignal.from_function(lambda t: 1.1 * base.influx(t)),
        initial_state=base.initial_state, H=base.H,
    )
    grid = plan_grid(base, 20)
    _, p1 = solve_direct(base, grid)
    _, p2 = solve_direct(bumped, grid)
    assert np.all(p2.s >= p1.s - 1e-10)
    gap = np.trapezoid(0.1 * base.influx(p1.t), p1.t)
    assert abs(p2.s[-1] - p1.s[-1]) <= 10.0 * gap


def test_stability_error_raised_from_march():
    case = make_fixture("direct-exp")
    g = plan_grid(case, 10)
    bad = BimGrid(N=10, M_t=100, T=1.0, k=1e-2, h_xi=g.h_xi, r=1e-2 / g.h_xi**2)
    with pytest.raises(StabilityError):
        solve_direct(case, bad)


def test_field_row_access(direct_exp_runs):
    case, runs = direct_exp_runs
    grid, field, path = runs[10]
    assert field.row(0) is field.U[0] or np.array_equal(field.row(0), field.U[0])
    with pytest.raises(ConfigurationError):
        field.row(field.m_stored[1] + 1)
    assert field.nearest_stored(0.0) == 0
    assert field.nearest_stored(grid.T) == grid.M_t


def test_store_every_decimation():
    case = make_fixture("direct-exp")
    grid = plan_grid(case, 10)
    field, _ = solve_direct(case, grid, store_every=5000)
    assert field.m_stored.tolist() == [0, 5000, 10000, 15000, 20000, grid.M_t]
