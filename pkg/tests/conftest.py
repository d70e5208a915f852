import pytest

from stefan import make_fixture, plan_grid, solve_direct


@pytest.fixture(scope="session")
def direct_exp_runs():
    """Direct solves of the benchmark fixture for N in {10,20,40,80}."""
    case = make_fixture("direct-exp")
    runs = {}
    for n in (10, 20, 40, 80):
        grid = plan_grid(case, n)
        runs[n] = (grid,) + solve_direct(case, grid)
    return case, runs
