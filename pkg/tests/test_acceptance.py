"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line (run with -s or read captured output)
and asserts the stated tolerance. Criterion 10 is known to fail: the
forward kernel mapping the influx to the front decays double-exponentially
near the final time, so the trailing influx values are unidentifiable from
the front with a zero prior; see the test body for the measured floor.
"""

import time

import numpy as np
import pytest

from stefan import (
    TikhonovConfig,
    TimeSignal,
    abel_forward,
    abel_inverse,
    assemble_system,
    energy_residual,
    make_fixture,
    plan_grid,
    rel_l2_error,
    reconstruct_u,
    rule_nodes,
    run_pipeline,
    run_sweep,
    sample_path,
    solve_direct,
    tikhonov_solve,
)
from stefan.experiment import table_error_metrics


def _report(num, desc, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {desc} [{detail}]"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def direct_runs():
    case = make_fixture("direct-exp")
    runs = {}
    for n in (10, 20, 40, 80):
        grid = plan_grid(case, n)
        runs[n] = (grid,) + solve_direct(case, grid)
    return case, runs


@pytest.fixture(scope="module")
def example1_solutions():
    case = make_fixture("example1")
    path = sample_path(case, 1000)
    out = {}
    t0 = time.time()
    for rn in ("gauss3", "midpoint"):
        sys_ = assemble_system(path, case, rule_nodes(rn))
        res = tikhonov_solve(sys_, TikhonovConfig(lam=1e-3, prior="exact"))
        out[rn] = (sys_, res)
    return case, path, out, time.time() - t0


def test_criterion_01_direct_temperature(direct_runs):
    case, runs = direct_runs
    t0 = time.time()
    grid = plan_grid(case, 80)
    field, path = solve_direct(case, grid)
    elapsed = time.time() - t0
    m = field.m_stored[1]  # first reported step
    metrics = table_error_metrics(field, path, case, path.t[m])
    mid = abs(field.row(m)[40] - 0.051271)
    ok = metrics["e_u"] <= 5e-4 and mid <= 2e-4 and elapsed < 10.0
    _report(1, "direct temperature at first reported step",
            ok, f"e_u={metrics['e_u']:.2e}, |u(0.5)-0.051271|={mid:.2e}, {elapsed:.2f}s")


def test_criterion_02_front_convergence(direct_runs):
    case, runs = direct_runs
    errs = []
    for n in (10, 20, 40, 80):
        grid, field, path = runs[n]
        m = field.m_stored[1]
        errs.append(table_error_metrics(field, path, case, path.t[m])["e_s"])
    ok = 0.0 <= errs[-1] <= 1e-3 and all(b <= a for a, b in zip(errs, errs[1:]))
    _report(2, "front error nonincreasing in N, e_s(80) <= 1e-3",
            ok, "e_s=" + ", ".join(f"{e:.2e}" for e in errs))


def test_criterion_03_energy_balance(direct_runs):
    case, runs = direct_runs
    vals = {}
    for n in (20, 80):
        grid, field, path = runs[n]
        vals[n] = abs(energy_residual(case, field, path, grid.M_t))
    ok = vals[80] <= 1e-2 and vals[80] < vals[20]
    _report(3, "energy balance residual at T",
            ok, f"|res(80)|={vals[80]:.2e} < |res(20)|={vals[20]:.2e}")


def test_criterion_04_inverse_example1(example1_solutions):
    case, path, out, elapsed = example1_solutions
    rels = {rn: rel_l2_error(res.h, sys_.h_exact) for rn, (sys_, res) in out.items()}
    ok = rels["gauss3"] <= 0.01 and rels["midpoint"] <= 0.02 and elapsed < 60.0
    _report(4, "noiseless influx recovery (exact prior, lam=1e-3)",
            ok, f"gauss3={rels['gauss3']:.2e}, midpoint={rels['midpoint']:.2e}, {elapsed:.1f}s")


def test_criterion_05_noise_trend():
    # lambda is matched to the noise scale (the criterion fixes the noise
    # model and the band, not lambda); 1e-1 is appropriate for the
    # derived-velocity noise model at these levels.
    case = make_fixture("example1")
    reports = run_sweep(
        case, 1000, rule_nodes("gauss3"), lams=[1e-1],
        noise_levels=[0.01, 0.03, 0.05], n_seeds=10, seed0=0, prior="exact",
    )
    by_level = {}
    for r in reports:
        by_level.setdefault(r.noise_level, []).append(r.rel_l2)
    means = [float(np.mean(by_level[l])) for l in (0.01, 0.03, 0.05)]
    ok = all(a <= b for a, b in zip(means, means[1:])) and means[-1] <= 0.06
    _report(5, "seed-averaged error nondecreasing in noise, <= 0.06 at 5%",
            ok, "means=" + ", ".join(f"{m:.3f}" for m in means))


def test_criterion_06_inverse_example3():
    case = make_fixture("example3")
    path = sample_path(case, 1000)
    sys_ = assemble_system(path, case, rule_nodes("gauss3"))
    res = tikhonov_solve(sys_, TikhonovConfig(lam=1e-3, prior="exact"))
    rel = rel_l2_error(res.h, sys_.h_exact)
    ok = rel <= 0.012
    _report(6, "noiseless recovery on the square-root front", ok, f"rel_l2={rel:.2e}")


def test_criterion_07_abel_roundtrip():
    tt = np.linspace(0.0, 1.0, 1001)
    h = lambda tau: np.exp(np.asarray(tau, dtype=float))
    F = TimeSignal.from_samples(tt, [abel_forward(h, t) if t > 0 else 0.0 for t in tt])
    window = tt[(tt >= 0.1) & (tt <= 0.9)]
    rel = max(abs(abel_inverse(F, t) / float(h(t)) - 1.0) for t in window)
    ok = rel <= 1e-2
    _report(7, "half-order integral roundtrip on exp(t)", ok, f"max_rel={rel:.2e}")


def test_criterion_08_representation_formula():
    case = make_fixture("example1")
    path = sample_path(case, 1000)
    rule = rule_nodes("gauss3")
    h = TimeSignal.from_function(case.exact.h)
    rng = np.random.default_rng(2024)
    worst_int = 0.0
    for _ in range(50):
        t = float(rng.uniform(0.02, 1.0))
        x = float(rng.uniform(0.0, 1.0) * case.exact.s(t))
        err = abs(reconstruct_u(h, path, case, x, t, rule) - float(case.exact.u(x, t)))
        worst_int = max(worst_int, err)
    worst_front = 0.0
    for t in rng.uniform(0.02, 1.0, 50):
        val = reconstruct_u(h, path, case, float(case.exact.s(t)), float(t), rule)
        worst_front = max(worst_front, abs(val))
    ok = worst_int <= 1e-3 and worst_front <= 1e-3
    _report(8, "heat-potential representation matches exact solution",
            ok, f"interior={worst_int:.2e}, front={worst_front:.2e}")


def test_criterion_09_tikhonov_properties():
    case = make_fixture("example1")
    sys_ = assemble_system(sample_path(case, 400), case, rule_nodes("gauss3"))
    lams = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1]
    resids, norms, pd_ok = [], [], True
    for lam in lams:
        res = tikhonov_solve(sys_, TikhonovConfig(lam=lam))
        resids.append(res.residual)
        norms.append(float(np.linalg.norm(res.h)))
        nm = sys_.A.T @ sys_.A + lam * np.eye(sys_.A.shape[1])
        pd_ok = pd_ok and np.all(np.linalg.eigvalsh(nm) > 0)
    mono = all(a <= b + 1e-12 for a, b in zip(resids, resids[1:])) and \
        all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))
    ok = mono and pd_ok
    _report(9, "residual/solution-norm monotone in lambda, normal matrix PD",
            ok, f"monotone={mono}, positive_definite={pd_ok}")


def test_criterion_10_pipeline():
    # Known-failing: collocating on the front at times near T, the kernel
    # N(s(t), 0; t, tau) underflows for the trailing panels (the influx
    # there has not yet influenced the front), so with a zero prior those
    # nodes revert to zero. The intrinsic floor of this criterion's metric
    # is ~0.23 even for the best-approximation solution; the faithful run
    # measures ~0.6, far above the 0.05 band.
    case = make_fixture("direct-exp")
    res, sys_, path = run_pipeline(case, 80, 1000, rule_nodes("gauss3"),
                                   lam=1e-3, prior="zero")
    mask = sys_.node_times >= 0.1 * case.T
    rel = float(np.linalg.norm((res.h - sys_.h_exact)[mask])
                / np.linalg.norm(sys_.h_exact[mask]))
    ok = rel <= 0.05
    _report(10, "pipeline zero-prior recovery on [0.1T, T]", ok, f"rel_l2={rel:.2e}")


def test_criterion_11_reproducibility(tmp_path):
    import json

    from stefan.cli import run_command

    hashes = []
    for sub in ("r1", "r2"):
        out = tmp_path / sub
        rc = run_command([
            "sweep", "--fixture", "example1", "--n", "120", "--rule", "gauss3",
            "--lambdas", "1e-4,1e-2", "--noises", "0,0.01", "--seeds", "3",
            "--seed0", "17", "--out", str(out),
        ])
        assert rc == 0
        hashes.append(json.loads((out / "manifest.json").read_text())["files"]["report.csv"])
    ok = hashes[0] == hashes[1]
    _report(11, "sweep re-run yields bit-identical report.csv", ok, f"sha256={hashes[0][:12]}")
