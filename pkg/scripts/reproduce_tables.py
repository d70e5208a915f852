#!/usr/bin/env python3
"""Regenerate the benchmark tables: direct-solver convergence, noiseless
influx recovery for both quadrature rules, and the seed-averaged
noise-vs-error sweep. Writes CSVs under --out and prints the tables."""

import argparse
from pathlib import Path

import numpy as np

from stefan import (
    TikhonovConfig,
    assemble_system,
    energy_residual,
    make_fixture,
    plan_grid,
    rel_l2_error,
    rule_nodes,
    run_sweep,
    sample_path,
    solve_direct,
    tikhonov_solve,
)
from stefan.cli import Emitter
from stefan.experiment import table_error_metrics


def direct_table(em: Emitter):
    case = make_fixture("direct-exp")
    rows = []
    print("\ndirect solver: relative errors at the first reported step")
    print(f"{'N':>4} {'e_u':>12} {'e_s':>12} {'e_sdot':>12} {'|energy res(T)|':>16}")
    for n in (10, 20, 40, 80):
        grid = plan_grid(case, n)
        field, path = solve_direct(case, grid)
        m = field.m_stored[1]
        met = table_error_metrics(field, path, case, path.t[m])
        res = abs(energy_residual(case, field, path, grid.M_t))
        rows.append((n, met["e_u"], met["e_s"], met["e_sdot"], res))
        print(f"{n:>4} {met['e_u']:>12.3e} {met['e_s']:>12.3e} "
              f"{met['e_sdot']:>12.3e} {res:>16.3e}")
    em.write_csv("direct_convergence.csv",
                 ["n", "e_u", "e_s", "e_sdot", "energy_residual_T"], rows)


def inverse_table(em: Emitter):
    print("\nnoiseless influx recovery (N=1000, lambda=1e-3, prior=exact)")
    print(f"{'fixture':>10} {'rule':>9} {'rel_l2':>12}")
    rows = []
    for fixture in ("example1", "example2", "example3"):
        case = make_fixture(fixture)
        path = sample_path(case, 1000)
        for rn in ("midpoint", "gauss3"):
            sys_ = assemble_system(path, case, rule_nodes(rn))
            res = tikhonov_solve(sys_, TikhonovConfig(lam=1e-3, prior="exact"))
            rel = rel_l2_error(res.h, sys_.h_exact)
            rows.append((fixture, rn, rel))
            print(f"{fixture:>10} {rn:>9} {rel:>12.3e}")
    em.write_csv("inverse_noiseless.csv", ["fixture", "rule", "rel_l2"], rows)


def noise_table(em: Emitter, seeds: int):
    print(f"\nnoise sweep on example1 (N=1000, gauss3, prior=exact, {seeds} seeds)")
    case = make_fixture("example1")
    reports = run_sweep(
        case, 1000, rule_nodes("gauss3"), lams=[1e-3, 1e-2, 1e-1],
        noise_levels=[0.0, 0.01, 0.03, 0.05], n_seeds=seeds, seed0=0, prior="exact",
    )
    by_cell = {}
    for r in reports:
        by_cell.setdefault((r.lam, r.noise_level), []).append(r.rel_l2)
    print(f"{'lambda':>8} {'noise':>7} {'mean rel_l2':>12} {'std':>10}")
    rows = []
    for (lam, lvl), vals in sorted(by_cell.items()):
        mean, std = float(np.mean(vals)), float(np.std(vals))
        rows.append((lam, lvl, mean, std))
        print(f"{lam:>8.0e} {lvl:>7.0%} {mean:>12.4f} {std:>10.4f}")
    em.write_csv("noise_sweep.csv", ["lambda", "noise_level", "mean_rel_l2", "std_rel_l2"], rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="tables", help="output directory")
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    em = Emitter(Path(args.out))
    direct_table(em)
    inverse_table(em)
    noise_table(em, args.seeds)
    em.finish({"script": "reproduce_tables", "seeds": args.seeds})
    print(f"\nwrote {', '.join(em.files)} to {args.out}/")


if __name__ == "__main__":
    main()
