"""Command-line interface and file emission.

Pure orchestration: all numerics live in the library modules. Emitted
CSVs use shortest round-trip decimals so re-runs are bit-identical;
every run writes a manifest.json listing each file with its sha256.

Exit codes: 0 success, 2 configuration error, 3 numerical fault.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .direct import energy_residual, plan_grid, solve_direct
from .errors import ConfigurationError, NumericalFault, StefanError, ValidationError
from .experiment import (
    NoiseSpec,
    add_noise,
    config_digest,
    rel_l2_error,
    resample_path,
    run_sweep,
    spawn_seeds,
    table_error_metrics,
)
from .inverse import TikhonovConfig, assemble_system, tikhonov_solve
from .kernel import abel_forward, abel_inverse
from .problem import (
    FIXTURE_NAMES,
    FreeBoundaryPath,
    StefanCase,
    TimeSignal,
    make_fixture,
    sample_path,
    validate_case,
)
from .quadrature import RULE_NAMES, rule_nodes


def _fmt(x) -> str:
    """Shortest round-trip decimal for binary64; plain text otherwise."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class Emitter:
    """Serialized CSV/JSON writer that records content hashes."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: dict[str, str] = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def write_csv(self, name: str, header: list[str], rows) -> None:
        text = ",".join(header) + "\n"
        for row in rows:
            text += ",".join(_fmt(v) for v in row) + "\n"
        self._write(name, text)

    def write_json(self, name: str, payload: dict) -> None:
        self._write(name, json.dumps(payload, indent=2, sort_keys=True, default=_fmt) + "\n")

    def _write(self, name: str, text: str) -> None:
        (self.out_dir / name).write_text(text)
        self.files[name] = hashlib.sha256(text.encode()).hexdigest()

    def finish(self, config: dict, extra: dict | None = None) -> None:
        manifest = {
            "version": __version__,
            "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "config": config,
            "config_hash": config_digest(config),
            "files": self.files,
        }
        if extra:
            manifest.update(extra)
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_fmt) + "\n")


def ingest_path(file) -> FreeBoundaryPath:
    """Read a front from CSV with header t,s or t,s,sdot (uniform t)."""
    file = Path(file)
    if not file.exists():
        raise ConfigurationError("input.file.missing", f"no such file: {file}")
    with open(file, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["t", "s"]:
            raise ValidationError("input.header.invalid", "expected header t,s or t,s,sdot")
        has_sdot = len(header) >= 3 and header[2].strip() == "sdot"
        rows = [[float(v) for v in r] for r in reader if r]
    if len(rows) < 2:
        raise ValidationError("input.rows.toofew", "need at least two samples")
    data = np.asarray(rows, dtype=float)
    t, s = data[:, 0], data[:, 1]
    steps = np.diff(t)
    if np.any(steps <= 0) or np.any(np.abs(steps - steps[0]) > 1e-9 * steps[0]):
        raise ValidationError("input.grid.nonuniform", "time column must be uniform ascending")
    sdot = data[:, 2] if has_sdot else np.gradient(s, t)
    path = FreeBoundaryPath(t=t, s=s, sdot=sdot)
    problems = path.check()
    if problems:
        print(f"warning: {'; '.join(problems)}", file=sys.stderr)
    return path


def _emit_path(em: Emitter, name: str, path: FreeBoundaryPath) -> None:
    em.write_csv(name, ["t", "s", "sdot"], zip(path.t, path.s, path.sdot))


def _cmd_direct(args) -> dict:
    case = make_fixture(args.fixture, b=args.b)
    problems = validate_case(case)
    if problems:
        raise ValidationError("config.case.invalid", "; ".join(problems))
    grid = plan_grid(case, args.nx, safety=args.safety)
    field, path = solve_direct(case, grid)
    em = Emitter(Path(args.out))
    _emit_path(em, "front.csv", resample_path(path, min(path.n_panels, 4000)))

    rows = []
    for pos, m in enumerate(field.m_stored):
        t_m = field.t_stored[pos]
        s_m = path.s[m]
        for i, xi in enumerate(field.grid.xi):
            rows.append((t_m, xi, field.U[pos, i]))
    em.write_csv("field.csv", ["t", "xi", "u"], rows)

    t_report = args.tm if args.tm is not None else float(field.t_stored[1])
    metrics = table_error_metrics(field, path, case, t_report) if case.exact else {}
    residual = energy_residual(case, field, path, int(field.m_stored[-1]))
    summary = {
        "fixture": case.name,
        "nx": args.nx,
        "safety": args.safety,
        "time_steps": grid.M_t,
        "report_time": t_report,
        "metrics": metrics,
        "energy_residual_T": residual,
        "field_violations": field.check(case.b),
    }
    em.write_json("summary.json", summary)
    em.finish(vars(args) | {"subcommand": "direct"})
    return summary


def _get_path(args, case):
    if args.path is not None:
        return ingest_path(args.path)
    return sample_path(case, args.n)


def _cmd_inverse(args) -> dict:
    rule = rule_nodes(args.rule)
    if args.fixture is not None:
        case = make_fixture(args.fixture, b=args.b)
        base_path = _get_path(args, case)
    else:
        # Measured front without a fixture: the front start gives b and the
        # initial state is taken as zero (no exact influx to compare against).
        base_path = ingest_path(args.path)
        b = float(base_path.s[0])
        if not b > 0:
            raise ValidationError("input.front.nonpositive", f"s(0)={b} must be > 0")
        case = StefanCase(
            name="ingested", b=b, T=float(base_path.t[-1]),
            influx=TimeSignal.from_function(
                lambda t: np.full_like(np.asarray(t, dtype=float), np.nan), name="unknown"
            ),
            initial_state=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            H=0.0,
        )
    em = Emitter(Path(args.out))

    if args.noise > 0:
        seeds = spawn_seeds(args.seed0, args.seeds)
    else:
        seeds = [args.seed0]
    runs = []
    for seed in seeds:
        path = add_noise(base_path, NoiseSpec(level=args.noise, seed=seed))
        sys_ = assemble_system(path, case, rule, m_x=args.mx)
        res = tikhonov_solve(sys_, TikhonovConfig(lam=args.lam, prior=args.prior))
        entry = {"seed": seed, "residual": res.residual, "prior_distance": res.prior_distance}
        if sys_.h_exact is not None:
            entry["rel_l2"] = rel_l2_error(res.h, sys_.h_exact)
        runs.append((res, sys_, entry))

    res, sys_, _ = runs[0]
    h_ex = sys_.h_exact if sys_.h_exact is not None else np.full_like(res.h, np.nan)
    em.write_csv(
        "influx.csv", ["t", "h_exact", "h_recovered"],
        zip(sys_.node_times, h_ex, res.h),
    )
    summary = {
        "fixture": case.name,
        "n": args.n,
        "rule": args.rule,
        "lambda": args.lam,
        "prior": args.prior,
        "noise": args.noise,
        "runs": [e for _, _, e in runs],
        "h_origin_extrapolated": float(np.interp(0.0, sys_.node_times[:2], res.h[:2]))
        if res.h.size >= 2 else None,
        "origin_note": "first node extrapolated linearly; accuracy degrades near t=0",
    }
    em.write_json("summary.json", summary)
    em.finish(vars(args) | {"subcommand": "inverse"})
    return summary


def _cmd_pipeline(args) -> dict:
    case = make_fixture(args.fixture, b=args.b)
    rule = rule_nodes(args.rule)
    grid = plan_grid(case, args.nx, safety=args.safety)
    _, path_full = solve_direct(case, grid)
    path = resample_path(path_full, args.n)
    sys_ = assemble_system(path, case, rule, m_x=args.mx)
    res = tikhonov_solve(sys_, TikhonovConfig(lam=args.lam, prior=args.prior))
    em = Emitter(Path(args.out))
    _emit_path(em, "front.csv", path)
    h_ex = sys_.h_exact if sys_.h_exact is not None else np.full_like(res.h, np.nan)
    em.write_csv(
        "influx.csv", ["t", "h_exact", "h_recovered"],
        zip(sys_.node_times, h_ex, res.h),
    )
    summary = {
        "fixture": case.name,
        "nx": args.nx,
        "n": args.n,
        "rule": args.rule,
        "lambda": args.lam,
        "prior": args.prior,
        "residual": res.residual,
    }
    if sys_.h_exact is not None:
        mask = sys_.node_times >= 0.1 * case.T
        summary["rel_l2"] = rel_l2_error(res.h, sys_.h_exact)
        summary["rel_l2_tail"] = float(
            np.linalg.norm((res.h - sys_.h_exact)[mask]) / np.linalg.norm(sys_.h_exact[mask])
        )
    em.write_json("summary.json", summary)
    em.finish(vars(args) | {"subcommand": "pipeline"})
    return summary


def _cmd_abel(args) -> dict:
    case = make_fixture(args.fixture, b=args.b)
    tt = np.linspace(0.0, case.T, args.n + 1)
    h = TimeSignal.from_function(case.exact.h, name="h")
    em = Emitter(Path(args.out))
    fwd = np.array([0.0] + [abel_forward(h, t) for t in tt[1:]])
    if args.mode == "forward":
        em.write_csv("abel.csv", ["t", "forward"], zip(tt, fwd))
    else:
        F = TimeSignal.from_samples(tt, fwd)
        inv = np.array([np.nan] + [abel_inverse(F, t) for t in tt[1:-1]] + [np.nan])
        if args.mode == "inverse":
            em.write_csv("abel.csv", ["t", "forward", "inverse"], zip(tt, fwd, inv))
        else:
            rel = np.abs(inv / case.exact.h(tt) - 1.0)
            em.write_csv(
                "abel.csv", ["t", "forward", "roundtrip", "rel_error"],
                zip(tt, fwd, inv, rel),
            )
    summary = {"fixture": case.name, "mode": args.mode, "n": args.n}
    if args.mode == "roundtrip":
        window = (tt >= 0.1 * case.T) & (tt <= 0.9 * case.T)
        summary["max_rel_error_mid"] = float(np.nanmax(np.abs(
            np.where(window, inv / case.exact.h(tt) - 1.0, 0.0)
        )))
    em.write_json("summary.json", summary)
    em.finish(vars(args) | {"subcommand": "abel"})
    return summary


def _cmd_sweep(args) -> dict:
    case = make_fixture(args.fixture, b=args.b)
    rule = rule_nodes(args.rule)
    lams = [float(v) for v in args.lambdas.split(",") if v]
    noises = [float(v) for v in args.noises.split(",") if v != ""]
    reports = run_sweep(
        case, args.n, rule, lams, noises,
        n_seeds=args.seeds, seed0=args.seed0, prior=args.prior, m_x=args.mx,
    )
    em = Emitter(Path(args.out))
    header = list(reports[0].row().keys())
    em.write_csv("report.csv", header, (list(r.row().values()) for r in reports))

    curves = [r for r in reports if r.h_recovered is not None]
    if curves:
        by_key = {}
        for r in curves:
            by_key.setdefault((r.lam, r.noise_level), r)
        rows = []
        for (lam, lvl), r in sorted(by_key.items()):
            h_ex = case.exact.h(r.node_times) if case.exact else np.full_like(r.h_recovered, np.nan)
            for t, he, hr in zip(r.node_times, h_ex, r.h_recovered):
                rows.append((lam, lvl, r.seed, t, he, hr))
        em.write_csv(
            "influx.csv", ["lambda", "noise_level", "seed", "t", "h_exact", "h_recovered"], rows
        )
    em.write_json("summary.json", {
        "fixture": case.name,
        "cells": len(reports),
        "failed": sum(1 for r in reports if r.status != "ok"),
    })
    em.finish(vars(args) | {"subcommand": "sweep"})
    return {"cells": len(reports)}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stefan", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, fixture_required=True):
        sp.add_argument("--fixture", required=fixture_required, choices=FIXTURE_NAMES)
        sp.add_argument("--b", type=float, default=None, help="override b (example2 only)")
        sp.add_argument("--out", required=True, help="output directory")

    d = sub.add_parser("direct", help="solve the direct problem on a fixture")
    common(d)
    d.add_argument("--nx", type=int, required=True, help="spatial node count")
    d.add_argument("--safety", type=float, default=0.8)
    d.add_argument("--tm", type=float, default=None, help="report time (default: first stored step)")
    d.set_defaults(func=_cmd_direct)

    i = sub.add_parser("inverse", help="recover the influx from a front")
    common(i, fixture_required=False)
    i.add_argument("--path", default=None, help="CSV front file (t,s[,sdot])")
    i.add_argument("--n", type=int, default=1000, help="time panels")
    i.add_argument("--rule", choices=RULE_NAMES, default="gauss3")
    i.add_argument("--lambda", dest="lam", type=float, required=True)
    i.add_argument("--prior", choices=("zero", "exact"), default="zero")
    i.add_argument("--noise", type=float, default=0.0)
    i.add_argument("--seeds", type=int, default=1)
    i.add_argument("--seed0", type=int, default=0)
    i.add_argument("--mx", type=int, default=None)
    i.set_defaults(func=_cmd_inverse)

    pl = sub.add_parser("pipeline", help="direct solve, then invert the numerical front")
    common(pl)
    pl.add_argument("--nx", type=int, required=True)
    pl.add_argument("--n", type=int, required=True)
    pl.add_argument("--rule", choices=RULE_NAMES, default="gauss3")
    pl.add_argument("--lambda", dest="lam", type=float, required=True)
    pl.add_argument("--prior", choices=("zero", "exact"), default="zero")
    pl.add_argument("--safety", type=float, default=0.8)
    pl.add_argument("--mx", type=int, default=None)
    pl.set_defaults(func=_cmd_pipeline)

    a = sub.add_parser("abel", help="half-order integral of a fixture influx")
    common(a)
    a.add_argument("--mode", choices=("forward", "inverse", "roundtrip"), required=True)
    a.add_argument("--n", type=int, default=1000)
    a.set_defaults(func=_cmd_abel)

    s = sub.add_parser("sweep", help="parameter sweep with noise and seeds")
    common(s)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--rule", choices=RULE_NAMES, default="gauss3")
    s.add_argument("--lambdas", required=True, help="comma-separated values")
    s.add_argument("--noises", required=True, help="comma-separated fractions")
    s.add_argument("--seeds", type=int, default=1)
    s.add_argument("--seed0", type=int, default=0)
    s.add_argument("--prior", choices=("zero", "exact"), default="zero")
    s.add_argument("--mx", type=int, default=None)
    s.set_defaults(func=_cmd_sweep)
    return p


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand == "inverse" and args.fixture is None and args.path is None:
            raise ConfigurationError("config.input.missing", "need --fixture or --path")
        args.func(args)
        return 0
    except ConfigurationError as e:
        print(f"error: {e.tag}: {e}", file=sys.stderr)
        return 2
    except NumericalFault as e:
        print(f"error: {e.tag}: {e}", file=sys.stderr)
        return 3
    except StefanError as e:
        print(f"error: {e.tag}: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command())
