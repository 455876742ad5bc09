"""Command-line front end: simulate | expand | diagnose | verify-scaling | bench.

Module errors surface as a nonzero exit status with one machine-readable
JSON line on stderr: {"error": <kind>, "message": <text>}.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bilinear import bilinear_direct, bilinear_fast, plan_convolution
from .config import PRESETS, RunConfig, parse_config
from .errors import ConfigError, NskvError
from .evolution import boundary_guard, picard_solve, run_simulation
from .lattice import KLattice, VecField, XGrid, divergence_max, parseval_energy, parseval_enstrophy
from .physical import MarginalSeries, marginal_enstrophy_k3, marginal_enstrophy_x3
from .scaling import ScalingParams, run_scaling_experiment
from .series import (
    compute_gp_table,
    estimate_critical_amplitude,
    estimate_lambda,
    fit_fixed_point,
    lambda_history,
    rescale_gp,
    series_partial_sum,
)
from .snapshot import (
    FLOAT_FMT,
    read_snapshot_tagged,
    write_diagnostics_csv,
    write_gp_table,
    write_marginal_csv,
    write_run_metadata,
    write_snapshot,
)


def _load_config(args) -> RunConfig:
    text = ""
    if args.config:
        text = Path(args.config).read_text()
    elif not args.preset:
        raise ConfigError("provide --config PATH or --preset NAME")
    cfg = parse_config(text, preset=args.preset)
    overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if getattr(args, "snapshot_every", None) is not None:
        overrides["snapshot_every"] = args.snapshot_every
    if overrides:
        cfg = replace(cfg, **overrides).validated()
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    result = run_simulation(cfg)
    write_diagnostics_csv(out / "diagnostics.csv", result.diagnostics)

    k3_marg = None
    x3_marg = None
    xgrid = XGrid.period_cell(cfg.lattice()) if cfg.seed == "antisymmetric" else None
    for i, (t_tau, fld) in enumerate(result.snapshots):
        write_snapshot(fld, t_tau, out / f"snap_{i:05d}.nskv", seed_kind=cfg.seed)
        coords, row = marginal_enstrophy_k3(fld)
        if k3_marg is None:
            k3_marg = MarginalSeries(coords, "k3")
        k3_marg.append(t_tau, row)
        if xgrid is not None:
            xc, xrow, flagged = marginal_enstrophy_x3(fld, xgrid)
            if x3_marg is None:
                x3_marg = MarginalSeries(xc, "x3")
            x3_marg.append(t_tau, xrow, flagged)
    if k3_marg is not None:
        write_marginal_csv(out / "marginal_k3.csv", k3_marg)
    if x3_marg is not None:
        write_marginal_csv(out / "marginal_x3.csv", x3_marg)
    write_run_metadata(out / "run_meta.json", result, __version__)
    print(f"status: {result.status}")
    if result.t_star_tau is not None:
        print(f"untrusted beyond t* = {result.t_star_tau:g} tau")
    print(f"amplitude: {result.amplitude:.6g}; records: {len(result.diagnostics)}")
    return 0 if result.status == "completed" else 3


def cmd_expand(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    flow = cfg.flow_config()
    s_max = args.s_max if args.s_max is not None else 1.0 / flow.a**2
    times = np.linspace(0.0, s_max, args.grid_points)
    table = compute_gp_table(flow, args.orders, times, seed_kind=cfg.seed,
                             memory_budget=int(args.memory_budget))
    write_gp_table(table, out / "gp")

    report: dict = {
        "orders": table.max_order,
        "s_max": s_max,
        "amplitude": table.amplitude,
        "seed_kind": table.seed_kind,
    }

    lam_hist = lambda_history(table)
    lines = ["s,lambda_hat"]
    for s, lam in zip(table.times, lam_hist):
        lines.append(f"{FLOAT_FMT.format(s)},{FLOAT_FMT.format(lam)}")
    (out / "lambda_report.csv").write_text("\n".join(lines) + "\n")

    if table.seed_kind == "complex":
        rows = ["p,s,c_hat,axial_residual"]
        for p in range(1, table.max_order + 1):
            try:
                prof = rescale_gp(table, p, s_max)
                c_hat, resid = fit_fixed_point(prof, p)
            except NskvError:
                continue
            rows.append(f"{p},{FLOAT_FMT.format(s_max)},"
                        f"{FLOAT_FMT.format(c_hat)},{FLOAT_FMT.format(resid)}")
        (out / "fixpoint_report.csv").write_text("\n".join(rows) + "\n")
        crit = estimate_critical_amplitude(table, s_max)
        report["a_c_series"] = crit.a_c_series
        est = estimate_lambda(table, s_max)
        report["lambda_hat"] = est.value

    # cross-validate the expansion against the fixed-point solver at a small
    # multiplier; this certifies the recursion including its boundary terms
    a_small = args.check_multiplier
    v_series = series_partial_sum(table, a_small, s_max, table.max_order)
    v0 = table.terms[1][0].scaled(a_small)
    v_solver = picard_solve(v0, s_max, max(32, args.grid_points - 1), 1e-13)
    denom = v_solver.sup_norm()
    dev = float(np.sqrt(np.max(np.sum((v_series.values - v_solver.values) ** 2, axis=-1))))
    report["series_vs_solver_rel"] = dev / denom if denom > 0 else 0.0
    (out / "expand_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"series-vs-solver relative deviation: {report['series_vs_solver_rel']:.3e}")
    if "a_c_series" in report:
        print(f"critical multiplier estimate (series): {report['a_c_series']:.6g}")
    return 0


def cmd_diagnose(args) -> int:
    out = _out_dir(args)
    snap_dir = Path(args.snapshots)
    files = sorted(snap_dir.glob("snap_*.nskv"))
    if not files:
        raise ConfigError(f"no snap_*.nskv files under {snap_dir}")
    lines = ["t_tau,energy,enstrophy,divergence_max,boundary_frac"]
    for path in files:
        fld, t_tau, _kind = read_snapshot_tagged(path)
        div = divergence_max(fld)
        enst = parseval_enstrophy(fld) if div <= 1e-6 else float("nan")
        row = [t_tau, parseval_energy(fld), enst, div,
               boundary_guard(fld, args.shell_fraction)]
        lines.append(",".join(FLOAT_FMT.format(x) for x in row))
    (out / "diagnose.csv").write_text("\n".join(lines) + "\n")
    print(f"recomputed {len(files)} snapshots -> {out / 'diagnose.csv'}")
    return 0


def cmd_verify_scaling(args) -> int:
    out = _out_dir(args)
    params = ScalingParams(n_steps=args.n_steps, amplitude=args.amplitude)
    report = run_scaling_experiment(params, refinements=args.refinements,
                                    workers=args.workers or 1)
    payload = {
        "errors": report.errors,
        "steps": report.steps,
        "decreasing": report.decreasing,
        "scale_factor": params.lam,
    }
    (out / "scaling_report.json").write_text(json.dumps(payload, indent=2) + "\n")
    for n, e in zip(report.steps, report.errors):
        print(f"steps={n:5d}  relative error={e:.3e}")
    print(f"monotone decrease under refinement: {report.decreasing}")
    return 0 if report.decreasing else 3


def cmd_bench(args) -> int:
    out = _out_dir(args)
    lattice = KLattice(1.0, (args.n1, args.n2, args.n3))
    rng = np.random.default_rng(args.rng_seed)
    v = VecField(lattice, rng.standard_normal(lattice.shape + (3,)))
    w = VecField(lattice, rng.standard_normal(lattice.shape + (3,)))
    # compile the direct kernel off the clock
    tiny = KLattice(1.0, (2, 2, 2))
    tv = VecField(tiny, rng.standard_normal(tiny.shape + (3,)))
    bilinear_direct(tv, tv)

    plan = plan_convolution(lattice, workers=args.workers or 1)
    bilinear_fast(v, w, plan)  # warm the transform plan
    t0 = time.perf_counter()
    fast = bilinear_fast(v, w, plan)
    t_fast = time.perf_counter() - t0
    t0 = time.perf_counter()
    direct = bilinear_direct(v, w)
    t_direct = time.perf_counter() - t0
    scale = float(np.max(np.abs(direct.values)))
    rel = float(np.max(np.abs(fast.values - direct.values))) / scale if scale else 0.0
    speedup = t_direct / t_fast if t_fast > 0 else float("inf")

    header = "n1,n2,n3,nodes,t_direct_s,t_fast_s,speedup,max_rel_dev"
    row = (f"{lattice.shape[0]},{lattice.shape[1]},{lattice.shape[2]},{lattice.node_count},"
           f"{t_direct:.6f},{t_fast:.6f},{speedup:.2f},{rel:.3e}")
    (out / "bench.csv").write_text(header + "\n" + row + "\n")
    print(header)
    print(row)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nskv", description=__doc__)
    ap.add_argument("--version", action="version", version=f"nskv {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, snapshots=False):
        p.add_argument("--config", help="run configuration file (key = value lines)")
        p.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int,
                       default=int(os.environ.get("NSKV_WORKERS", "0")) or None)
        if snapshots:
            p.add_argument("--snapshot-every", type=int, dest="snapshot_every")

    p = sub.add_parser("simulate", help="march the configured seed and emit diagnostics")
    common(p, snapshots=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("expand", help="compute the expansion table and its reports")
    common(p)
    p.add_argument("--orders", type=int, default=6)
    p.add_argument("--grid-points", type=int, default=65)
    p.add_argument("--s-max", type=float, default=None)
    p.add_argument("--check-multiplier", type=float, default=0.1)
    p.add_argument("--memory-budget", type=float, default=2 * 1024**3)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("diagnose", help="recompute observables from stored snapshots")
    p.add_argument("--snapshots", required=True, help="directory holding snap_*.nskv")
    p.add_argument("--out", required=True)
    p.add_argument("--shell-fraction", type=float, default=0.1)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("verify-scaling", help="nested-lattice scaling experiment")
    p.add_argument("--out", required=True)
    p.add_argument("--n-steps", type=int, default=ScalingParams.n_steps)
    p.add_argument("--amplitude", type=float, default=ScalingParams.amplitude)
    p.add_argument("--refinements", type=int, default=2)
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("NSKV_WORKERS", "0")) or None)
    p.set_defaults(func=cmd_verify_scaling)

    p = sub.add_parser("bench", help="direct-versus-fast convolution timing")
    p.add_argument("--out", required=True)
    p.add_argument("--n1", type=int, default=16)
    p.add_argument("--n2", type=int, default=16)
    p.add_argument("--n3", type=int, default=128)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("NSKV_WORKERS", "0")) or None)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NskvError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
