"""Command-line entry point: run | limit | sweep | bl | verify.

All CSV output is deterministic (fixed column order, 17-significant-digit
floats) and every file starts with a comment line carrying the resolved
config hash.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, config_hash, parse_config, \
    render_config
from .core import interpolate_to_nodes, make_initial_state
from .diagnostics import WEIGHT_ORDERS
from .solver import RunAborted, run, run_limit
from .sweep import SweepPlan, run_sweep, thickness_scaling_report
from . import verify as verify_suites


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _write_csv(path: Path, header: str, columns, rows) -> None:
    lines = [header, ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _load_config(args) -> RunConfig:
    text = Path(args.config).read_text()
    cfg = parse_config(text)
    raw = {s: dict(d) for s, d in cfg.raw.items()}
    if args.mu is not None:
        raw["physics"]["mu"] = args.mu
    if args.n_cells is not None:
        raw["grid"]["n_cells"] = args.n_cells
    if args.t_end is not None:
        raw["time"]["t_end"] = args.t_end
    return parse_config(render_config(RunConfig(raw=raw)))


def _emit_trajectory(outdir: Path, cfg: RunConfig, traj, grid) -> None:
    tag = f"# config_hash={config_hash(cfg)}"
    rows = []
    xn = grid.node_positions
    for s in traj.snapshots:
        rho_n = interpolate_to_nodes(s.rho)
        th_n = interpolate_to_nodes(s.theta)
        for j in range(grid.n_cells + 1):
            rows.append((s.t, xn[j], rho_n[j], s.u[j], s.w[j, 0],
                         s.w[j, 1], s.b[j, 0], s.b[j, 1], th_n[j]))
    _write_csv(outdir / "snapshots.csv", tag,
               ("t", "x", "rho", "u", "w1", "w2", "b1", "b2", "theta"),
               rows)
    cols = ["t", "mass", "total_energy", "total_entropy", "min_rho",
            "max_rho", "min_theta", "max_theta", "dissipation_integral",
            "w_grad_l2"] + [f"weighted_w_grad_{n}" for n in WEIGHT_ORDERS]
    rows = [(d.t, d.mass, d.total_energy, d.total_entropy, d.min_rho,
             d.max_rho, d.min_theta, d.max_theta, d.dissipation_integral,
             d.w_grad_l2, *(d.weighted_w_grad[n] for n in WEIGHT_ORDERS))
            for d in traj.diagnostics]
    _write_csv(outdir / "diagnostics.csv", tag, cols, rows)


def _write_summary(outdir: Path, cfg: RunConfig, payload: dict) -> None:
    payload = {"config_hash": config_hash(cfg),
               "resolved_config": render_config(cfg), **payload}
    (outdir / "summary.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _scenario(cfg: RunConfig):
    grid = cfg.grid_spec()
    params = cfg.phys_params()
    bdry = cfg.boundary_data()
    initial = make_initial_state(grid, cfg["initial"]["preset"], bdry)
    return grid, params, bdry, initial, cfg.time_config()


def cmd_run(cfg: RunConfig, outdir: Path, limit: bool) -> int:
    grid, params, bdry, initial, tcfg = _scenario(cfg)
    if limit:
        params = replace(params, mu=0.0)
    try:
        traj = (run_limit if limit else run)(initial, grid, params, bdry,
                                             tcfg)
    except RunAborted as exc:
        _write_summary(outdir, cfg, {"status": "aborted",
                                     "failure": exc.report})
        return 1
    _emit_trajectory(outdir, cfg, traj, grid)
    _write_summary(outdir, cfg, {
        "status": "ok", "t_final": traj.snapshot_times[-1],
        "n_steps": len(traj.diagnostics) - 1,
        "final_mass": traj.diagnostics[-1].mass,
        "final_energy": traj.diagnostics[-1].total_energy})
    return 0


def _build_plan(cfg: RunConfig) -> SweepPlan:
    grid, params, bdry, initial, tcfg = _scenario(cfg)
    return SweepPlan(mu_values=cfg.mu_values(), grid=grid, params=params,
                     bdry=bdry, time=tcfg, initial=initial,
                     bl_tol=cfg.bl_tol(),
                     interior_deltas=cfg.interior_deltas())


def _fit_dict(fit):
    if fit is None:
        return None
    return {"exponent": fit.exponent, "prefactor": fit.prefactor,
            "max_log_residual": fit.max_log_residual}


def cmd_sweep(cfg: RunConfig, outdir: Path) -> int:
    plan = _build_plan(cfg)
    result = run_sweep(plan)
    tag = f"# config_hash={config_hash(cfg)}"
    rows = []
    for i, mu in enumerate(result.mu_values):
        if result.failures[i] is not None:
            rows.append((mu, "nan", "nan", "nan", "nan", "failed"))
            continue
        e = result.errors[i]
        rows.append((mu, e.combined, e.state_error, e.gradient_error,
                     result.deltas[i],
                     "saturated" if result.saturated[i] else "ok"))
    _write_csv(outdir / "sweep.csv", tag,
               ("mu", "combined_error", "state_error", "gradient_error",
                "delta_star", "status"), rows)
    fits = {"config_hash": config_hash(cfg),
            "rate": _fit_dict(result.rate_fit),
            "thickness": _fit_dict(result.thickness_fit),
            "scaled_w_grad": result.scaled_w_grad,
            "failures": result.failures}
    (outdir / "fits.json").write_text(
        json.dumps(fits, indent=2, sort_keys=True) + "\n")
    ok = all(f is None for f in result.failures)
    return 0 if ok else 1


def cmd_bl(cfg: RunConfig, outdir: Path) -> int:
    plan = _build_plan(cfg)
    result = run_sweep(plan)
    tag = f"# config_hash={config_hash(cfg)}"
    rows = [(mu, d if d is not None else "nan",
             {None: "failed", True: "saturated",
              False: "ok"}[result.saturated[i]])
            for i, (mu, d) in enumerate(zip(result.mu_values,
                                            result.deltas))]
    _write_csv(outdir / "thickness.csv", tag,
               ("mu", "delta_star", "status"), rows)
    try:
        report = thickness_scaling_report(result)
    except ValueError as exc:
        (outdir / "bl_fits.json").write_text(json.dumps(
            {"config_hash": config_hash(cfg), "error": str(exc)},
            indent=2) + "\n")
        return 1
    _write_csv(outdir / "tau_table.csv", tag,
               ("mu", "delta", "tau", "w_grad_interior"),
               [(r.mu, r.delta, r.tau, r.w_grad_interior)
                for r in report.tau_table])
    (outdir / "bl_fits.json").write_text(json.dumps({
        "config_hash": config_hash(cfg),
        "alpha": _fit_dict(report.alpha_fit),
        "excluded_saturated": list(report.excluded_saturated),
        "envelope_c1": report.envelope_c1,
        "envelope_c2": report.envelope_c2,
        "envelope_rel_residual": report.envelope_rel_residual,
    }, indent=2, sort_keys=True) + "\n")
    ok = all(f is None for f in result.failures)
    return 0 if ok else 1


def cmd_verify(cfg: RunConfig, outdir: Path) -> int:
    report = verify_suites.run_all()
    payload = {"config_hash": config_hash(cfg), "checks": report,
               "all_passed": all(c["passed"] for c in report.values())}
    (outdir / "verify_report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")
    for name, check in report.items():
        print(f"{name}: {'pass' if check['passed'] else 'FAIL'}")
    return 0 if payload["all_passed"] else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="planemhd",
        description="1-D plane-MHD solver and vanishing-shear-viscosity "
                    "experiment harness")
    parser.add_argument("command",
                        choices=("run", "limit", "sweep", "bl", "verify"))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--mu", type=float, default=None)
    parser.add_argument("--n-cells", type=int, default=None)
    parser.add_argument("--t-end", type=float, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.command == "run":
        return cmd_run(cfg, outdir, limit=False)
    if args.command == "limit":
        return cmd_run(cfg, outdir, limit=True)
    if args.command == "sweep":
        return cmd_sweep(cfg, outdir)
    if args.command == "bl":
        return cmd_bl(cfg, outdir)
    return cmd_verify(cfg, outdir)


if __name__ == "__main__":
    sys.exit(main())
