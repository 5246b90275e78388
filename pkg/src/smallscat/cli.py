"""Command-line entry points.

Exit codes: 0 success, 2 invalid configuration, 3 solver/placement failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import kernels
from .config import parse_config, validate_config
from .effective import far_field_effective, solve_ls
from .errors import ConfigError, SmallScatError
from .experiments import run_convergence_1d, run_convergence_3d
from .fields import GridField, RegularGrid
from .foldy import assemble_and_solve, evaluate_field, far_field
from .io import (
    ensure_dir,
    write_farfield_csv,
    write_field_csv_1d,
    write_grid_csv,
    write_grid_raw,
    write_um_csv,
)
from .oned import place1d, solve_fl_1d, solve_ls_1d
from .placement import CountingLaw, load_cloud, place, save_cloud
from .quadrature import sphere_quadrature

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _load(args):
    cfg = parse_config(args.config)
    if getattr(args, "mode", None):
        cfg.mode = args.mode
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    if getattr(args, "threads", 0):
        kernels.set_num_threads(args.threads)
    diags = validate_config(cfg)
    if diags:
        raise ConfigError("; ".join(diags))
    return cfg


def _output_grid(cfg):
    pts_per_axis = cfg.probe_points_per_axis
    lo, hi = cfg.domain.bounding_box()
    c = (lo + hi) / 2.0
    half = (hi - lo) / 2.0 * cfg.probe_scale
    spacing = 2.0 * float(np.max(half)) / (pts_per_axis - 1) if pts_per_axis > 1 else 1.0
    return RegularGrid(origin=c - half, spacing=spacing, extents=(pts_per_axis,) * 3)


def cmd_place(args):
    cfg = _load(args)
    out = ensure_dir(cfg.output_dir)
    spec = cfg.spec()
    for a in cfg.a_sequence:
        if cfg.dimension == 3:
            cloud = place(cfg.domain, CountingLaw(n=spec.n, a=a, dim=3), strength=spec.A, cell_factor=cfg.cell_factor)
        else:
            cloud = place1d(cfg.interval, spec.n, a, spec.A, cell_factor=cfg.cell_factor)
        path = os.path.join(out, f"cloud_a{a:g}.txt")
        save_cloud(path, cloud)
        print(f"a={a:g}: M={cloud.M} -> {path}")
    return EXIT_OK


def cmd_solve_fl(args):
    cfg = _load(args)
    out = ensure_dir(cfg.output_dir)
    spec = cfg.spec()
    ctx = cfg.wave()
    if args.cloud:
        cloud = load_cloud(args.cloud)
    else:
        a = cfg.a_sequence[0]
        cloud = place(cfg.domain, CountingLaw(n=spec.n, a=a, dim=3), strength=spec.A, cell_factor=cfg.cell_factor)
    sys_fl = assemble_and_solve(cloud, ctx, mode=cfg.mode, tol=cfg.tol, dense_cap=cfg.dense_cap, maxiter=cfg.maxiter, restart=cfg.restart)
    write_um_csv(os.path.join(out, "um.csv"), cloud, sys_fl.u)
    grid = _output_grid(cfg)
    field = GridField(grid=grid, values=evaluate_field(sys_fl, grid.points()))
    field.check_finite()
    write_grid_csv(os.path.join(out, "field.csv"), field)
    write_grid_raw(os.path.join(out, "field.raw"), field)
    dirs, _ = sphere_quadrature(cfg.ff_n_theta, cfg.ff_n_phi)
    write_farfield_csv(os.path.join(out, "farfield.csv"), far_field(sys_fl, dirs))
    print(f"M={cloud.M} iterations={sys_fl.iterations} residual={sys_fl.residual:.3e} -> {out}")
    return EXIT_OK


def cmd_solve_ls(args):
    cfg = _load(args)
    out = ensure_dir(cfg.output_dir)
    spec = cfg.spec()
    ctx = cfg.wave()
    sol = solve_ls(spec.q, cfg.domain, ctx, cfg.h_effective, tol=cfg.tol, maxiter=cfg.maxiter, restart=cfg.restart)
    field = GridField(grid=sol.disc.grid, values=sol.u)
    field.check_finite()
    write_grid_csv(os.path.join(out, "field_effective.csv"), field)
    write_grid_raw(os.path.join(out, "field_effective.raw"), field)
    dirs, _ = sphere_quadrature(cfg.ff_n_theta, cfg.ff_n_phi)
    write_farfield_csv(os.path.join(out, "farfield_effective.csv"), far_field_effective(sol, dirs))
    print(f"nodes={sol.disc.nodes.shape[0]} iterations={sol.iterations} residual={sol.residual:.3e} -> {out}")
    return EXIT_OK


def cmd_solve_1d(args):
    cfg = _load(args)
    out = ensure_dir(cfg.output_dir)
    spec = cfg.spec()
    ctx = cfg.wave()
    iv = cfg.interval
    pad = 0.5 * iv.length
    x = np.linspace(iv.c - pad, iv.d + pad, 401)
    sol = solve_ls_1d(spec.q, iv, ctx, cfg.h_effective)
    write_field_csv_1d(os.path.join(out, "field_effective_1d.csv"), x, sol.evaluate(x))
    a = cfg.a_sequence[0]
    cloud = place1d(iv, spec.n, a, spec.A, cell_factor=cfg.cell_factor)
    sys_fl = solve_fl_1d(cloud, ctx)
    write_field_csv_1d(os.path.join(out, "field_fl_1d.csv"), x, sys_fl.field(x))
    print(f"M={cloud.M} -> {out}")
    return EXIT_OK


def cmd_converge(args):
    cfg = _load(args)
    report = run_convergence_3d(cfg, out_dir=cfg.output_dir, progress=lambda m: print(m, flush=True))
    for r in report.rows:
        print(f"a={r.a:g} M={r.M} sup={r.sup_error:.4e} l2={r.l2_error:.4e} far={r.farfield_error:.4e}")
    return EXIT_OK


def cmd_converge_1d(args):
    cfg = _load(args)
    rows = run_convergence_1d(cfg, out_dir=cfg.output_dir)
    for r in rows:
        print(f"a={r.a:g} M={r.M} sup_vs_ue={r.err_fl_vs_ue:.4e} sup_vs_oracle={r.err_fl_vs_tm:.4e}")
    return EXIT_OK


def cmd_farfield(args):
    cfg = _load(args)
    out = ensure_dir(cfg.output_dir)
    ctx = cfg.wave()
    dirs, _ = sphere_quadrature(cfg.ff_n_theta, cfg.ff_n_phi)
    if args.cloud:
        cloud = load_cloud(args.cloud)
        sys_fl = assemble_and_solve(cloud, ctx, mode=cfg.mode, tol=cfg.tol, dense_cap=cfg.dense_cap, maxiter=cfg.maxiter, restart=cfg.restart)
        ff = far_field(sys_fl, dirs)
        path = os.path.join(out, "farfield.csv")
    else:
        spec = cfg.spec()
        sol = solve_ls(spec.q, cfg.domain, ctx, cfg.h_effective, tol=cfg.tol, maxiter=cfg.maxiter, restart=cfg.restart)
        ff = far_field_effective(sol, dirs)
        path = os.path.join(out, "farfield_effective.csv")
    write_farfield_csv(path, ff)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args):
    cfg = parse_config(args.config)
    diags = validate_config(cfg)
    if diags:
        for d in diags:
            print(f"INVALID: {d}")
        return EXIT_CONFIG
    print("config OK")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="smallscat", description="Small-scatterer potential engineering laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, cloud=False):
        sp.add_argument("--config", required=True, help="experiment config file")
        sp.add_argument("--out", help="output directory (overrides config)")
        sp.add_argument("--mode", choices=["dense", "iterative"], help="solver mode override")
        sp.add_argument("--threads", type=int, default=0, help="kernel threads (0 = default)")
        if cloud:
            sp.add_argument("--cloud", help="existing cloud file to solve instead of placing")

    common(sub.add_parser("place", help="write scatterer cloud files"))
    common(sub.add_parser("solve-fl", help="solve the many-body system"), cloud=True)
    common(sub.add_parser("solve-ls", help="solve the effective integral equation"))
    common(sub.add_parser("solve-1d", help="solve the 1D systems"))
    common(sub.add_parser("converge", help="run the 3D convergence experiment"))
    common(sub.add_parser("converge-1d", help="run the 1D convergence experiment"))
    common(sub.add_parser("farfield", help="far-field table for a cloud or the effective potential"), cloud=True)
    v = sub.add_parser("validate", help="check a config file")
    v.add_argument("--config", required=True)
    return p


HANDLERS = {
    "place": cmd_place,
    "solve-fl": cmd_solve_fl,
    "solve-ls": cmd_solve_ls,
    "solve-1d": cmd_solve_1d,
    "converge": cmd_converge,
    "converge-1d": cmd_converge_1d,
    "farfield": cmd_farfield,
    "validate": cmd_validate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SmallScatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
