"""Orchestration of the headline convergence experiments: many-body fields
against the effective field over a shrinking radius sequence, with
deterministic report files and an emitted plot script."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import oned
from .config import ExperimentConfig
from .effective import far_field_effective, solve_ls
from .fields import BoundedDomain
from .foldy import assemble_and_solve, evaluate_field, far_field, optical_theorem_residual
from .io import ensure_dir, write_table_csv
from .placement import CountingLaw, place
from .quadrature import sphere_quadrature

REPORT_HEADER = ["a", "M", "iterations", "n_probe", "sup_error", "l2_error", "farfield_error", "opt_theorem_fl", "opt_theorem_eff"]


@dataclass
class ConvergenceRow:
    a: float
    M: int
    iterations: int
    n_probe: int
    sup_error: float
    l2_error: float
    farfield_error: float
    opt_theorem_fl: float
    opt_theorem_eff: float
    wall_time: float


@dataclass
class ConvergenceReport:
    rows: list

    def sup_errors(self):
        return [r.sup_error for r in self.rows]


def probe_box_points(domain: BoundedDomain, points_per_axis: int, scale: float) -> np.ndarray:
    """Lattice over the domain's bounding box inflated by `scale` about its
    center."""
    lo, hi = domain.bounding_box()
    c = (lo + hi) / 2.0
    half = (hi - lo) / 2.0 * scale
    axes = [np.linspace(c[i] - half[i], c[i] + half[i], points_per_axis) for i in range(lo.size)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def run_convergence_3d(cfg: ExperimentConfig, out_dir=None, progress=None) -> ConvergenceReport:
    """For each radius: place, solve the many-body system, compare fields and
    far fields against the effective solution solved once."""
    say = progress or (lambda msg: None)
    spec = cfg.spec()
    ctx = cfg.wave()
    domain = cfg.domain

    say(f"effective solve (h = {cfg.h_effective})")
    sol_e = solve_ls(spec.q, domain, ctx, cfg.h_effective, tol=cfg.tol, maxiter=cfg.maxiter, restart=cfg.restart)
    dirs, w_dirs = sphere_quadrature(cfg.ff_n_theta, cfg.ff_n_phi)
    ff_e = far_field_effective(sol_e, dirs)
    ff_e_fwd = far_field_effective(sol_e, ctx.alpha[None, :]).values[0]
    ot_eff = optical_theorem_residual(ff_e_fwd, dirs, w_dirs, ff_e.values, ctx.k)

    # One probe set shared by every radius level: a point qualifies only if it
    # keeps the exclusion distance from the centers of *all* levels, so the
    # sup/L2 norms below compare the same functional across levels.
    probe = probe_box_points(domain, cfg.probe_points_per_axis, cfg.probe_scale)
    clouds = []
    for a in cfg.a_sequence:
        say(f"a = {a}: placing")
        cloud = place(domain, CountingLaw(n=spec.n, a=a, dim=3), strength=spec.A, cell_factor=cfg.cell_factor)
        clouds.append(cloud)
        if cloud.M:
            dist, _ = cKDTree(cloud.centers).query(probe, k=1)
            probe = probe[dist >= cfg.probe_exclusion * a]

    rows = []
    for a, cloud in zip(cfg.a_sequence, clouds):
        t0 = time.perf_counter()
        say(f"a = {a}: solving M = {cloud.M}")
        sys = assemble_and_solve(
            cloud, ctx, mode=cfg.mode, tol=cfg.tol, dense_cap=cfg.dense_cap, maxiter=cfg.maxiter, restart=cfg.restart
        )
        u_m = evaluate_field(sys, probe)
        u_e = sol_e.evaluate(probe)
        diff = np.abs(u_m - u_e)
        ff_m = far_field(sys, dirs)
        ff_m_fwd = far_field(sys, ctx.alpha[None, :]).values[0]
        ot_fl = optical_theorem_residual(ff_m_fwd, dirs, w_dirs, ff_m.values, ctx.k)
        rows.append(
            ConvergenceRow(
                a=a,
                M=cloud.M,
                iterations=sys.iterations,
                n_probe=probe.shape[0],
                sup_error=float(np.max(diff)),
                l2_error=float(np.sqrt(np.mean(diff**2))),
                farfield_error=float(np.max(np.abs(ff_m.values - ff_e.values))),
                opt_theorem_fl=ot_fl,
                opt_theorem_eff=ot_eff,
                wall_time=time.perf_counter() - t0,
            )
        )
        say(f"a = {a}: sup error {rows[-1].sup_error:.3e} ({rows[-1].wall_time:.1f}s)")
        if out_dir is not None:
            _flush_report(out_dir, rows)  # partial rows survive later failures
    report = ConvergenceReport(rows=rows)
    if out_dir is not None:
        _flush_report(out_dir, rows)
        emit_plot_script(os.path.join(out_dir, "plot_report.py"))
    return report


def _flush_report(out_dir, rows):
    ensure_dir(out_dir)
    write_table_csv(
        os.path.join(out_dir, "report.csv"),
        REPORT_HEADER,
        [
            [r.a, r.M, r.iterations, r.n_probe, r.sup_error, r.l2_error, r.farfield_error, r.opt_theorem_fl, r.opt_theorem_eff]
            for r in rows
        ],
    )
    # timings kept out of the deterministic report
    write_table_csv(os.path.join(out_dir, "timings.csv"), ["a", "wall_time"], [[r.a, r.wall_time] for r in rows])


def run_convergence_1d(cfg: ExperimentConfig, out_dir=None) -> list:
    spec = cfg.spec()
    ctx = cfg.wave()
    rows = oned.converge_1d(spec, cfg.interval, cfg.a_sequence, ctx, h_effective=cfg.h_effective, cell_factor=cfg.cell_factor)
    if out_dir is not None:
        ensure_dir(out_dir)
        write_table_csv(
            os.path.join(out_dir, "report_1d.csv"),
            ["a", "M", "sup_error_vs_ue", "sup_error_vs_oracle", "sup_error_fl_vs_oracle"],
            [[r.a, r.M, r.err_fl_vs_ue, r.err_tm_vs_ue, r.err_fl_vs_tm] for r in rows],
        )
        emit_plot_script(os.path.join(out_dir, "plot_report.py"), report_name="report_1d.csv", error_col="sup_error_vs_ue")
    return rows


PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Log-log convergence plots from {report}; run next to the report file."""
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

with open("{report}") as fh:
    rows = list(csv.DictReader(fh))

a = [float(r["a"]) for r in rows]
err = [float(r["{error_col}"]) for r in rows]
M = [int(r["M"]) for r in rows] if rows and "M" in rows[0] else None

fig, axes = plt.subplots(1, 2 if M else 1, figsize=(9, 4))
ax0 = axes[0] if M else axes
ax0.loglog(a, err, "o-")
ax0.set_xlabel("a")
ax0.set_ylabel("{error_col}")
ax0.set_title("field error vs radius")
if M:
    axes[1].loglog(a, M, "s-")
    axes[1].set_xlabel("a")
    axes[1].set_ylabel("M")
    axes[1].set_title("scatterer count vs radius")
fig.tight_layout()
fig.savefig("convergence.png", dpi=150)
print("wrote convergence.png")
'''


def emit_plot_script(path, report_name="report.csv", error_col="sup_error"):
    """Self-contained plotting script; emission is byte-idempotent."""
    with open(path, "w") as fh:
        fh.write(PLOT_TEMPLATE.format(report=report_name, error_col=error_col))
    return path
