"""Acceptance gate: seven criteria, each printing one PASS/FAIL line.

Run with `pytest -v`; the whole file is designed to finish in well under
30 minutes on a single core (the two 3D convergence runs dominate).
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

from smallscat.config import parse_config
from smallscat.effective import far_field_effective, partial_wave_solve, solve_ls
from smallscat.experiments import run_convergence_3d
from smallscat.fields import (
    BoundedDomain,
    WaveContext,
    constant_field,
    gaussian_bump,
    sinusoid_positive,
    spherical_well,
)
from smallscat.foldy import assemble_and_solve, ball_kernel_weight, far_field, optical_theorem_residual
from smallscat.oned import (
    Interval1D,
    PiecewisePotential1D,
    place1d,
    solve_fl_1d,
    solve_ls_1d,
    transfer_matrix_solve,
)
from smallscat.placement import CountingLaw, place, riemann_limit_check
from smallscat.quadrature import sphere_quadrature

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _report(name, ok, detail):
    print(f"\n{name}: {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def conv3d_first(tmp_path_factory):
    """Criterion 5's configured experiment, shared with criterion 7."""
    cfg = parse_config(str(CONFIG_DIR / "convergence3d.cfg"))
    out = tmp_path_factory.mktemp("conv3d_first")
    t0 = time.perf_counter()
    report = run_convergence_3d(cfg, out_dir=str(out))
    elapsed = time.perf_counter() - t0
    return cfg, out, report, elapsed


def test_criterion_1_riemann_limit():
    f = gaussian_bump(1.0, [0.5, 0.5, 0.5], 0.25)
    n = sinusoid_positive(0.3, 0.5, 1.0)
    cube = BoundedDomain.box([0, 0, 0], [1, 1, 1])
    t0 = time.perf_counter()
    rows = riemann_limit_check(f, n, cube, [0.04, 0.02, 0.01], dim=3, oracle_nodes_per_axis=64)
    elapsed = time.perf_counter() - t0
    errs = [r.rel_error for r in rows]
    ok = all(b <= a for a, b in zip(errs, errs[1:])) and errs[-1] < 0.03 and elapsed < 60.0
    _report(
        "CRITERION 1 (Riemann limit of cloud sums)",
        ok,
        f"rel errors {', '.join(f'{e:.3%}' for e in errs)} at a = 0.04/0.02/0.01; "
        f"need non-increasing and < 3% at a = 0.01; {elapsed:.1f}s",
    )


def test_criterion_2_kernel_weight():
    a = 0.05
    offsets = np.linspace(0.0, 3.0 * a, 50)
    worst = 0.0
    for r in offsets:
        # adaptive quadrature of the ball integral of 1/|x - y| after the
        # exact spherical-shell reduction: each shell of radius s contributes
        # 4 pi s^2 / max(r, s)
        oracle, _ = quad(
            lambda s: 4.0 * np.pi * s * s / max(r, s),
            0.0,
            a,
            points=[r] if 0.0 < r < a else None,
            limit=200,
        )
        worst = max(worst, abs(ball_kernel_weight(r, a) - oracle) / oracle)
    # one-ulp neighbors straddle the branch switch without picking up the
    # (continuous) slope of the weight itself
    seam_ref = 4.0 * np.pi * a * a / 3.0
    seam_jump = abs(ball_kernel_weight(np.nextafter(a, 0.0), a) - ball_kernel_weight(np.nextafter(a, np.inf), a)) / seam_ref
    ok = worst <= 1e-8 and seam_jump <= 1e-13
    _report(
        "CRITERION 2 (ball kernel weight exactness)",
        ok,
        f"max rel error vs adaptive quadrature {worst:.2e} (need <= 1e-8) over 50 offsets in [0, 3a]; "
        f"seam jump {seam_jump:.2e} (need <= 1e-13)",
    )


def test_criterion_3_effective_solver_oracle():
    R, q0, k = 0.5, -1.0, 1.0
    h = R / 16.0
    ball = BoundedDomain.ball([0, 0, 0], R)
    ctx = WaveContext(k=k, alpha=[0.0, 0.0, 1.0])
    t0 = time.perf_counter()
    sol = solve_ls(spherical_well(q0, [0, 0, 0], R), ball, ctx, h)
    oracle = partial_wave_solve(q0, R, k)

    theta = np.linspace(0.0, np.pi, 73)
    dirs = np.stack([np.sin(theta), np.zeros_like(theta), np.cos(theta)], axis=-1)
    ff = far_field_effective(sol, dirs).values
    ref = oracle.amplitude(theta)
    ff_err = float(np.max(np.abs(ff - ref)) / np.max(np.abs(ref)))

    qdirs, qw = sphere_quadrature(16, 24)
    amps = far_field_effective(sol, qdirs).values
    fwd = far_field_effective(sol, ctx.alpha[None, :]).values[0]
    ot = optical_theorem_residual(fwd, qdirs, qw, amps, k)

    # field agreement on the 2R probe sphere (same solve, independent check)
    sphere_pts = 2.0 * R * qdirs
    u_e = sol.evaluate(sphere_pts)
    u_ref = oracle.exterior_field(sphere_pts, ctx.alpha)
    field_err = float(np.max(np.abs(u_e - u_ref)) / np.max(np.abs(u_ref)))
    elapsed = time.perf_counter() - t0

    ok = ff_err < 0.01 and ot <= 0.01 and field_err < 0.01 and elapsed < 300.0
    _report(
        "CRITERION 3 (spherical-well oracle, h = R/16)",
        ok,
        f"far-field rel sup error {ff_err:.2e} (need < 1e-2), optical theorem residual {ot:.2e} "
        f"(need <= 1e-2), 2R-sphere field error {field_err:.2e}; {elapsed:.1f}s (need < 300s)",
    )


def test_criterion_4_oned_exactness_chain():
    t0 = time.perf_counter()
    interval = Interval1D(0.0, 1.0)
    ctx = WaveContext(k=1.0, alpha=[1.0])

    # (i) Nystrom vs transfer matrix for a step potential
    step = PiecewisePotential1D([0.0, 1.0], [-0.5])
    tm = transfer_matrix_solve(step, ctx.k)
    ls = solve_ls_1d(step, interval, ctx, h=1e-3)
    x = np.linspace(-0.5, 1.5, 201)
    err_i = float(np.max(np.abs(ls.evaluate(x) - tm.field(x))))

    # (ii)+(iii) literal step-cloud potential and the point-collocation solver
    # against u_e over the shrinking radius sequence
    u_e = solve_ls_1d(constant_field(-0.5), interval, ctx, h=1e-3)
    a_seq = [1e-2, 5e-3, 2.5e-3]
    clouds = [place1d(interval, constant_field(0.25), a, A=constant_field(-2.0)) for a in a_seq]
    probe = np.linspace(-0.5, 1.5, 241)
    for cloud in clouds:
        dist = np.min(np.abs(probe[:, None] - cloud.centers[None, :, 0]), axis=1)
        probe = probe[dist >= 2.0 * cloud.a]
    tm_errs, fl_errs = [], []
    for cloud in clouds:
        ue_vals = u_e.evaluate(probe)
        tm_vals = transfer_matrix_solve(PiecewisePotential1D.from_cloud(cloud), ctx.k).field(probe)
        fl_vals = solve_fl_1d(cloud, ctx).field(probe)
        tm_errs.append(float(np.max(np.abs(tm_vals - ue_vals))))
        fl_errs.append(float(np.max(np.abs(fl_vals - ue_vals))))
    elapsed = time.perf_counter() - t0

    ok = (
        err_i <= 1e-4
        and tm_errs[2] < 0.5 * tm_errs[0]
        and fl_errs[2] < 0.5 * fl_errs[0]
        and elapsed < 60.0
    )
    _report(
        "CRITERION 4 (1D exactness chain)",
        ok,
        f"Nystrom vs transfer matrix {err_i:.2e} (need <= 1e-4); literal-potential errors "
        f"{tm_errs[0]:.2e} -> {tm_errs[2]:.2e} and collocation errors {fl_errs[0]:.2e} -> "
        f"{fl_errs[2]:.2e} (both need halving); {elapsed:.1f}s",
    )


def test_criterion_5_headline_convergence(conv3d_first):
    cfg, _, report, elapsed = conv3d_first
    sups = report.sup_errors()
    Ms = [r.M for r in report.rows]
    ratios = [Ms[i] / Ms[0] * (cfg.a_sequence[i] / cfg.a_sequence[0]) ** 3 for i in range(len(Ms))]
    scaling_ok = all(abs(rr - 1.0) <= 0.02 for rr in ratios)
    decreasing = all(b < a for a, b in zip(sups, sups[1:]))
    halving = sups[-1] < 0.5 * sups[0]
    ok = decreasing and halving and scaling_ok and elapsed < 1800.0
    _report(
        "CRITERION 5 (headline 3D convergence)",
        ok,
        f"sup errors {', '.join(f'{s:.3e}' for s in sups)} (need strictly decreasing, "
        f"final < 0.5 x first); M = {Ms} vs a^-3 law ratios {', '.join(f'{rr:.4f}' for rr in ratios)} "
        f"(need within 2%); {elapsed:.0f}s (need < 1800s)",
    )


def test_criterion_6_physics_invariants():
    k = 1.0
    details = []

    # reciprocity, many-body solver
    cube = BoundedDomain.box([0, 0, 0], [1, 1, 1])
    q = gaussian_bump(-1.0, [0.3, 0.6, 0.4], 0.2)
    n0 = 0.3
    cloud = place(cube, CountingLaw(n=constant_field(n0), a=0.04, dim=3), strength=lambda p: q(p) / n0)
    b1 = np.array([0.0, 0.0, 1.0])
    b2 = np.array([1.0, 0.0, 0.0])
    s12 = far_field(assemble_and_solve(cloud, WaveContext(k=k, alpha=b1)), [b2]).values[0]
    s21 = far_field(assemble_and_solve(cloud, WaveContext(k=k, alpha=-b2)), [-b1]).values[0]
    rec_fl = abs(s12 - s21) / max(1.0, abs(s12))
    details.append(f"FL reciprocity {rec_fl:.2e}")

    # reciprocity, effective solver
    e12 = far_field_effective(solve_ls(q, cube, WaveContext(k=k, alpha=b1), 1.0 / 16.0), [b2]).values[0]
    e21 = far_field_effective(solve_ls(q, cube, WaveContext(k=k, alpha=-b2), 1.0 / 16.0), [-b1]).values[0]
    rec_eff = abs(e12 - e21) / max(1.0, abs(e12))
    details.append(f"effective reciprocity {rec_eff:.2e}")

    # flux conservation for 100 random 1D step potentials
    rng = np.random.default_rng(20260823)
    worst_flux = 0.0
    for _ in range(100):
        n_layers = int(rng.integers(1, 8))
        edges = np.sort(rng.uniform(-1.0, 1.0, n_layers + 1))
        while np.any(np.diff(edges) <= 1e-6):
            edges = np.sort(rng.uniform(-1.0, 1.0, n_layers + 1))
        values = rng.uniform(-2.0, 0.8, n_layers)
        res = transfer_matrix_solve(PiecewisePotential1D(edges, values), float(rng.uniform(0.5, 3.0)))
        worst_flux = max(worst_flux, res.flux_defect)
    details.append(f"worst flux defect {worst_flux:.2e}")

    # q = 0 yields zero scattering in every pipeline
    ctx3 = WaveContext(k=k, alpha=[0.0, 0.0, 1.0])
    empty = place(cube, CountingLaw(n=constant_field(0.0), a=0.02, dim=3))
    zero_fl = float(np.max(np.abs(far_field(assemble_and_solve(empty, ctx3), [[0.0, 0.0, 1.0]]).values))) if empty.M == 0 else np.inf
    zero_eff = float(np.max(np.abs(far_field_effective(solve_ls(constant_field(0.0), cube, ctx3, 1.0 / 8.0), [[0.0, 0.0, 1.0]]).values)))
    free = transfer_matrix_solve(PiecewisePotential1D([0.0, 1.0], [0.0]), k)
    zero_1d = max(abs(free.r), abs(free.t - 1.0))
    sol0 = solve_ls_1d(constant_field(0.0), Interval1D(0.0, 1.0), WaveContext(k=k, alpha=[1.0]), h=1e-2)
    x = np.linspace(-1.0, 2.0, 31)
    zero_ls1d = float(np.max(np.abs(sol0.evaluate(x) - np.exp(1j * k * x))))
    zero_all = max(zero_fl, zero_eff, zero_1d, zero_ls1d)
    details.append(f"zero-potential residual {zero_all:.2e}")

    ok = rec_fl <= 1e-6 and rec_eff <= 1e-6 and worst_flux <= 1e-12 and zero_all <= 1e-13
    _report(
        "CRITERION 6 (physics invariants)",
        ok,
        "; ".join(details) + " (need reciprocity <= 1e-6, flux <= 1e-12, zero scattering)",
    )


def test_criterion_7_determinism(conv3d_first, tmp_path_factory):
    cfg, first_out, _, _ = conv3d_first
    out2 = tmp_path_factory.mktemp("conv3d_second")
    run_convergence_3d(cfg, out_dir=str(out2))
    same_report = (first_out / "report.csv").read_bytes() == (Path(out2) / "report.csv").read_bytes()
    same_plot = (first_out / "plot_report.py").read_bytes() == (Path(out2) / "plot_report.py").read_bytes()
    ok = same_report and same_plot
    _report(
        "CRITERION 7 (byte-identical reports)",
        ok,
        f"report.csv identical: {same_report}; plot script identical: {same_plot} (timings excluded)",
    )
