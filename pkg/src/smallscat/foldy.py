"""Many-body solver: collocation at the scatterer centers closes the field
representation into an M x M linear system, solved dense or matrix-free."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from . import kernels
from .errors import CapacityError, RegimeError, SolverError
from .fields import WaveContext
from .placement import ScattererCloud, ball_volume

DENSE_CAP_DEFAULT = 8000
ITERATIVE_TOL_DEFAULT = 1e-8
DENSE_TOL_DEFAULT = 1e-10
MAXITER_DEFAULT = 500
RESTART_DEFAULT = 50
KA_WARN = 0.1
KA_REFUSE = 0.5


def ball_kernel_weight(dist, a: float):
    """Exact integral of |x - y|^{-1} over a ball of radius a centered at
    distance `dist` from x: V(a)/dist outside, 2 pi (a^2 - dist^2/3) inside.
    Both branches agree at dist = a."""
    if a <= 0:
        raise ValueError("radius must be positive")
    dist = np.asarray(dist, dtype=float)
    vol = ball_volume(a, 3)
    outside = np.divide(vol, dist, out=np.full_like(dist, np.inf), where=dist > 0)
    inside = 2.0 * np.pi * (a * a - dist * dist / 3.0)
    out = np.where(dist >= a, outside, inside)
    return float(out) if out.ndim == 0 else out


@dataclass
class FoldyLaxSystem:
    cloud: ScattererCloud
    ctx: WaveContext
    u: np.ndarray  # solved field values at the centers
    iterations: int
    residual: float
    mode: str
    residual_history: list = field(default_factory=list)


def _check_ka(ctx: WaveContext, a: float, allow_large_ka: bool):
    ka = ctx.ka(a)
    if ka > KA_REFUSE and not allow_large_ka:
        raise RegimeError(f"ka = {ka:.3g} > {KA_REFUSE}: outside the small-scatterer regime")
    if ka > KA_WARN:
        warnings.warn(f"ka = {ka:.3g} > {KA_WARN}: small-scatterer reduction degrades", stacklevel=3)


def _system_parts(cloud: ScattererCloud, ctx: WaveContext):
    vol = ball_volume(cloud.a, 3)
    coef = cloud.strengths * vol
    diag = (1.0 + cloud.strengths * cloud.a**2 / 2.0).astype(complex)
    rhs = ctx.incident(cloud.centers)
    return coef, diag, rhs


def assemble_and_solve(
    cloud: ScattererCloud,
    ctx: WaveContext,
    mode: str = "iterative",
    tol: float = None,
    dense_cap: int = DENSE_CAP_DEFAULT,
    maxiter: int = MAXITER_DEFAULT,
    restart: int = RESTART_DEFAULT,
    allow_large_ka: bool = False,
) -> FoldyLaxSystem:
    """Solve (1 + A_j a^2/2) u_j + sum_{m != j} g(x_j, x_m) A_m V(a) u_m = u0(x_j)."""
    if cloud.dim != 3:
        raise ValueError("3D solver needs a 3D cloud")
    _check_ka(ctx, cloud.a, allow_large_ka)
    coef, diag, rhs = _system_parts(cloud, ctx)
    m = cloud.M
    if m == 0:
        return FoldyLaxSystem(cloud, ctx, np.zeros(0, complex), 0, 0.0, mode)

    if mode == "dense":
        if m > dense_cap:
            raise CapacityError(f"M = {m} exceeds dense cap {dense_cap}")
        d = cloud.centers[:, None, :] - cloud.centers[None, :, :]
        r = np.sqrt(np.sum(d * d, axis=2))
        np.fill_diagonal(r, 1.0)
        mat = np.exp(1j * ctx.k * r) / (4.0 * np.pi * r) * coef[None, :]
        np.fill_diagonal(mat, diag)
        u = scipy.linalg.solve(mat, rhs)
        iterations = 0
        history = []
    elif mode == "iterative":
        tol = ITERATIVE_TOL_DEFAULT if tol is None else tol
        pts = np.ascontiguousarray(cloud.centers)
        op = spla.LinearOperator(
            (m, m),
            matvec=lambda x: kernels.helm_matvec(pts, coef, diag, ctx.k, np.ascontiguousarray(x, dtype=complex)),
            dtype=complex,
        )
        history = []
        counter = {"n": 0}

        def cb(pr_norm):
            counter["n"] += 1
            history.append(float(pr_norm))

        u, info = spla.gmres(
            op,
            rhs,
            rtol=tol,
            atol=0.0,
            restart=restart,
            maxiter=max(1, maxiter // restart),
            callback=cb,
            callback_type="pr_norm",
        )
        if info != 0:
            raise SolverError(f"GMRES did not converge (info={info})", history)
        iterations = counter["n"]
    else:
        raise ValueError(f"unknown mode '{mode}'")

    # a-posteriori infinity-norm residual
    if mode == "dense":
        res = mat @ u - rhs
    else:
        res = kernels.helm_matvec(np.ascontiguousarray(cloud.centers), coef, diag, ctx.k, u) - rhs
    residual = float(np.max(np.abs(res)) / np.max(np.abs(rhs)))
    check_tol = DENSE_TOL_DEFAULT if mode == "dense" else (tol if tol else ITERATIVE_TOL_DEFAULT)
    if residual > 10.0 * check_tol:
        raise SolverError(f"residual {residual:.3e} above tolerance {check_tol:.1e}", history)
    if not np.all(np.isfinite(u)):
        raise SolverError("non-finite values in solution", history)
    return FoldyLaxSystem(cloud, ctx, u, iterations, residual, mode, history)


def evaluate_field(sys: FoldyLaxSystem, points) -> np.ndarray:
    """u(x) = u0(x) - sum_m e^{ik|x - x_m|}/(4 pi) A_m u_m w(|x - x_m|, a)."""
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    u0 = sys.ctx.incident(points)
    if sys.cloud.M == 0:
        return u0
    coef = (sys.cloud.strengths * sys.u).astype(complex)
    scat = kernels.helm_eval(points, np.ascontiguousarray(sys.cloud.centers), coef, sys.cloud.a, sys.ctx.k)
    return u0 - scat


@dataclass
class FarField:
    directions: np.ndarray  # (N, 3) unit vectors
    values: np.ndarray  # complex amplitude per direction

    def __post_init__(self):
        self.directions = np.atleast_2d(np.asarray(self.directions, dtype=float))
        norms = np.linalg.norm(self.directions, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-14):
            raise ValueError("far-field directions must be unit vectors")
        self.values = np.asarray(self.values, dtype=complex).reshape(self.directions.shape[0])


def far_field(sys: FoldyLaxSystem, directions) -> FarField:
    """A(beta) = -(1/4 pi) sum_m e^{-ik beta . x_m} A_m V(a) u_m."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if sys.cloud.M == 0:
        return FarField(directions, np.zeros(directions.shape[0], complex))
    vol = ball_volume(sys.cloud.a, 3)
    phases = np.exp(-1j * sys.ctx.k * directions @ sys.cloud.centers.T)
    vals = -(phases @ (sys.cloud.strengths * vol * sys.u)) / (4.0 * np.pi)
    return FarField(directions, vals)


def optical_theorem_residual(ff_forward: complex, directions, weights, amplitudes, k: float) -> float:
    """Relative residual of Im A(alpha, alpha) = (k / 4 pi) * int |A|^2 dbeta."""
    total = float(np.sum(weights * np.abs(amplitudes) ** 2)) * k / (4.0 * np.pi)
    im_fwd = float(np.imag(ff_forward))
    denom = max(abs(im_fwd), abs(total), 1e-300)
    return abs(im_fwd - total) / denom
