"""Grid Nystrom solver for the limiting volume integral equation, with the
radially-symmetric partial-wave solution as an independent oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla
from scipy.special import eval_legendre, spherical_jn, spherical_yn

from . import kernels
from .errors import RegimeError, ResolutionError, SolverError
from .fields import BoundedDomain, RegularGrid, ScalarField, WaveContext
from .foldy import FarField, MAXITER_DEFAULT, RESTART_DEFAULT

KH_MAX = 0.5


@dataclass
class LSDiscretization:
    """Cell-centered grid over the domain's bounding box.

    Every node carries weight h^3; the singular self-cell is replaced by the
    ball of equal volume, so the self-weight is 2 pi a_eff^2 with
    a_eff = (3 h^3 / 4 pi)^(1/3).
    """

    grid: RegularGrid
    nodes: np.ndarray  # (N, 3)
    h: float
    q: np.ndarray  # per-node potential value (cell average, zero outside D)
    a_eff: float

    @property
    def weight(self) -> float:
        return self.h**3

    @property
    def self_weight(self) -> float:
        return 2.0 * np.pi * self.a_eff**2


def build_discretization(
    q: ScalarField,
    domain: BoundedDomain,
    h: float,
    cell_average: bool = True,
    subsamples: int = 4,
) -> LSDiscretization:
    lo, hi = domain.bounding_box()
    sizes = hi - lo
    counts = np.maximum(1, np.round(sizes / h)).astype(int)
    if np.any(np.abs(counts * h - sizes) > 1e-9 * np.max(sizes)):
        raise ResolutionError(f"spacing h={h} does not tile the bounding box {sizes}")
    grid = RegularGrid(origin=lo + h / 2.0, spacing=h, extents=tuple(counts))
    nodes = grid.points()
    if cell_average:
        fine = RegularGrid(
            origin=lo + h / (2.0 * subsamples),
            spacing=h / subsamples,
            extents=tuple(counts * subsamples),
        )
        fpts = fine.points()
        vals = np.where(domain.contains(fpts), q(fpts), 0.0)
        shape = []
        for c in counts:
            shape.extend([c, subsamples])
        vals = vals.reshape(shape)
        qv = vals.mean(axis=(1, 3, 5)).ravel()
    else:
        qv = np.where(domain.contains(nodes), q(nodes), 0.0)
    a_eff = (3.0 * h**3 / (4.0 * np.pi)) ** (1.0 / 3.0)
    return LSDiscretization(grid=grid, nodes=np.ascontiguousarray(nodes), h=h, q=qv, a_eff=a_eff)


@dataclass
class EffectiveSolution:
    disc: LSDiscretization
    ctx: WaveContext
    u: np.ndarray  # solution at the grid nodes
    iterations: int
    residual: float
    residual_history: list = field(default_factory=list)

    def evaluate(self, points) -> np.ndarray:
        """Off-grid evaluation by applying the discretized integral."""
        points = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
        u0 = self.ctx.incident(points)
        coef = (self.disc.q * self.u).astype(complex)
        scat = kernels.helm_eval(points, self.disc.nodes, coef, self.disc.a_eff, self.ctx.k)
        return u0 - scat


def solve_ls(
    q: ScalarField,
    domain: BoundedDomain,
    ctx: WaveContext,
    h: float,
    tol: float = 1e-8,
    cell_average: bool = True,
    maxiter: int = MAXITER_DEFAULT,
    restart: int = RESTART_DEFAULT,
) -> EffectiveSolution:
    """Nystrom solve of u(x) + int g(x,y) q(y) u(y) dy = u0(x) at the nodes."""
    if ctx.k * h > KH_MAX:
        raise ResolutionError(f"kh = {ctx.k * h:.3g} > {KH_MAX}: grid does not resolve the wavelength")
    disc = build_discretization(q, domain, h, cell_average=cell_average)
    n = disc.nodes.shape[0]
    coef = disc.q * disc.weight
    diag = (1.0 + disc.q * disc.a_eff**2 / 2.0).astype(complex)
    rhs = ctx.incident(disc.nodes)

    op = spla.LinearOperator(
        (n, n),
        matvec=lambda x: kernels.helm_matvec(disc.nodes, coef, diag, ctx.k, np.ascontiguousarray(x, dtype=complex)),
        dtype=complex,
    )
    history = []
    u, info = spla.gmres(
        op,
        rhs,
        rtol=tol,
        atol=0.0,
        restart=restart,
        maxiter=max(1, maxiter // restart),
        callback=lambda pr: history.append(float(pr)),
        callback_type="pr_norm",
    )
    if info != 0:
        raise SolverError(f"GMRES did not converge (info={info})", history)
    res = kernels.helm_matvec(disc.nodes, coef, diag, ctx.k, u) - rhs
    residual = float(np.max(np.abs(res)) / np.max(np.abs(rhs)))
    if not np.all(np.isfinite(u)):
        raise SolverError("non-finite values in solution", history)
    return EffectiveSolution(disc=disc, ctx=ctx, u=u, iterations=len(history), residual=residual, residual_history=history)


def far_field_effective(sol: EffectiveSolution, directions) -> FarField:
    """A(beta) = -(1/4 pi) int e^{-ik beta . y} q(y) u(y) dy by node quadrature."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    phases = np.exp(-1j * sol.ctx.k * directions @ sol.disc.nodes.T)
    vals = -(phases @ (sol.disc.q * sol.u)) * sol.disc.weight / (4.0 * np.pi)
    return FarField(directions, vals)


def equation_residual(sol: EffectiveSolution, points) -> float:
    """Self-consistency of the representation at arbitrary points: compares
    the kernel-backend evaluation against a direct numpy sum of the same
    discrete integral."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    u_rep = sol.evaluate(points)
    d = points[:, None, :] - sol.disc.nodes[None, :, :]
    r = np.sqrt(np.sum(d * d, axis=2))
    a = sol.disc.a_eff
    vol = sol.disc.weight
    w = np.where(r >= a, np.divide(vol, r, out=np.full_like(r, np.inf), where=r > 0), 2.0 * np.pi * (a * a - r * r / 3.0))
    integ = (np.exp(1j * sol.ctx.k * r) / (4.0 * np.pi) * w) @ (sol.disc.q * sol.u)
    u_direct = sol.ctx.incident(points) - integ
    return float(np.max(np.abs(u_rep - u_direct)) / np.max(np.abs(u_direct)))


@dataclass
class PartialWaveOracle:
    """Phase shifts for a constant spherical well, plus the exact exterior
    field and scattering amplitude they generate."""

    q0: float
    R: float
    k: float
    L_max: int
    deltas: np.ndarray

    def amplitude(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        ct = np.cos(theta)
        out = np.zeros(theta.shape, dtype=complex)
        for l in range(self.L_max + 1):
            d = self.deltas[l]
            out += (2 * l + 1) * np.exp(1j * d) * np.sin(d) * eval_legendre(l, ct)
        return out / self.k

    def exterior_field(self, points, alpha) -> np.ndarray:
        """Total field for r >= R (center at the origin)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        alpha = np.asarray(alpha, dtype=float)
        r = np.linalg.norm(points, axis=1)
        if np.any(r < self.R * (1.0 - 1e-12)):
            raise ValueError("exterior field requested inside the well")
        ct = np.clip(points @ alpha / r, -1.0, 1.0)
        out = np.zeros(points.shape[0], dtype=complex)
        for l in range(self.L_max + 1):
            d = self.deltas[l]
            radial = np.cos(d) * spherical_jn(l, self.k * r) - np.sin(d) * spherical_yn(l, self.k * r)
            out += (2 * l + 1) * (1j**l) * np.exp(1j * d) * radial * eval_legendre(l, ct)
        return out


def partial_wave_solve(q0: float, R: float, k: float, L_max: int = 10) -> PartialWaveOracle:
    """Phase shifts by logarithmic-derivative matching at r = R."""
    if k <= 0:
        raise ValueError("wavenumber k must be positive")
    kappa2 = k * k - q0
    if kappa2 <= 0:
        raise RegimeError(f"interior wavenumber squared {kappa2} <= 0: unsupported regime")
    kappa = np.sqrt(kappa2)
    ls = np.arange(L_max + 1)
    j_in = spherical_jn(ls, kappa * R)
    jp_in = spherical_jn(ls, kappa * R, derivative=True)
    j_out = spherical_jn(ls, k * R)
    jp_out = spherical_jn(ls, k * R, derivative=True)
    y_out = spherical_yn(ls, k * R)
    yp_out = spherical_yn(ls, k * R, derivative=True)
    num = k * jp_out * j_in - kappa * j_out * jp_in
    den = k * yp_out * j_in - kappa * y_out * jp_in
    deltas = np.arctan2(num, den)
    return PartialWaveOracle(q0=q0, R=R, k=k, L_max=L_max, deltas=deltas)
