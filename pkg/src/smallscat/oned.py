"""One-dimensional analog: interval placement, the discrete many-segment
system, the effective integral equation, and an exact transfer-matrix oracle
for piecewise-constant potentials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .errors import ResolutionError, SolverError
from .fields import BoundedDomain, PotentialSpec, ScalarField, WaveContext
from .placement import CountingLaw, ScattererCloud, place


@dataclass(frozen=True)
class Interval1D:
    c: float
    d: float

    def __post_init__(self):
        if not (np.isfinite(self.c) and np.isfinite(self.d) and self.c < self.d):
            raise ValueError("interval needs finite c < d")

    @property
    def length(self) -> float:
        return self.d - self.c

    def domain(self) -> BoundedDomain:
        return BoundedDomain.box([self.c], [self.d])


@dataclass
class PiecewisePotential1D:
    """Step potential: constant value per layer between consecutive edges,
    zero outside (edges[0], edges[-1])."""

    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.edges.size != self.values.size + 1:
            raise ValueError("need len(edges) == len(values) + 1")
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing")

    @staticmethod
    def from_cloud(cloud: ScattererCloud) -> "PiecewisePotential1D":
        """The literal union-of-segments potential: value A_m on
        (x_m - a, x_m + a), zero in the gaps."""
        if cloud.dim != 1:
            raise ValueError("needs a 1D cloud")
        order = np.argsort(cloud.centers[:, 0])
        xs = cloud.centers[order, 0]
        As = cloud.strengths[order]
        a = cloud.a
        edges, values = [], []
        for x, A in zip(xs, As):
            lo, hi = x - a, x + a
            if edges and lo < edges[-1] - 1e-15:
                raise ValueError("overlapping segments in cloud")
            if edges and lo > edges[-1]:
                edges.append(lo)
                values.append(0.0)
                edges.append(hi)
                values.append(A)
            else:
                if not edges:
                    edges.append(lo)
                edges.append(hi)
                values.append(A)
        if not edges:
            edges, values = [0.0, 1.0], [0.0]
        return PiecewisePotential1D(np.array(edges), np.array(values))

    def value(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.searchsorted(self.edges, x, side="right") - 1
        out = np.zeros(x.shape)
        inside = (idx >= 0) & (idx < self.values.size)
        out[inside] = self.values[idx[inside]]
        return out


def _layer_propagate(state, kappa, L):
    """Advance (u, u') across a homogeneous layer with u'' = (q - k^2) u."""
    z = kappa * L
    if abs(z) < 1e-8:
        c = 1.0 - z * z / 2.0
        s_over_k = L * (1.0 - z * z / 6.0)
        ks = kappa * kappa * s_over_k
    else:
        c = np.cos(z)
        s_over_k = np.sin(z) / kappa
        ks = kappa * np.sin(z)
    u, up = state
    return np.array([u * c + up * s_over_k, -u * ks + up * c])


@dataclass
class TransferMatrixResult:
    """Exact 1D scattering solution for a step potential, left incidence."""

    r: complex
    t: complex
    k: float
    potential: PiecewisePotential1D
    _edge_states: np.ndarray  # (u, u') at each edge, (n_edges, 2)

    @property
    def flux_defect(self) -> float:
        return abs(abs(self.r) ** 2 + abs(self.t) ** 2 - 1.0)

    def field(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        edges = self.potential.edges
        k = self.k
        out = np.empty(x.shape, dtype=complex)
        left = x <= edges[0]
        right = x >= edges[-1]
        out[left] = np.exp(1j * k * x[left]) + self.r * np.exp(-1j * k * x[left])
        out[right] = self.t * np.exp(1j * k * x[right])
        mid = ~(left | right)
        for i in np.nonzero(mid)[0]:
            j = int(np.searchsorted(edges, x[i], side="right") - 1)
            kappa = np.sqrt(complex(k * k - self.potential.values[j]))
            state = _layer_propagate(self._edge_states[j], kappa, x[i] - edges[j])
            out[i] = state[0]
        return out


def transfer_matrix_solve(q: PiecewisePotential1D, k: float) -> TransferMatrixResult:
    """Exact reflection/transmission by propagating (u, u') across layers."""
    if k <= 0:
        raise ValueError("wavenumber k must be positive")
    edges, values = q.edges, q.values
    c, d = edges[0], edges[-1]
    # state at c is A + r*B for the two incidence basis solutions
    A = np.array([np.exp(1j * k * c), 1j * k * np.exp(1j * k * c)])
    B = np.array([np.exp(-1j * k * c), -1j * k * np.exp(-1j * k * c)])
    for j in range(values.size):
        kappa = np.sqrt(complex(k * k - values[j]))
        L = edges[j + 1] - edges[j]
        A = _layer_propagate(A, kappa, L)
        B = _layer_propagate(B, kappa, L)
    # match to t * e^{ikx} at d
    T = np.array([np.exp(1j * k * d), 1j * k * np.exp(1j * k * d)])
    mat = np.array([[B[0], -T[0]], [B[1], -T[1]]])
    r, t = np.linalg.solve(mat, -A)
    # edge states with the resolved r, for field evaluation
    states = np.empty((edges.size, 2), dtype=complex)
    states[0] = np.array([np.exp(1j * k * c) + r * np.exp(-1j * k * c), 1j * k * (np.exp(1j * k * c) - r * np.exp(-1j * k * c))])
    for j in range(values.size):
        kappa = np.sqrt(complex(k * k - values[j]))
        states[j + 1] = _layer_propagate(states[j], kappa, edges[j + 1] - edges[j])
    return TransferMatrixResult(r=complex(r), t=complex(t), k=k, potential=q, _edge_states=states)


def place1d(interval: Interval1D, n: ScalarField, a: float, A: ScalarField = None, cell_factor: float = 1.6) -> ScattererCloud:
    law = CountingLaw(n=n, a=a, dim=1)
    return place(interval.domain(), law, strength=A, cell_factor=cell_factor)


@dataclass
class OneDSystem:
    cloud: ScattererCloud
    ctx: WaveContext
    u: np.ndarray
    residual: float

    def field(self, x) -> np.ndarray:
        """u(x) = u0(x) + sum_m e^{ik|x - x_m|} / (2ik) A_m u_m 2a."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = self.ctx.k
        u0 = self.ctx.incident(x[:, None])
        if self.cloud.M == 0:
            return u0
        r = np.abs(x[:, None] - self.cloud.centers[None, :, 0])
        kernel = np.exp(1j * k * r) / (2j * k)
        return u0 + kernel @ (self.cloud.strengths * self.u) * (2.0 * self.cloud.a)


def solve_fl_1d(cloud: ScattererCloud, ctx: WaveContext, tol: float = 1e-10) -> OneDSystem:
    """Collocation at the segment centers: diagonal coefficient
    1 - A_j a / (ik), off-diagonal -e^{ik|x_j - x_m|}/(2ik) A_m 2a."""
    if cloud.dim != 1:
        raise ValueError("needs a 1D cloud")
    m = cloud.M
    u0 = ctx.incident(cloud.centers)
    if m == 0:
        return OneDSystem(cloud, ctx, np.zeros(0, complex), 0.0)
    xs = cloud.centers[:, 0]
    r = np.abs(xs[:, None] - xs[None, :])
    K = np.exp(1j * ctx.k * r) / (2j * ctx.k) * (cloud.strengths * 2.0 * cloud.a)[None, :]
    mat = np.eye(m, dtype=complex) - K
    u = scipy.linalg.solve(mat, u0)
    residual = float(np.max(np.abs(mat @ u - u0)) / np.max(np.abs(u0)))
    if residual > tol * 100:
        raise SolverError(f"1D collocation residual {residual:.3e} too large")
    return OneDSystem(cloud, ctx, u, residual)


@dataclass
class OneDEffectiveSolution:
    interval: Interval1D
    ctx: WaveContext
    nodes: np.ndarray
    weights: np.ndarray
    q_nodes: np.ndarray
    u: np.ndarray
    residual: float

    def evaluate(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = self.ctx.k
        u0 = self.ctx.incident(x[:, None])
        r = np.abs(x[:, None] - self.nodes[None, :])
        kernel = np.exp(1j * k * r) / (2j * k)
        return u0 + kernel @ (self.weights * self.q_nodes * self.u)


def solve_ls_1d(
    q: Union[PiecewisePotential1D, ScalarField, Callable],
    interval: Interval1D,
    ctx: WaveContext,
    h: float,
    tol: float = 1e-10,
) -> OneDEffectiveSolution:
    """Trapezoid Nystrom solve of u(x) - int e^{ik|x-y|}/(2ik) q(y) u(y) dy = u0(x).

    The 1D kernel is bounded, so no singular correction is needed.
    """
    if ctx.k * h > 0.2:
        raise ResolutionError(f"kh = {ctx.k * h:.3g} > 0.2")
    c, d = interval.c, interval.d
    n = max(2, int(round((d - c) / h)))
    nodes = np.linspace(c, d, n + 1)
    weights = np.full(n + 1, (d - c) / n)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    # sample q just inside the interval so end nodes see the interior value
    eps = 1e-9 * (d - c)
    sample = np.clip(nodes, c + eps, d - eps)
    if isinstance(q, PiecewisePotential1D):
        qn = q.value(sample)
    elif isinstance(q, ScalarField):
        qn = q(sample[:, None])
    else:
        qn = np.asarray(q(sample), dtype=float)
    r = np.abs(nodes[:, None] - nodes[None, :])
    K = np.exp(1j * ctx.k * r) / (2j * ctx.k) * (weights * qn)[None, :]
    mat = np.eye(n + 1, dtype=complex) - K
    u0 = ctx.incident(nodes[:, None])
    u = scipy.linalg.solve(mat, u0)
    residual = float(np.max(np.abs(mat @ u - u0)) / np.max(np.abs(u0)))
    if residual > tol * 100:
        raise SolverError(f"1D Nystrom residual {residual:.3e} too large")
    return OneDEffectiveSolution(interval, ctx, nodes, weights, qn, u, residual)


@dataclass
class Convergence1DRow:
    a: float
    M: int
    err_fl_vs_ue: float
    err_tm_vs_ue: float
    err_fl_vs_tm: float


def probe_points_1d(interval: Interval1D, cloud: ScattererCloud, n_points: int = 241, pad: float = 0.5, exclusion: float = 2.0):
    """Uniform probe over the padded interval, excluding points within
    exclusion*a of any segment center."""
    c, d = interval.c, interval.d
    L = d - c
    x = np.linspace(c - pad * L, d + pad * L, n_points)
    if cloud.M:
        dist = np.min(np.abs(x[:, None] - cloud.centers[None, :, 0]), axis=1)
        x = x[dist >= exclusion * cloud.a]
    return x


def converge_1d(
    spec: PotentialSpec,
    interval: Interval1D,
    a_sequence,
    ctx: WaveContext,
    h_effective: float = 1e-3,
    cell_factor: float = 1.6,
):
    """Shrinking-radius study: many-segment solutions against the effective
    solution and the exact transfer-matrix oracle of the literal potential."""
    u_e = solve_ls_1d(spec.q, interval, ctx, h_effective)
    clouds = [place1d(interval, spec.n, a, spec.A, cell_factor=cell_factor) for a in a_sequence]
    # shared probe set: keep the exclusion distance from every level's centers
    x = np.linspace(interval.c - 0.5 * (interval.d - interval.c), interval.d + 0.5 * (interval.d - interval.c), 241)
    for cloud in clouds:
        if cloud.M:
            dist = np.min(np.abs(x[:, None] - cloud.centers[None, :, 0]), axis=1)
            x = x[dist >= 2.0 * cloud.a]
    rows = []
    for a, cloud in zip(a_sequence, clouds):
        ue_vals = u_e.evaluate(x)
        sys = solve_fl_1d(cloud, ctx)
        fl_vals = sys.field(x)
        if cloud.M:
            tm = transfer_matrix_solve(PiecewisePotential1D.from_cloud(cloud), ctx.k)
            tm_vals = tm.field(x)
        else:
            tm_vals = ctx.incident(x[:, None])
        rows.append(
            Convergence1DRow(
                a=a,
                M=cloud.M,
                err_fl_vs_ue=float(np.max(np.abs(fl_vals - ue_vals))),
                err_tm_vs_ue=float(np.max(np.abs(tm_vals - ue_vals))),
                err_fl_vs_tm=float(np.max(np.abs(fl_vals - tm_vals))),
            )
        )
    return rows
