"""Deterministic scatterer placement realizing the counting law
N(cell) ~ V(a)^{-1} * integral of n over the cell, plus the Riemann-sum
convergence check for cloud averages."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import PlacementError
from .fields import BoundedDomain, ScalarField
from .quadrature import integrate_over_domain, midpoint_nodes


def ball_volume(a: float, dim: int) -> float:
    if dim == 3:
        return 4.0 * np.pi * a**3 / 3.0
    if dim == 1:
        return 2.0 * a
    raise ValueError(f"unsupported dimension {dim}")


@dataclass(frozen=True)
class CountingLaw:
    """Density field n and radius a fixing the per-cell center counts."""

    n: ScalarField
    a: float
    dim: int = 3

    @property
    def cell_volume_unit(self) -> float:
        return ball_volume(self.a, self.dim)


@dataclass
class ScattererCloud:
    centers: np.ndarray  # (M, dim)
    a: float
    strengths: np.ndarray  # (M,)
    dim: int

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float)).reshape(-1, self.dim)
        self.strengths = np.asarray(self.strengths, dtype=float).reshape(-1)
        if self.strengths.size != self.centers.shape[0]:
            raise ValueError("strengths and centers length mismatch")

    @property
    def M(self) -> int:
        return self.centers.shape[0]

    def min_pair_distance(self) -> float:
        if self.M < 2:
            return np.inf
        tree = cKDTree(self.centers)
        d, _ = tree.query(self.centers, k=2)
        return float(np.min(d[:, 1]))

    def validate(self, domain: BoundedDomain):
        if self.M and np.min(domain.boundary_distance(self.centers)) < self.a * (1.0 - 1e-12):
            raise ValueError("some balls stick out of the domain")
        if self.min_pair_distance() < 2.0 * self.a * (1.0 - 1e-12):
            raise ValueError("overlapping balls in cloud")


def _cell_sites(cell_lo, cell_sizes, count, g, dim):
    """First `count` sites of the g^dim midpoint sub-lattice of a cell,
    chosen in centrally symmetric pairs (closest to the cell center first) so
    partial fills keep the cell centroid."""
    idx = np.indices((g,) * dim).reshape(dim, -1).T  # (g^dim, dim)
    rel = (idx + 0.5) / g
    offsets = cell_sizes * (rel - 0.5)
    dist2 = np.sum(offsets**2, axis=1)
    flat = np.arange(idx.shape[0])
    order = np.lexsort((flat, dist2))
    # flat index of the centrally symmetric partner site
    partner = np.zeros(idx.shape[0], dtype=np.int64)
    mirrored = (g - 1) - idx
    strides = np.array([g ** (dim - 1 - i) for i in range(dim)], dtype=np.int64)
    partner = mirrored @ strides
    taken = np.zeros(idx.shape[0], dtype=bool)
    chosen = []
    for fi in order:
        if len(chosen) >= count:
            break
        if taken[fi]:
            continue
        chosen.append(fi)
        taken[fi] = True
        p = partner[fi]
        if p != fi and not taken[p] and len(chosen) < count:
            chosen.append(p)
            taken[p] = True
    sites = cell_lo + cell_sizes * rel[np.array(chosen, dtype=np.int64)]
    return sites


def place(
    domain: BoundedDomain,
    law: CountingLaw,
    strength: Optional[ScalarField] = None,
    cell_factor: float = 1.6,
) -> ScattererCloud:
    """Deterministic error-diffusion placement.

    The domain is partitioned into cells of side ~ cell_factor * sqrt(a);
    each cell's real-valued target count V(a)^{-1} * int n is rounded with the
    fractional residue carried to the next cell in lexicographic scan order.
    Counts land on a regular sub-lattice per cell, spacing kept >= 2a.
    """
    a, dim = law.a, law.dim
    if a <= 0:
        raise ValueError("radius must be positive")
    lo, hi = domain.bounding_box()
    sizes = hi - lo
    vol_unit = law.cell_volume_unit

    s0 = cell_factor * np.sqrt(a)
    ncells = np.maximum(1, np.round(sizes / s0)).astype(int)
    cell_sizes = sizes / ncells
    # densest admissible sub-lattice: spacing >= 2a along every axis
    g_cap = int(np.floor(np.min(cell_sizes) / (2.0 * a)))

    sub = 4  # sub-quadrature points per axis for cell targets
    capacity = max(g_cap, 0) ** dim
    centers_out = []
    carry = 0.0
    total_target = 0.0
    for cell_idx in np.ndindex(*ncells):
        cell_lo = lo + cell_sizes * np.array(cell_idx)
        spts, sw = midpoint_nodes(cell_lo, cell_lo + cell_sizes, sub)
        smask = domain.contains(spts)
        if not np.any(smask):
            continue
        target = float(np.sum(law.n(spts[smask]) * sw[smask])) / vol_unit
        total_target += target
        want = target + carry
        count = int(np.floor(want + 0.5))
        carry = want - count
        if count > capacity:
            # local overflow (e.g. re-diffused boundary drops): spill the
            # excess forward along the scan rather than failing here
            carry += count - capacity
            count = capacity
        if count <= 0:
            continue
        g = min(int(np.ceil(count ** (1.0 / dim) * (1.0 - 1e-12))), g_cap)
        sites = _cell_sites(cell_lo, cell_sizes, count, g, dim)
        ok = domain.contains(sites) & (domain.boundary_distance(sites) >= a)
        if np.all(ok):
            centers_out.append(sites)
            continue
        # boundary-cut cell: reselect from the densest admissible sub-lattice
        # so the mass lands just inside the boundary instead of being lost
        idx = np.indices((g_cap,) * dim).reshape(dim, -1).T
        rel = (idx + 0.5) / g_cap
        cand = cell_lo + cell_sizes * rel
        keep = domain.contains(cand) & (domain.boundary_distance(cand) >= a)
        cand = cand[keep]
        if cand.shape[0]:
            d2 = np.sum((cand - (cell_lo + cell_sizes / 2.0)) ** 2, axis=1)
            order = np.lexsort((np.arange(cand.shape[0]), d2))[:count]
            centers_out.append(cand[order])
            carry += count - order.size  # re-diffuse what still cannot fit
        else:
            carry += count

    if centers_out:
        centers = np.vstack(centers_out)
    else:
        centers = np.zeros((0, dim))
    if abs(centers.shape[0] - total_target) > max(1.0, 0.02 * total_target):
        raise PlacementError(
            f"placed {centers.shape[0]} centers against a target of {total_target:.1f}: "
            f"density too high for non-overlapping balls at spacing 2a={2 * a}"
        )
    strengths = strength(centers) if (strength is not None and centers.shape[0]) else np.zeros(centers.shape[0])
    return ScattererCloud(centers=centers, a=a, strengths=strengths, dim=dim)


def count_in_region(cloud: ScattererCloud, region: BoundedDomain) -> int:
    if cloud.M == 0:
        return 0
    return int(np.count_nonzero(region.contains(cloud.centers)))


@dataclass
class RiemannRow:
    a: float
    M: int
    cloud_sum: float
    integral: float
    rel_error: float


def riemann_limit_check(
    f: ScalarField,
    n: ScalarField,
    domain: BoundedDomain,
    a_sequence,
    dim: int = 3,
    cell_factor: float = 1.6,
    oracle_nodes_per_axis: int = 64,
):
    """Compare sum_m f(x_m) V(a) against the quadrature value of
    int_D f n dx for a decreasing radius sequence."""
    a_sequence = list(a_sequence)
    if any(b >= a for a, b in zip(a_sequence, a_sequence[1:])):
        raise ValueError("a_sequence must be strictly decreasing")
    integral = integrate_over_domain(lambda p: f(p) * n(p), domain, oracle_nodes_per_axis)
    rows = []
    for a in a_sequence:
        cloud = place(domain, CountingLaw(n=n, a=a, dim=dim), strength=None, cell_factor=cell_factor)
        s = float(np.sum(f(cloud.centers))) * ball_volume(a, dim) if cloud.M else 0.0
        denom = abs(integral) if integral != 0.0 else 1.0
        rows.append(RiemannRow(a=a, M=cloud.M, cloud_sum=s, integral=integral, rel_error=abs(s - integral) / denom))
    return rows


def save_cloud(path, cloud: ScattererCloud):
    with open(path, "w") as fh:
        fh.write(f"# dim={cloud.dim} a={float(cloud.a):.17g} M={cloud.M}\n")
        for x, s in zip(cloud.centers, cloud.strengths):
            coords = " ".join(f"{float(c):.17g}" for c in x)
            fh.write(f"{coords} {float(s):.17g}\n")


def load_cloud(path) -> ScattererCloud:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("missing cloud header line")
        meta = dict(tok.split("=") for tok in header[1:].split())
        dim, a, m = int(meta["dim"]), float(meta["a"]), int(meta["M"])
        data = np.loadtxt(fh, ndmin=2) if m else np.zeros((0, dim + 1))
    if data.shape != (m, dim + 1):
        raise ValueError("cloud file shape does not match header")
    return ScattererCloud(centers=data[:, :dim], a=a, strengths=data[:, dim], dim=dim)
