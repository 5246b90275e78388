"""Domains, scalar fields, the potential factorization q = n*A, wave
parameters, and the free-space kernels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import FeasibilityError, SingularKernelError
from .quadrature import midpoint_nodes

N_MAX_DEFAULT = 0.5  # non-overlap feasibility bound on the density field
FACTORIZATION_RTOL = 1e-12


@dataclass(frozen=True)
class BoundedDomain:
    """Axis-aligned box or ball with exact membership tests.

    Boxes are given by corner arrays (lo, hi); balls by (center, radius).
    Works in 1 and 3 dimensions (a 1D "box" is an interval).
    """

    kind: str  # "box" | "ball"
    lo: np.ndarray = None
    hi: np.ndarray = None
    center: np.ndarray = None
    radius: float = 0.0

    @staticmethod
    def box(lo, hi) -> "BoundedDomain":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or not np.all(hi > lo):
            raise ValueError("box needs hi > lo componentwise")
        return BoundedDomain(kind="box", lo=lo, hi=hi)

    @staticmethod
    def ball(center, radius) -> "BoundedDomain":
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if radius <= 0:
            raise ValueError("ball needs radius > 0")
        return BoundedDomain(kind="ball", center=center, radius=float(radius))

    @property
    def dim(self) -> int:
        return self.lo.size if self.kind == "box" else self.center.size

    def volume(self) -> float:
        if self.kind == "box":
            return float(np.prod(self.hi - self.lo))
        r, d = self.radius, self.dim
        if d == 1:
            return 2.0 * r
        if d == 3:
            return 4.0 * np.pi * r**3 / 3.0
        raise ValueError(f"unsupported dimension {d}")

    def bounding_box(self):
        if self.kind == "box":
            return self.lo, self.hi
        return self.center - self.radius, self.center + self.radius

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "box":
            return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        return np.sum((pts - self.center) ** 2, axis=1) <= self.radius**2

    def boundary_distance(self, pts) -> np.ndarray:
        """Distance to the boundary for interior points (negative outside)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "box":
            return np.min(np.minimum(pts - self.lo, self.hi - pts), axis=1)
        return self.radius - np.sqrt(np.sum((pts - self.center) ** 2, axis=1))


@dataclass(frozen=True)
class ScalarField:
    """Continuous real-valued field given by a pure evaluator on points.

    The evaluator takes an (N, d) array and returns (N,) values; declared
    (lower, upper) bounds must hold over the domain of use.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    lower: float
    upper: float
    name: str = ""

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.asarray(self.fn(pts), dtype=float)
        if out.shape != (pts.shape[0],):
            out = np.broadcast_to(out, (pts.shape[0],)).astype(float)
        return out


def constant_field(value: float, name: str = "constant") -> ScalarField:
    v = float(value)
    return ScalarField(fn=lambda pts: np.full(pts.shape[0], v), lower=v, upper=v, name=name)


def gaussian_bump(amplitude: float, center, width: float) -> ScalarField:
    """amplitude * exp(-|x - center|^2 / (2 width^2))."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    a, w = float(amplitude), float(width)

    def fn(pts):
        r2 = np.sum((pts - c) ** 2, axis=1)
        return a * np.exp(-r2 / (2.0 * w * w))

    return ScalarField(fn=fn, lower=min(a, 0.0), upper=max(a, 0.0), name="gaussian_bump")


def sinusoid(amplitude: float = 1.0, frequency: float = 1.0) -> ScalarField:
    """Sign-changing amplitude * sin(2 pi frequency x_1)."""
    a, f = float(amplitude), float(frequency)
    return ScalarField(
        fn=lambda pts: a * np.sin(2.0 * np.pi * f * pts[:, 0]),
        lower=-abs(a),
        upper=abs(a),
        name="sinusoid",
    )


def sinusoid_positive(base: float = 0.3, modulation: float = 0.5, frequency: float = 1.0) -> ScalarField:
    """base * (1 + modulation * sin(2 pi frequency x_1)); positive for |modulation| < 1."""
    b, m, f = float(base), float(modulation), float(frequency)
    return ScalarField(
        fn=lambda pts: b * (1.0 + m * np.sin(2.0 * np.pi * f * pts[:, 0])),
        lower=b * (1.0 - abs(m)),
        upper=b * (1.0 + abs(m)),
        name="sinusoid_positive",
    )


def spherical_well(depth: float, center, radius: float) -> ScalarField:
    """depth inside the ball |x - center| < radius, zero outside."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    d, r = float(depth), float(radius)

    def fn(pts):
        inside = np.sum((pts - c) ** 2, axis=1) < r * r
        return np.where(inside, d, 0.0)

    return ScalarField(fn=fn, lower=min(d, 0.0), upper=max(d, 0.0), name="spherical_well")


FIELD_CATALOG = {
    "constant": constant_field,
    "gaussian_bump": gaussian_bump,
    "sinusoid": sinusoid,
    "sinusoid_positive": sinusoid_positive,
    "spherical_well": spherical_well,
}


def catalog_field(name: str, **params) -> ScalarField:
    if name not in FIELD_CATALOG:
        raise KeyError(f"unknown field '{name}'; catalog: {sorted(FIELD_CATALOG)}")
    return FIELD_CATALOG[name](**params)


@dataclass(frozen=True)
class PotentialSpec:
    """Desired potential q factorized as q = n * A with density n >= 0."""

    q: ScalarField
    n: ScalarField
    A: ScalarField
    n_max: float = N_MAX_DEFAULT

    def check(self, domain: BoundedDomain, nodes_per_axis: int = 10):
        """Probe-grid validation of n >= 0, n <= n_max, and n*A = q."""
        lo, hi = domain.bounding_box()
        pts, _ = midpoint_nodes(lo, hi, nodes_per_axis)
        pts = pts[domain.contains(pts)]
        nv, av, qv = self.n(pts), self.A(pts), self.q(pts)
        if np.any(nv < -1e-15):
            raise FeasibilityError("density n(x) negative on probe grid")
        if np.any(nv > self.n_max * (1.0 + 1e-12)):
            raise FeasibilityError(f"density n(x) exceeds n_max={self.n_max}")
        err = np.abs(nv * av - qv) / np.maximum(1.0, np.abs(qv))
        if np.max(err) > FACTORIZATION_RTOL:
            raise FeasibilityError("n*A does not reproduce q on probe grid")


def factorize_potential(
    q: ScalarField,
    domain: BoundedDomain,
    strategy: str,
    level: float,
    n_max: float = N_MAX_DEFAULT,
) -> PotentialSpec:
    """Split q into density n and strength A.

    strategy "constant-density": n = level, A = q / level.
    strategy "constant-strength": A = level, n = q / level (q must not change
    sign against level, since n >= 0).
    """
    level = float(level)
    if strategy == "constant-density":
        if not (0.0 < level <= n_max):
            raise FeasibilityError(f"need 0 < n0 <= n_max={n_max}, got {level}")
        n = constant_field(level, name="n0")
        A = ScalarField(
            fn=lambda pts, _q=q, _n0=level: _q(pts) / _n0,
            lower=min(q.lower / level, q.upper / level),
            upper=max(q.lower / level, q.upper / level),
            name="q/n0",
        )
        return PotentialSpec(q=q, n=n, A=A, n_max=n_max)
    if strategy == "constant-strength":
        if level == 0.0:
            raise FeasibilityError("constant-strength needs A0 != 0")
        lo, hi = domain.bounding_box()
        pts, _ = midpoint_nodes(lo, hi, 10)
        pts = pts[domain.contains(pts)]
        nv = q(pts) / level
        if np.any(nv < -1e-14):
            raise FeasibilityError("q / A0 negative somewhere: n >= 0 violated")
        if np.any(nv > n_max * (1.0 + 1e-12)):
            raise FeasibilityError(f"q / A0 exceeds n_max={n_max}")
        A = constant_field(level, name="A0")
        n = ScalarField(
            fn=lambda pts, _q=q, _A0=level: _q(pts) / _A0,
            lower=min(q.lower / level, q.upper / level),
            upper=max(q.lower / level, q.upper / level),
            name="q/A0",
        )
        return PotentialSpec(q=q, n=n, A=A, n_max=n_max)
    raise ValueError(f"unknown factorization strategy '{strategy}'")


@dataclass(frozen=True)
class WaveContext:
    """Wavenumber and incident plane-wave direction."""

    k: float
    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        if self.k <= 0:
            raise ValueError("wavenumber k must be positive")
        if abs(np.linalg.norm(self.alpha) - 1.0) > 1e-14:
            raise ValueError("incident direction must be a unit vector")

    def ka(self, a: float) -> float:
        return self.k * a

    def incident(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.exp(1j * self.k * pts @ self.alpha)


def incident_plane_wave(ctx: WaveContext, x) -> np.ndarray:
    return ctx.incident(x)


def green3d(x, y, k: float):
    """Outgoing Helmholtz kernel e^{ik|x-y|} / (4 pi |x-y|)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    r = np.sqrt(np.sum((x - y) ** 2, axis=1))
    if np.any(r == 0.0):
        raise SingularKernelError("green3d is singular at coincident points")
    out = np.exp(1j * k * r) / (4.0 * np.pi * r)
    return out[0] if out.size == 1 else out


def green1d(x, y, k: float):
    """1D outgoing kernel -e^{ik|x-y|} / (2ik); finite at x = y."""
    if k <= 0:
        raise ValueError("wavenumber k must be positive")
    r = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return -np.exp(1j * k * r) / (2j * k)


@dataclass
class RegularGrid:
    """Regular lattice: origin, scalar spacing, per-axis extents."""

    origin: np.ndarray
    spacing: float
    extents: tuple

    def __post_init__(self):
        self.origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        self.extents = tuple(int(e) for e in self.extents)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.extents))

    def points(self) -> np.ndarray:
        axes = [self.origin[i] + self.spacing * np.arange(self.extents[i]) for i in range(len(self.extents))]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass
class GridField:
    """Complex field sampled on a regular grid."""

    grid: RegularGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(self.grid.n_nodes)

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid field contains non-finite values")
