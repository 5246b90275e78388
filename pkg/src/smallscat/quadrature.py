"""Deterministic quadrature helpers: composite midpoint rules on boxes and
product rules on the unit sphere."""

from __future__ import annotations

import numpy as np


def midpoint_nodes(lo, hi, nodes_per_axis):
    """Cell-centered lattice over the box [lo, hi], one weight per node.

    Returns (points (N, d), weights (N,)); weights sum exactly to the box
    volume.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    d = lo.size
    if np.isscalar(nodes_per_axis):
        nodes_per_axis = (int(nodes_per_axis),) * d
    axes = []
    w = 1.0
    for i in range(d):
        n = int(nodes_per_axis[i])
        h = (hi[i] - lo[i]) / n
        axes.append(lo[i] + h * (np.arange(n) + 0.5))
        w *= h
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return pts, np.full(pts.shape[0], w)


def integrate_over_domain(fn, domain, nodes_per_axis=64):
    """Composite-midpoint integral of fn over a bounded domain.

    The domain is sampled on its bounding box; nodes outside the domain get
    weight zero.
    """
    lo, hi = domain.bounding_box()
    pts, w = midpoint_nodes(lo, hi, nodes_per_axis)
    mask = domain.contains(pts)
    vals = np.asarray(fn(pts), dtype=float)
    return float(np.sum(vals[mask] * w[mask]))


def sphere_quadrature(n_theta=16, n_phi=24):
    """Product Gauss-Legendre (polar) x uniform (azimuthal) rule on S^2.

    Returns (directions (N, 3), weights (N,)); weights sum to 4*pi.
    """
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    wphi = 2.0 * np.pi / n_phi
    ct = x[:, None]
    st = np.sqrt(1.0 - ct**2)
    dirs = np.stack(
        [
            (st * np.cos(phi)[None, :]).ravel(),
            (st * np.sin(phi)[None, :]).ravel(),
            np.broadcast_to(ct, (n_theta, n_phi)).ravel(),
        ],
        axis=-1,
    )
    w = np.broadcast_to(wx[:, None] * wphi, (n_theta, n_phi)).ravel().copy()
    return dirs, w
