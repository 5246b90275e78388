"""Pure-numpy reference kernels; the compiled backend must match these."""

from __future__ import annotations

import numpy as np

_BLOCK = 2048  # target rows per block, bounds temporary memory at BLOCK x M


def set_num_threads(n: int) -> None:
    # numpy backend relies on BLAS threading only; nothing to configure here
    return None


def helm_matvec(pts, coef, diag, k, x):
    """y_j = diag_j x_j + sum_{m != j} e^{ik r_jm} / (4 pi r_jm) coef_m x_m."""
    pts = np.ascontiguousarray(pts, dtype=float)
    coef = np.asarray(coef, dtype=float)
    diag = np.asarray(diag, dtype=complex)
    x = np.asarray(x, dtype=complex)
    m = pts.shape[0]
    y = diag * x
    cx = coef * x
    for j0 in range(0, m, _BLOCK):
        j1 = min(j0 + _BLOCK, m)
        d = pts[j0:j1, None, :] - pts[None, :, :]
        r = np.sqrt(np.sum(d * d, axis=2))
        g = np.exp(1j * k * r)
        np.divide(g, 4.0 * np.pi * r, out=g, where=r > 0)
        for j in range(j0, j1):
            g[j - j0, j] = 0.0
        y[j0:j1] += g @ cx
    return y


def helm_eval(targets, centers, coef, radius, k):
    """Ball-averaged single-layer sum.

    v_i = sum_m e^{ik r_im} / (4 pi) coef_m w(r_im), with
    w(r) = V(a)/r for r >= a and 2 pi (a^2 - r^2/3) for r < a, a = radius.
    """
    targets = np.ascontiguousarray(np.atleast_2d(targets), dtype=float)
    centers = np.ascontiguousarray(np.atleast_2d(centers), dtype=float)
    coef = np.asarray(coef, dtype=complex)
    a = float(radius)
    vol = 4.0 * np.pi * a**3 / 3.0
    n = targets.shape[0]
    out = np.zeros(n, dtype=complex)
    for i0 in range(0, n, _BLOCK):
        i1 = min(i0 + _BLOCK, n)
        d = targets[i0:i1, None, :] - centers[None, :, :]
        r = np.sqrt(np.sum(d * d, axis=2))
        w = np.where(r >= a, np.divide(vol, r, out=np.full_like(r, np.inf), where=r > 0), 2.0 * np.pi * (a * a - r * r / 3.0))
        out[i0:i1] = (np.exp(1j * k * r) / (4.0 * np.pi) * w) @ coef
    return out
