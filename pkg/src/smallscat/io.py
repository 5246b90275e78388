"""Writers for the plain-text artifact formats (cloud files, field grids,
far-field tables, convergence reports). All numeric output uses repr-exact
formatting so repeated runs are byte-identical."""

from __future__ import annotations

import json
import os

import numpy as np

from .fields import GridField
from .foldy import FarField
from .placement import ScattererCloud


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_um_csv(path, cloud: ScattererCloud, u):
    cols = ["index"] + ["x", "y", "z"][: cloud.dim] + ["re_u", "im_u"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(cloud.M):
            row = [str(i)] + [_fmt(c) for c in cloud.centers[i]] + [_fmt(u[i].real), _fmt(u[i].imag)]
            fh.write(",".join(row) + "\n")


def write_grid_csv(path, field: GridField):
    pts = field.grid.points()
    dim = pts.shape[1]
    cols = ["x", "y", "z"][:dim] + ["re_u", "im_u"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for p, v in zip(pts, field.values):
            fh.write(",".join([_fmt(c) for c in p] + [_fmt(v.real), _fmt(v.imag)]) + "\n")


def write_grid_raw(path, field: GridField):
    """Raw little-endian complex-double dump plus a JSON sidecar header."""
    field.values.astype("<c16").tofile(path)
    sidecar = {
        "origin": [float(c) for c in field.grid.origin],
        "spacing": float(field.grid.spacing),
        "extents": list(field.grid.extents),
        "dtype": "<c16",
        "order": "C",
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_grid_raw(path) -> GridField:
    from .fields import RegularGrid

    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    grid = RegularGrid(origin=np.array(meta["origin"]), spacing=meta["spacing"], extents=tuple(meta["extents"]))
    values = np.fromfile(path, dtype="<c16")
    return GridField(grid=grid, values=values)


def write_farfield_csv(path, ff: FarField):
    with open(path, "w") as fh:
        fh.write("b1,b2,b3,re_A,im_A\n")
        for d, v in zip(ff.directions, ff.values):
            fh.write(",".join([_fmt(c) for c in d] + [_fmt(v.real), _fmt(v.imag)]) + "\n")


def write_field_csv_1d(path, x, u):
    with open(path, "w") as fh:
        fh.write("x,re_u,im_u\n")
        for xi, ui in zip(x, u):
            fh.write(f"{_fmt(xi)},{_fmt(ui.real)},{_fmt(ui.imag)}\n")


def write_table_csv(path, header, rows):
    """Generic deterministic CSV writer; floats repr-formatted, ints plain."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [str(c) if isinstance(c, (int, np.integer)) else _fmt(float(c)) for c in row]
            fh.write(",".join(cells) + "\n")


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
