"""Static SVG rendering of 2-d fields (quiver over a magnitude heatmap).

Fields in three or four dimensions are rendered through an axis-aligned
slice.  Rendering is headless (Agg) and writes SVG only.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from eikinetic.directions import ConfigurationError
from eikinetic.fields import GridSpec, VectorField


def take_slice(u: VectorField, axis: int, value: float) -> VectorField:
    """Axis-aligned 2-d slice at the node plane nearest to ``value``,
    keeping the two lowest remaining coordinate axes and the matching
    vector components (renormalization is not applied)."""
    if u.dim < 3:
        raise ConfigurationError("slicing needs a field of dimension >= 3")
    if not 0 <= axis < u.dim:
        raise ConfigurationError(f"axis {axis} out of range for dim {u.dim}")
    coords = u.grid.axis_coords(axis)
    k = int(np.argmin(np.abs(coords - value)))
    keep = [d for d in range(u.dim) if d != axis][:2]
    drop = [d for d in range(u.dim) if d not in keep]
    sel = [slice(None)] * u.dim
    for d in drop:
        if d == axis:
            sel[d] = k
        else:
            sel[d] = u.grid.shape[d] // 2
    sel = tuple(sel)
    grid2 = GridSpec(tuple(u.grid.shape[d] for d in keep),
                     tuple(u.grid.spacing[d] for d in keep),
                     tuple(u.grid.origin[d] for d in keep))
    data = u.data[sel][..., keep]
    return VectorField(grid2, data, u.mask[sel], unit=False)


def field_svg(u: VectorField, path, title: str | None = None,
              max_arrows: int = 32) -> None:
    """Quiver plot of a 2-d field over a |u| heatmap, written as SVG."""
    if u.dim != 2:
        raise ConfigurationError("field_svg renders 2-d fields; slice first")
    xs = u.grid.axis_coords(0)
    ys = u.grid.axis_coords(1)
    mag = np.where(u.mask, np.linalg.norm(u.data, axis=-1), np.nan)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    pc = ax.pcolormesh(xs, ys, mag.T, shading="nearest", cmap="viridis")
    fig.colorbar(pc, ax=ax, label="|u|")
    step = max(1, max(u.grid.shape) // max_arrows)
    xq, yq = np.meshgrid(xs[::step], ys[::step], indexing="ij")
    ux = np.where(u.mask, u.data[..., 0], np.nan)[::step, ::step]
    uy = np.where(u.mask, u.data[..., 1], np.nan)[::step, ::step]
    ax.quiver(xq, yq, ux, uy, angles="xy", color="white", width=0.003)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def heatmap_svg(values: np.ndarray, grid: GridSpec, path,
                title: str | None = None, label: str = "value") -> None:
    """Heatmap of node values on a 2-d grid, written as SVG."""
    if grid.dim != 2:
        raise ConfigurationError("heatmap_svg renders 2-d grids")
    xs = grid.axis_coords(0)
    ys = grid.axis_coords(1)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    pc = ax.pcolormesh(xs, ys, np.asarray(values, dtype=float).T,
                       shading="nearest", cmap="magma")
    fig.colorbar(pc, ax=ax, label=label)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
