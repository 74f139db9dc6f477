"""Model fields with known structure, plus eikonal solvers to make more.

The closed-form generators (vortex, constant, rotational, vortex-line) are
sampled exactly at the nodes, so they are unit-norm to machine precision and
their singular cores are masked out at radius 3*max(spacing).  The discrete
generators build distance functions: first-order upwind fast marching from
point seeds or a curve, and an exact (bisection) signed distance to an
ellipsoid for curvature ground truth.
"""

from __future__ import annotations

import heapq
from math import sqrt

import numpy as np

from eikinetic.fields import GridSpec, ScalarField, VectorField

CORE_RADIUS_FACTOR = 3.0


def gen_vortex(grid: GridSpec, center, sign: int = +1) -> VectorField:
    """u(x) = sign * (x - center) / |x - center| with the core masked out."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    c = np.asarray(center, dtype=float)
    rel = grid.coords() - c
    r = np.linalg.norm(rel, axis=-1)
    mask = r >= CORE_RADIUS_FACTOR * grid.max_spacing
    safe = np.where(r > 0, r, 1.0)
    data = sign * rel / safe[..., None]
    return VectorField(grid, data, mask, unit=True)


def gen_constant(grid: GridSpec, w) -> VectorField:
    """Constant unit field; w is normalized."""
    w = np.asarray(w, dtype=float)
    nw = np.linalg.norm(w)
    if nw == 0:
        raise ValueError("direction w must be nonzero")
    w = w / nw
    data = np.broadcast_to(w, (*grid.shape, grid.dim)).copy()
    return VectorField(grid, data, np.ones(grid.shape, dtype=bool), unit=True)


def gen_rotational_2d(grid: GridSpec, center) -> VectorField:
    """u(x) = (x - center)-perp / |x - center|: unit norm, divergence-like
    symmetric structure, but not a gradient (the classical non-example)."""
    if grid.dim != 2:
        raise ValueError("rotational generator is 2-d only")
    c = np.asarray(center, dtype=float)
    rel = grid.coords() - c
    r = np.linalg.norm(rel, axis=-1)
    mask = r >= CORE_RADIUS_FACTOR * grid.max_spacing
    safe = np.where(r > 0, r, 1.0)
    data = np.stack([-rel[..., 1], rel[..., 0]], axis=-1) / safe[..., None]
    return VectorField(grid, data, mask, unit=True)


def gen_vortex_line(grid: GridSpec, axis_point) -> VectorField:
    """u(x', x_N) = ((x' - a') / |x' - a'|, 0): the vortex-line prototype.

    The axis is the line {x' = a'} parallel to the last coordinate; a tube
    of radius 3*max(spacing) around it is masked out.  In a box that does
    not meet the axis the mask is all-true and the field is smooth.
    """
    a = np.asarray(axis_point, dtype=float)[: grid.dim - 1]
    x = grid.coords()
    rel = x[..., :-1] - a
    r = np.linalg.norm(rel, axis=-1)
    mask = r >= CORE_RADIUS_FACTOR * grid.max_spacing
    safe = np.where(r > 0, r, 1.0)
    data = np.concatenate([rel / safe[..., None],
                           np.zeros((*grid.shape, 1))], axis=-1)
    return VectorField(grid, data, mask, unit=True)


# ---------------------------------------------------------------------------
# fast marching


def _godunov_solve(avals, hs):
    """Solve sum_d max((T - a_d)/h_d, 0)^2 = 1 for T given upwind values
    sorted ascending; terms enter smallest-first while they stay active."""
    p = q = r = 0.0
    t = avals[0] + hs[0]
    for k in range(len(avals)):
        a = avals[k]
        if k > 0 and a >= t:
            break
        w = 1.0 / (hs[k] * hs[k])
        p += w
        q += w * a
        r += w * a * a
        disc = q * q - p * (r - 1.0)
        if disc < 0.0:
            break
        t = (q + sqrt(disc)) / p
    return t


def _march(grid: GridSpec, values: np.ndarray,
           allowed: np.ndarray | None) -> np.ndarray:
    """Upwind marching from the finite entries of flat ``values`` (frozen
    seeds); heap ties break on the flat index, which is lexicographic for
    row-major grids, so acceptance order is reproducible."""
    shape = grid.shape
    ndim = grid.dim
    n = grid.n_nodes
    spacing = grid.spacing
    strides = [int(np.prod(shape[d + 1:])) for d in range(ndim)]
    axis_index = [((np.arange(n) // strides[d]) % shape[d]).astype(np.int64)
                  for d in range(ndim)]
    ok = np.ones(n, dtype=bool) if allowed is None else allowed
    accepted = np.zeros(n, dtype=bool)
    heap = [(float(values[i]), int(i))
            for i in np.flatnonzero(np.isfinite(values) & ok)]
    heapq.heapify(heap)
    avals_buf = [0.0] * ndim
    hs_buf = [0.0] * ndim
    while heap:
        t, idx = heapq.heappop(heap)
        if accepted[idx] or t > values[idx]:
            continue
        accepted[idx] = True
        for d in range(ndim):
            id_d = axis_index[d][idx]
            for step in (-1, 1):
                j = id_d + step
                if j < 0 or j >= shape[d]:
                    continue
                nb = idx + step * strides[d]
                if accepted[nb] or not ok[nb]:
                    continue
                m = 0
                for e in range(ndim):
                    ie = axis_index[e][nb]
                    best = np.inf
                    if ie > 0:
                        k = nb - strides[e]
                        if accepted[k] and values[k] < best:
                            best = values[k]
                    if ie < shape[e] - 1:
                        k = nb + strides[e]
                        if accepted[k] and values[k] < best:
                            best = values[k]
                    if np.isfinite(best):
                        avals_buf[m] = best
                        hs_buf[m] = spacing[e]
                        m += 1
                order = sorted(range(m), key=lambda i: avals_buf[i])
                newt = _godunov_solve([avals_buf[i] for i in order],
                                      [hs_buf[i] for i in order])
                if newt < values[nb]:
                    values[nb] = newt
                    heapq.heappush(heap, (newt, int(nb)))
    return values


def fast_marching(grid: GridSpec, seeds, mask: np.ndarray | None = None
                  ) -> ScalarField:
    """First-order upwind solution of |grad psi| = 1 growing from seeds.

    seeds : (k, N) array of points, or a ScalarField whose zero level set is
        the initial front.  Point seeds are rasterized to their nearest node
        (within h/2) and frozen at the exact node-to-seed distance; zero-set
        seeding freezes every node where the sign flips across an axis edge,
        at the first-order estimate |phi| / |grad phi|.
    mask : optional boolean array restricting propagation.  Unreachable
        nodes are left at +inf and the returned field carries them as inf.

    Godunov update with a binary heap; ties broken by lexicographic node
    index, so the output does not depend on seed ordering.
    """
    shape = grid.shape
    n = grid.n_nodes
    allowed = None if mask is None else \
        np.asarray(mask, dtype=bool).reshape(n).copy()
    values = np.full(n, np.inf)

    if isinstance(seeds, ScalarField):
        phi = seeds.values
        if phi.shape != shape:
            raise ValueError("seed field shape mismatch")
        gparts = np.gradient(phi, *grid.spacing, edge_order=2)
        gnorm = np.sqrt(sum(g * g for g in gparts))
        frozen = np.zeros(shape, dtype=bool)
        for d in range(grid.dim):
            sl_a = [slice(None)] * grid.dim
            sl_b = [slice(None)] * grid.dim
            sl_a[d] = slice(None, -1)
            sl_b[d] = slice(1, None)
            flip = phi[tuple(sl_a)] * phi[tuple(sl_b)] <= 0.0
            frozen[tuple(sl_a)] |= flip
            frozen[tuple(sl_b)] |= flip
        est = (np.abs(phi) / np.maximum(gnorm, 1e-30)).reshape(n)
        sel = frozen.reshape(n)
        if allowed is not None:
            sel = sel & allowed
        if not sel.any():
            raise ValueError("seed field has no zero crossing")
        values[sel] = est[sel]
    else:
        pts = np.atleast_2d(np.asarray(seeds, dtype=float))
        if pts.shape[1] != grid.dim:
            raise ValueError("seed points must match grid dimension")
        if not grid.contains(pts).all():
            raise ValueError("seed point outside the grid box")
        for p in pts:
            idx_multi = np.rint((p - grid.lo) / np.asarray(grid.spacing))
            idx_multi = np.clip(idx_multi.astype(int), 0,
                                np.asarray(shape) - 1)
            node = grid.lo + idx_multi * np.asarray(grid.spacing)
            flat = int(np.ravel_multi_index(tuple(idx_multi), shape))
            if allowed is not None and not allowed[flat]:
                raise ValueError("seed rasterizes onto a masked node")
            d0 = float(np.linalg.norm(node - p))
            if d0 < values[flat]:
                values[flat] = d0

    values = _march(grid, values, allowed)
    out = values.reshape(shape)
    return ScalarField(grid, out, allow_inf=not np.isfinite(out).all())


def polyline_distance(points: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Exact euclidean distance from each point to a polyline."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    poly = np.asarray(polyline, dtype=float)
    if poly.ndim != 2 or poly.shape[0] < 2:
        raise ValueError("polyline needs at least two vertices")
    best = np.full(pts.shape[0], np.inf)
    for a, b in zip(poly[:-1], poly[1:]):
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0.0:
            d = np.linalg.norm(pts - a, axis=1)
        else:
            t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
            proj = a + t[:, None] * ab
            d = np.linalg.norm(pts - proj, axis=1)
        np.minimum(best, d, out=best)
    return best


def gen_distance_field_2d(grid: GridSpec, curve: np.ndarray) -> ScalarField:
    """Unsigned distance to a polyline via fast marching.

    The curve is sampled at spacing <= h/2, each sample is rasterized to its
    nearest node, and those seed nodes are frozen at their exact distance to
    the polyline before marching outward.
    """
    if grid.dim != 2:
        raise ValueError("curve distance generator is 2-d only")
    poly = np.asarray(curve, dtype=float)
    h = min(grid.spacing)
    dense = [poly[0]]
    for a, b in zip(poly[:-1], poly[1:]):
        seg = float(np.linalg.norm(b - a))
        k = max(1, int(np.ceil(seg / (0.5 * h))))
        for t in np.linspace(0.0, 1.0, k + 1)[1:]:
            dense.append(a + t * (b - a))
    dense = np.asarray(dense)
    inside = grid.contains(dense)
    if not inside.any():
        raise ValueError("curve does not meet the grid box")
    dense = dense[inside]

    idx_multi = np.rint((dense - grid.lo) / np.asarray(grid.spacing)).astype(int)
    idx_multi = np.clip(idx_multi, 0, np.asarray(grid.shape) - 1)
    flat = np.unique(np.ravel_multi_index(tuple(idx_multi.T), grid.shape))
    multi = np.stack(np.unravel_index(flat, grid.shape), axis=1)
    nodes = grid.lo + multi * np.asarray(grid.spacing)

    values = np.full(grid.n_nodes, np.inf)
    values[flat] = polyline_distance(nodes, poly)
    values = _march(grid, values, None)
    return ScalarField(grid, values.reshape(grid.shape))


def gen_ellipsoid_distance(grid: GridSpec, semi_axes) -> ScalarField:
    """Signed distance to the ellipsoid sum_i x_i^2/a_i^2 = 1 (negative
    inside), by vectorized bisection on the closest-point multiplier.

    The closest point of x with multiplier t is y_i = a_i^2 x_i / (t+a_i^2),
    t the root of sum_i (a_i x_i / (t+a_i^2))^2 = 1.  This is exact away from
    the interior medial region (where the nearest point of an on-axis node
    is not axis-aligned); level sets near the surface are unaffected.
    """
    a = np.asarray(semi_axes, dtype=float)
    if a.shape != (grid.dim,) or np.any(a <= 0):
        raise ValueError("semi_axes must be positive, one per dimension")
    x = grid.coords().reshape(-1, grid.dim)
    ax = np.abs(x)
    a2 = a * a

    def f(t):
        return np.sum((a[None, :] * ax / (t[:, None] + a2[None, :])) ** 2,
                      axis=1) - 1.0

    lo = np.full(x.shape[0], -a2.min() + 1e-12)
    hi = np.full(x.shape[0], a2.max() + np.linalg.norm(x, axis=1) * a.max() + 1.0)
    for _ in range(60):           # push hi out until f(hi) < 0 everywhere
        bad = f(hi) > 0
        if not bad.any():
            break
        hi[bad] *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        pos = f(mid) > 0
        lo[pos] = mid[pos]
        hi[~pos] = mid[~pos]
    t = 0.5 * (lo + hi)
    y = a2[None, :] * ax / (t[:, None] + a2[None, :])
    dist = np.linalg.norm(y - ax, axis=1)
    inside = np.sum((x / a[None, :]) ** 2, axis=1) < 1.0
    dist[inside] *= -1.0
    return ScalarField(grid, dist.reshape(grid.shape))
