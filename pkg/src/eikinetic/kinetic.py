"""Transport residuals and structure checks for unit-norm fields.

The central object is the half-space indicator ("weak characteristic")

    chi(x, xi) = 1  if u(x) . xi > 0,   0 otherwise (ties to 0),

sampled per node.  A unit-norm gradient field has the property that chi is
constant along every direction v orthogonal to xi, distributionally:
< v . grad_x chi(., xi), phi > = 0 for smooth compactly supported phi.  This
module measures those pairings (full-sphere, 2-d, and equatorial-only
variants), reconstructs u from sphere averages of chi, checks the ordering
property along segments, extracts traces on lines, computes entropy-style
residuals with smoothed angular profiles, and performs the reduction of an
axis-independent N-dim field to its (N-1)-dim profile.

Residual verdicts use measured tolerances: 3x the worst entry observed on
known-good fields (constant and point vortex) under the same grid,
directions, and test functions; see ``eikinetic.calibration``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from eikinetic.directions import (ConfigurationError, DirectionSet,
                                  perp_basis, spanning_tangents,
                                  unit_ball_volume)
from eikinetic.fields import (GridSpec, ScalarField, SupportViolationError,
                              TestFunction, VectorField, interpolate_many,
                              interior_mask)


class GeometryError(ValueError):
    """Requested tube/segment geometry does not fit the valid region."""


class NearPoleError(ValueError):
    """|u'| fell below the floor where the reduction needs u' != 0."""


@dataclass(frozen=True)
class ChiField:
    """Node-sampled indicator of {u . xi > 0} (ties map to 0)."""

    grid: GridSpec
    xi: np.ndarray
    values: np.ndarray
    mask: np.ndarray


def chi(u: VectorField, xi: np.ndarray) -> ChiField:
    xi = np.asarray(xi, dtype=float)
    vals = (u.data @ xi > 0.0).astype(np.uint8)
    return ChiField(u.grid, xi, vals, u.mask)


# ---------------------------------------------------------------------------
# residual reports


@dataclass(frozen=True)
class ResidualEntry:
    xi_index: int
    v_index: int
    phi_index: int
    xi: tuple
    v: tuple
    phi_center: tuple
    phi_radius: float
    value: float

    def to_json_dict(self) -> dict:
        return {
            "xi_index": self.xi_index, "v_index": self.v_index,
            "phi_index": self.phi_index, "xi": list(self.xi),
            "v": list(self.v), "phi_center": list(self.phi_center),
            "phi_radius": self.phi_radius, "value": self.value,
        }


@dataclass(frozen=True)
class ResidualReport:
    kind: str
    entries: tuple
    max_abs: float
    calibration: float
    verdict: str
    params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "max_abs": self.max_abs,
            "calibration": self.calibration,
            "verdict": self.verdict,
            "params": self.params,
            "entries": [e.to_json_dict() for e in self.entries],
        }


def _verdict(max_abs: float, tol: float) -> str:
    if max_abs <= tol:
        return "pass"
    if max_abs > 10.0 * tol:
        return "fail"
    return "indeterminate"


def _worker_count() -> int:
    raw = os.environ.get("EIKINETIC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _phi_blocks(u: VectorField, phis: list[TestFunction]):
    """Precompute, for each bump, the flat support samples: field values on
    the support, the analytic bump gradient there, and validity."""
    grid = u.grid
    blocks = []
    for phi in phis:
        phi.validate_support(grid)
        sl = phi.support_slices(grid)
        axes = [grid.axis_coords(d)[sl[d]] for d in range(grid.dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        rel = mesh - np.asarray(phi.center)
        inside = np.sum(rel * rel, axis=-1) / phi.radius**2 < 1.0
        if not u.mask[sl][inside].all():
            raise SupportViolationError(
                f"support of bump at {phi.center} touches invalid nodes"
            )
        gphi = phi.gradient(mesh[inside])
        ublock = np.ascontiguousarray(u.data[sl][inside])
        blocks.append((ublock, gphi))
    return blocks


def residual_values(u: VectorField, xis: np.ndarray, tangents: np.ndarray,
                    phis: list[TestFunction]) -> np.ndarray:
    """Raw residual entries R[i,t,j] = -integral chi(x, xi_i) (v_t . grad
    phi_j) dx for every direction, tangent, and bump.

    This is the batched equivalent of looping ``integrate_against`` over the
    (xi, v, phi) grid (cross-checked in the test suite); worker threads split
    the direction axis when EIKINETIC_THREADS > 1, without affecting entry
    order or the per-entry summation order.
    """
    blocks = _phi_blocks(u, phis)
    vol = u.grid.cell_volume
    nxi, ntan = tangents.shape[0], tangents.shape[1]
    out = np.empty((nxi, ntan, len(phis)))

    def fill(i0: int, i1: int) -> None:
        for i in range(i0, i1):
            xi = xis[i]
            for j, (ublock, gphi) in enumerate(blocks):
                ch = (ublock @ xi > 0.0).astype(float)
                for t in range(ntan):
                    w = gphi @ tangents[i, t]
                    out[i, t, j] = -float(np.sum(ch * w)) * vol

    workers = min(_worker_count(), nxi)
    if workers <= 1:
        fill(0, nxi)
    else:
        bounds = np.linspace(0, nxi, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda k: fill(bounds[k], bounds[k + 1]),
                          range(workers)))
    return out


def _assemble_report(kind: str, xis, tangents, phis, vals, tolerance,
                     params) -> ResidualReport:
    entries = []
    for i in range(vals.shape[0]):
        for t in range(vals.shape[1]):
            for j in range(vals.shape[2]):
                entries.append(ResidualEntry(
                    i, t, j, tuple(xis[i]), tuple(tangents[i, t]),
                    phis[j].center, phis[j].radius, float(vals[i, t, j])))
    max_abs = float(np.abs(vals).max()) if vals.size else 0.0
    params = dict(params)
    params.setdefault("tolerance", tolerance)
    return ResidualReport(kind, tuple(entries), max_abs, tolerance,
                          _verdict(max_abs, tolerance), params)


def kinetic_residual(u: VectorField, ds: DirectionSet, tangents_per_xi: int,
                     phis: list[TestFunction], tolerance: float | None = None,
                     extra_xis: np.ndarray | None = None,
                     _kind: str = "full") -> ResidualReport:
    """Transport residuals of the half-space indicators over a direction set.

    For each direction xi (the quadrature nodes of ``ds`` plus any pinned
    ``extra_xis``), tangents v run over a deterministic spanning set of
    xi-perp of size ``tangents_per_xi`` (orthonormal basis first, normalized
    pair sums after).  Entry (xi, v, phi) holds
    ``-integral chi(x, xi) (v . grad phi)(x) dx``.

    When ``tolerance`` is None it is measured on the spot: 3x the worst
    entry produced by a constant field and point vortices on the same grid
    with the same directions and bumps.
    """
    if ds.dim != u.dim:
        raise ConfigurationError("direction set dimension != field dimension")
    if tangents_per_xi < u.dim - 1:
        raise ConfigurationError(
            f"tangents_per_xi must be >= {u.dim - 1} to span xi-perp"
        )
    xis = ds.nodes
    if extra_xis is not None:
        extra = np.atleast_2d(np.asarray(extra_xis, dtype=float))
        extra = extra / np.linalg.norm(extra, axis=1)[:, None]
        xis = np.vstack([xis, extra])
    tangents = np.stack([spanning_tangents(xi, tangents_per_xi) for xi in xis])
    vals = residual_values(u, xis, tangents, phis)
    if tolerance is None:
        from eikinetic.calibration import residual_tolerance
        tolerance = residual_tolerance(
            u.grid, lambda ref: _max_abs_residual(ref, xis, tangents, phis))
    params = {
        "dim": u.dim, "grid_shape": list(u.grid.shape),
        "grid_spacing": list(u.grid.spacing), "scheme": ds.scheme,
        "ds_count": ds.count, "ds_seed": ds.seed,
        "extra_xi_count": 0 if extra_xis is None else int(len(xis) - ds.count),
        "tangents_per_xi": tangents_per_xi,
        "phi_count": len(phis),
        "phi_radii": sorted({p.radius for p in phis}),
    }
    return _assemble_report(_kind, xis, tangents, phis, vals, tolerance, params)


def _max_abs_residual(ref: VectorField, xis, tangents,
                      phis: list[TestFunction]) -> float | None:
    """Worst |entry| of a reference field, skipping bumps whose support
    leaves the reference's own valid region; None when nothing is usable."""
    usable = []
    for phi in phis:
        sl = phi.support_slices(ref.grid)
        axes = [ref.grid.axis_coords(d)[sl[d]] for d in range(ref.grid.dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        rel = mesh - np.asarray(phi.center)
        inside = np.sum(rel * rel, axis=-1) / phi.radius**2 < 1.0
        if ref.mask[sl][inside].all():
            usable.append(phi)
    if not usable:
        return None
    vals = residual_values(ref, xis, tangents, usable)
    return float(np.abs(vals).max())


def kinetic_residual_2d(u: VectorField, ds: DirectionSet,
                        phis: list[TestFunction],
                        tolerance: float | None = None) -> ResidualReport:
    """Planar case: single tangent v = xi-perp = (-xi_2, xi_1) per direction.

    Delegates to ``kinetic_residual`` with ``tangents_per_xi=1``, whose N=2
    tangent basis is exactly that rotation, so the two produce bit-identical
    entries.
    """
    if u.dim != 2:
        raise ConfigurationError("kinetic_residual_2d needs a 2-d field")
    rep = kinetic_residual(u, ds, 1, phis, tolerance, _kind="2d")
    return rep


def embed_equator(ds: DirectionSet) -> np.ndarray:
    """Nodes of an S^{N-2} direction set embedded into R^N with last
    coordinate zero."""
    return np.hstack([ds.nodes, np.zeros((ds.count, 1))])


def weak_kinetic_residual(u: VectorField, equator_ds: DirectionSet,
                          phis: list[TestFunction],
                          tolerance: float | None = None) -> ResidualReport:
    """Kinetic residual restricted to equatorial directions (last coordinate
    of xi equal to zero).

    ``equator_ds`` is a direction set one dimension down (on S^{N-2}); its
    nodes are embedded with xi_N = 0.  Tangents still span the full
    (N-1)-dimensional xi-perp inside R^N.
    """
    if u.dim < 3:
        raise ConfigurationError("weak formulation needs dimension >= 3")
    if equator_ds.dim != u.dim - 1:
        raise ConfigurationError(
            f"equator set must have dimension {u.dim - 1}, "
            f"got {equator_ds.dim}"
        )
    xis = embed_equator(equator_ds)
    tangents = np.stack([spanning_tangents(xi, u.dim - 1) for xi in xis])
    vals = residual_values(u, xis, tangents, phis)
    if tolerance is None:
        from eikinetic.calibration import residual_tolerance
        tolerance = residual_tolerance(
            u.grid, lambda ref: _max_abs_residual(ref, xis, tangents, phis))
    params = {
        "dim": u.dim, "grid_shape": list(u.grid.shape),
        "grid_spacing": list(u.grid.spacing),
        "scheme": equator_ds.scheme, "ds_count": equator_ds.count,
        "ds_seed": equator_ds.seed, "tangents_per_xi": u.dim - 1,
        "phi_count": len(phis),
        "phi_radii": sorted({p.radius for p in phis}),
        "equatorial": True,
    }
    return _assemble_report("weak", xis, tangents, phis, vals, tolerance,
                            params)


# ---------------------------------------------------------------------------
# averaging reconstruction


@dataclass(frozen=True)
class AveragingResult:
    field: VectorField
    max_error: float


def averaging_reconstruct(u: VectorField, ds: DirectionSet,
                          chunk: int = 4096) -> AveragingResult:
    """Reconstruct u from sphere averages of its half-space indicators:

        u_hat(x) = (1 / V_{N-1}) * sum_xi w_xi xi chi(x, xi),

    V_{N-1} the volume of the unit ball one dimension down (so the factor is
    1/2 for N=2, 1/pi normalization ... encoded by unit_ball_volume).  Runs
    in node chunks with a float32 indicator matrix; reports max |u_hat - u|
    over masked nodes.
    """
    grid = u.grid
    flat = u.data.reshape(-1, grid.dim)
    nodes_t = np.ascontiguousarray(ds.nodes.T)
    wxi = (ds.weights[:, None] * ds.nodes).astype(np.float32)
    out = np.empty_like(flat)
    for a in range(0, flat.shape[0], chunk):
        b = min(a + chunk, flat.shape[0])
        ind = (flat[a:b] @ nodes_t > 0.0).astype(np.float32)
        out[a:b] = (ind @ wxi).astype(np.float64)
    out /= unit_ball_volume(grid.dim - 1)
    rec = VectorField(grid, out.reshape(u.data.shape), u.mask)
    err = np.linalg.norm(out.reshape(u.data.shape) - u.data, axis=-1)
    max_error = float(err[u.mask].max()) if u.mask.any() else 0.0
    return AveragingResult(rec, max_error)


# ---------------------------------------------------------------------------
# ordering along segments


@dataclass(frozen=True)
class OrderingReport:
    pair_count: int
    xi_per_pair: int
    delta: float
    seed: int
    violations: int
    worst_margin: float
    witnesses: tuple

    def to_json_dict(self) -> dict:
        return {
            "pair_count": self.pair_count, "xi_per_pair": self.xi_per_pair,
            "delta": self.delta, "seed": self.seed,
            "violations": self.violations, "worst_margin": self.worst_margin,
            "witnesses": [list(map(list, w)) for w in self.witnesses],
        }


def _segment_cells_valid(u: VectorField, y: np.ndarray, z: np.ndarray,
                         probes: int = 17) -> np.ndarray:
    """True per pair when every probe point along [y, z] lies in a fully
    valid interpolation cell."""
    m = y.shape[0]
    ts = np.linspace(0.0, 1.0, probes)
    pts = y[:, None, :] + ts[None, :, None] * (z - y)[:, None, :]
    _, ok = interpolate_many(u, pts.reshape(-1, u.dim))
    return ok.reshape(m, probes).all(axis=1)


def ordering_check(u: VectorField, pair_count: int, xi_per_pair: int,
                   delta: float, seed: int) -> OrderingReport:
    """Sample node pairs (y, z) with [y, z] inside the valid region and
    random unit xi orthogonal to z - y; flag every event where u(y) . xi and
    u(z) . xi sit on strictly opposite sides of the (-delta, delta) band.

    For unit-norm gradient fields the two dot products never have strictly
    opposite signs, so the violation count should be 0; the rotational
    counterexample produces violations.  ``worst_margin`` is the largest
    min(|a|, |b|) over sign-opposite events (negative margins mean no
    sign-opposite pair was seen at all).
    """
    rng = np.random.default_rng(seed)
    grid = u.grid
    valid_flat = np.flatnonzero(u.mask)
    if valid_flat.size < 2:
        raise GeometryError("fewer than two valid nodes")
    spacing = np.asarray(grid.spacing)

    pairs_y = np.empty((pair_count, grid.dim))
    pairs_z = np.empty((pair_count, grid.dim))
    uy = np.empty((pair_count, grid.dim))
    uz = np.empty((pair_count, grid.dim))
    got = 0
    attempts = 0
    flat_data = u.data.reshape(-1, grid.dim)
    while got < pair_count:
        attempts += 1
        if attempts > 200:
            raise GeometryError(
                f"could not sample {pair_count} in-domain pairs "
                f"({got} found)"
            )
        need = pair_count - got
        ia = rng.choice(valid_flat, size=2 * need)
        ib = rng.choice(valid_flat, size=2 * need)
        keep = ia != ib                      # degenerate pair y = z skipped
        ia, ib = ia[keep], ib[keep]
        ya = np.stack(np.unravel_index(ia, grid.shape), axis=1) * spacing + grid.lo
        yb = np.stack(np.unravel_index(ib, grid.shape), axis=1) * spacing + grid.lo
        ok = _segment_cells_valid(u, ya, yb)
        ia, ib, ya, yb = ia[ok], ib[ok], ya[ok], yb[ok]
        take = min(need, ia.size)
        sl = slice(got, got + take)
        pairs_y[sl], pairs_z[sl] = ya[:take], yb[:take]
        uy[sl], uz[sl] = flat_data[ia[:take]], flat_data[ib[:take]]
        got += take

    d = pairs_z - pairs_y
    d /= np.linalg.norm(d, axis=1)[:, None]
    xi = rng.standard_normal((pair_count, xi_per_pair, grid.dim))
    xi -= (np.einsum("pkd,pd->pk", xi, d))[:, :, None] * d[:, None, :]
    norms = np.linalg.norm(xi, axis=2)
    for _ in range(10):
        bad = norms < 1e-8
        if not bad.any():
            break
        xi[bad] = rng.standard_normal((int(bad.sum()), grid.dim))
        xi[bad] -= (np.einsum("kd,kd->k", xi[bad],
                              np.repeat(d, xi_per_pair, 0)[bad.reshape(-1)])
                    )[:, None] * np.repeat(d, xi_per_pair, 0)[bad.reshape(-1)]
        norms = np.linalg.norm(xi, axis=2)
    xi /= norms[:, :, None]

    a = np.einsum("pd,pkd->pk", uy, xi)
    b = np.einsum("pd,pkd->pk", uz, xi)
    viol = ((a > delta) & (b < -delta)) | ((a < -delta) & (b > delta))
    margins = np.maximum(np.minimum(a, -b), np.minimum(-a, b))
    worst = float(margins.max()) if margins.size else float("-inf")
    wit = []
    if viol.any():
        pi, ki = np.nonzero(viol)
        for p, k in list(zip(pi, ki))[:10]:
            wit.append((tuple(pairs_y[p]), tuple(pairs_z[p]), tuple(xi[p, k])))
    return OrderingReport(pair_count, xi_per_pair, delta, seed,
                          int(viol.sum()), worst, tuple(wit))


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TraceField:
    a: np.ndarray
    b: np.ndarray
    ts: np.ndarray
    values: np.ndarray          # normalized where reliable, NaN elsewhere
    raw: np.ndarray             # (len(ts), len(radii), dim) cube averages
    radii: tuple
    reliable: np.ndarray
    cauchy: np.ndarray
    trace_tol: float

    def to_json_dict(self) -> dict:
        return {
            "a": self.a.tolist(), "b": self.b.tolist(),
            "ts": self.ts.tolist(),
            "values": np.where(np.isfinite(self.values), self.values,
                               None).tolist(),
            "radii": list(self.radii),
            "reliable": self.reliable.tolist(),
            "cauchy": self.cauchy.tolist(),
            "trace_tol": self.trace_tol,
        }


def trace_on_segment(u: VectorField, a, b, radii, n_samples: int = 33,
                     trace_tol: float = 0.05) -> TraceField:
    """Cross-sectional cube averages of u along the segment [a, b].

    The frame is rotated so the segment runs along the last axis; at each of
    ``n_samples`` stations the field is averaged over the cube (-r, r)^{N-1}
    transverse to the segment, for each r in the decreasing ``radii``
    schedule.  The limit surrogate is the average at the smallest radius;
    the Cauchy increment between the two smallest radii is reported as the
    convergence diagnostic.  Samples whose averaged norm strays from 1 by
    more than ``trace_tol`` (or whose cube met invalid cells) are marked
    unreliable; the rest are normalized.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    radii = tuple(float(r) for r in radii)
    if len(radii) < 2 or any(r2 >= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValueError("radii must be a strictly decreasing list, len >= 2")
    seg = b - a
    length = np.linalg.norm(seg)
    if length == 0:
        raise GeometryError("segment endpoints coincide")
    e = seg / length
    basis = perp_basis(e)                      # rows span the cross-section
    ts = np.linspace(0.0, 1.0, n_samples)
    centers = a[None, :] + ts[:, None] * seg[None, :]
    hmin = min(u.grid.spacing)
    raw = np.empty((n_samples, len(radii), u.dim))
    for ri, r in enumerate(radii):
        q = max(3, int(np.ceil(2.0 * r / hmin)))
        q = min(q, 9)
        side = (np.arange(q) + 0.5) / q * 2.0 * r - r
        mesh = np.stack(np.meshgrid(*([side] * (u.dim - 1)), indexing="ij"),
                        axis=-1).reshape(-1, u.dim - 1)
        offsets = mesh @ basis
        pts = (centers[:, None, :] + offsets[None, :, :]).reshape(-1, u.dim)
        if not u.grid.contains(pts).all():
            raise GeometryError(
                f"tube of radius {r} around the segment exits the grid box"
            )
        vals, ok = interpolate_many(u, pts)
        vals = vals.reshape(n_samples, -1, u.dim)
        ok = ok.reshape(n_samples, -1)
        avg = vals.mean(axis=1)
        avg[~ok.all(axis=1)] = np.nan
        raw[:, ri, :] = avg
    est = raw[:, -1, :]
    cauchy = np.linalg.norm(raw[:, -1, :] - raw[:, -2, :], axis=1)
    norms = np.linalg.norm(est, axis=1)
    reliable = np.isfinite(norms) & (np.abs(norms - 1.0) <= trace_tol)
    values = np.full_like(est, np.nan)
    values[reliable] = est[reliable] / norms[reliable, None]
    return TraceField(a, b, ts, values, raw, radii, reliable, cauchy,
                      trace_tol)


@dataclass(frozen=True)
class Characteristic:
    points: np.ndarray
    chord_deviation: float

    def __len__(self) -> int:
        return self.points.shape[0]


def characteristic_trace(u: VectorField, x0, step: float,
                         max_len: float) -> Characteristic:
    """Explicit Euler integration of dx/dt = u(x) from x0 with a fixed
    step, stopping at domain exit.  For unit-norm gradient fields the
    integral curve is a straight line; the report carries the maximum
    distance of the polyline vertices from the chord through its endpoints.
    An immediately invalid start yields an empty polyline.
    """
    x = np.asarray(x0, dtype=float)
    pts = []
    n_steps = max(0, int(np.floor(max_len / step)))
    for _ in range(n_steps + 1):
        vals, ok = interpolate_many(u, x[None, :])
        if not ok[0]:
            break
        pts.append(x.copy())
        x = x + step * vals[0]
    if not pts:
        return Characteristic(np.zeros((0, u.dim)), 0.0)
    arr = np.asarray(pts)
    if arr.shape[0] < 3:
        return Characteristic(arr, 0.0)
    chord = arr[-1] - arr[0]
    cl = np.linalg.norm(chord)
    if cl == 0:
        dev = float(np.linalg.norm(arr - arr[0], axis=1).max())
        return Characteristic(arr, dev)
    e = chord / cl
    rel = arr - arr[0]
    perp = rel - (rel @ e)[:, None] * e[None, :]
    return Characteristic(arr, float(np.linalg.norm(perp, axis=1).max()))


# ---------------------------------------------------------------------------
# entropy residuals (2-d)


def _angular_profiles(theta0: float, ks, grid_size: int = 4096):
    """Sharp and mollified angular profiles of the truncated-cosine entropy.

    The sharp profile is f(t) = cos(t - theta0) on |t - theta0| < pi/2 and 0
    outside, with derivative -sin on the same window; mollified versions
    convolve both with a periodic bump kernel of radius 1/k.
    """
    from scipy import ndimage

    thetas = np.linspace(0.0, 2.0 * np.pi, grid_size, endpoint=False)
    d = np.angle(np.exp(1j * (thetas - theta0)))
    window = np.abs(d) < np.pi / 2
    f = np.where(window, np.cos(d), 0.0)
    fp = np.where(window, -np.sin(d), 0.0)
    dtheta = 2.0 * np.pi / grid_size
    smooth = {}
    for k in ks:
        rad = 1.0 / k
        m = int(np.ceil(rad / dtheta))
        if m < 2:
            raise ConfigurationError(
                f"smoothing scale 1/{k} under-resolved on the angular grid"
            )
        offs = np.arange(-m, m + 1) * dtheta
        s = (offs / rad) ** 2
        ker = np.zeros_like(offs)
        ker[s < 1] = np.exp(-1.0 / (1.0 - s[s < 1]))
        ker /= ker.sum()
        smooth[k] = (ndimage.convolve1d(f, ker, mode="wrap"),
                     ndimage.convolve1d(fp, ker, mode="wrap"))
    return thetas, f, fp, smooth


@dataclass(frozen=True)
class EntropyReport:
    xi: tuple
    ks: tuple
    sharp: np.ndarray          # (n_phi,)
    smoothed: np.ndarray       # (n_k, n_phi)
    max_abs: float
    calibration: float
    verdict: str
    convergence: np.ndarray    # max_j |smoothed[k] - sharp|, per k
    params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "xi": list(self.xi), "ks": list(self.ks),
            "sharp": self.sharp.tolist(),
            "smoothed": self.smoothed.tolist(),
            "max_abs": self.max_abs, "calibration": self.calibration,
            "verdict": self.verdict,
            "convergence": self.convergence.tolist(),
            "params": self.params,
        }


def _entropy_values(u: VectorField, xi: np.ndarray, phis, ks):
    """Sharp and smoothed weak-divergence residuals of the entropy flux."""
    grid = u.grid
    theta0 = float(np.arctan2(xi[1], xi[0]))
    thetas, _f, _fp, smooth = _angular_profiles(theta0, ks)
    theta_u = np.arctan2(u.data[..., 1], u.data[..., 0]) % (2.0 * np.pi)
    xi_perp = np.array([-xi[1], xi[0]])

    blocks = _phi_blocks(u, phis)
    vol = grid.cell_volume
    sharp = np.empty(len(phis))
    smoothed = np.empty((len(ks), len(phis)))
    period = 2.0 * np.pi
    sl_all = [phi.support_slices(grid) for phi in phis]
    for j, (phi, (ublock, gphi)) in enumerate(zip(phis, blocks)):
        ch = (ublock @ xi > 0.0).astype(float)
        sharp[j] = -float(np.sum(ch * (gphi @ xi_perp))) * vol
        slj = sl_all[j]
        axes = [grid.axis_coords(d)[slj[d]] for d in range(grid.dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        rel = mesh - np.asarray(phi.center)
        inside = np.sum(rel * rel, axis=-1) / phi.radius**2 < 1.0
        th = theta_u[slj][inside]
        for ki, k in enumerate(ks):
            fk, fpk = smooth[k]
            fv = np.interp(th, thetas, fk, period=period)
            fpv = np.interp(th, thetas, fpk, period=period)
            flux = (-fpv[:, None] * ublock
                    + fv[:, None] * np.stack([-ublock[:, 1], ublock[:, 0]],
                                             axis=1))
            smoothed[ki, j] = -float(np.sum(flux * gphi)) * vol
    return sharp, smoothed


def entropy_residual_2d(u: VectorField, xi, phis: list[TestFunction],
                        smoothing_k, tolerance: float | None = None
                        ) -> EntropyReport:
    """Weak divergence of the truncated-cosine entropy flux and its
    mollified versions, paired against test bumps.

    The sharp flux equals xi-perp times the half-space indicator, so the
    sharp residuals coincide with the 2-d kinetic entries for the same xi;
    the smoothed versions replace the angular cutoff by a profile mollified
    at scale 1/k and should approach the sharp values as k grows.
    """
    if u.dim != 2:
        raise ConfigurationError("entropy residual is 2-d only")
    xi = np.asarray(xi, dtype=float)
    xi = xi / np.linalg.norm(xi)
    ks = tuple(int(k) for k in smoothing_k)
    sharp, smoothed = _entropy_values(u, xi, phis, ks)
    if tolerance is None:
        from eikinetic.calibration import residual_tolerance

        def measure(ref: VectorField) -> float | None:
            usable = [p for p in phis if _support_ok(ref, p)]
            if not usable:
                return None
            s, sm = _entropy_values(ref, xi, usable, ks)
            return float(max(np.abs(s).max(), np.abs(sm).max()))

        tolerance = residual_tolerance(u.grid, measure)
    max_abs = float(max(np.abs(sharp).max(), np.abs(smoothed).max()))
    conv = np.abs(smoothed - sharp[None, :]).max(axis=1)
    params = {
        "grid_shape": list(u.grid.shape),
        "grid_spacing": list(u.grid.spacing),
        "phi_count": len(phis),
        "phi_radii": sorted({p.radius for p in phis}),
    }
    return EntropyReport(tuple(xi), ks, sharp, smoothed, max_abs,
                         tolerance, _verdict(max_abs, tolerance), conv,
                         params)


def _support_ok(u: VectorField, phi: TestFunction) -> bool:
    try:
        phi.validate_support(u.grid)
    except SupportViolationError:
        return False
    sl = phi.support_slices(u.grid)
    axes = [u.grid.axis_coords(d)[sl[d]] for d in range(u.grid.dim)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    rel = mesh - np.asarray(phi.center)
    inside = np.sum(rel * rel, axis=-1) / phi.radius**2 < 1.0
    return bool(u.mask[sl][inside].all())


# ---------------------------------------------------------------------------
# axis symmetry and dimensional reduction


@dataclass(frozen=True)
class CurlSymmetryReport:
    max_abs: float
    per_k: dict
    mask: np.ndarray


def curl_symmetry_check(u: VectorField) -> CurlSymmetryReport:
    """Max of |d_k u_N - d_N u_k| over k < N at valid interior nodes — the
    curl components that must vanish when the last component plays the role
    of an axis coordinate."""
    if u.dim < 3:
        raise ConfigurationError("axis-symmetry check needs dimension >= 3")
    from eikinetic.fields import _component_partials, _neighbors_valid

    grid = u.grid
    partials = _component_partials(u)
    valid = _neighbors_valid(u.mask) & interior_mask(grid)
    last = grid.dim - 1
    per_k = {}
    worst = 0.0
    for k in range(last):
        r = partials[..., k, last] - partials[..., last, k]
        per_k[k] = r
        if valid.any():
            worst = max(worst, float(np.abs(r[valid]).max()))
    return CurlSymmetryReport(worst, per_k, valid)


@dataclass(frozen=True)
class DimensionalReduction:
    field: VectorField
    slice_deviation: float
    degenerate_nodes: int


def dimensional_reduce(u: VectorField, floor: float = 1e-6
                       ) -> DimensionalReduction:
    """Collapse the last axis: normalize the first N-1 components per node,
    average over the last coordinate, renormalize.

    For fields whose half-space indicators do not depend on the last
    coordinate, the per-slice normalized profiles agree and the reported
    ``slice_deviation`` (max over nodes and slices of |v - mean|) is small.
    A reduced node is valid only when every slice above it was valid; nodes
    whose slice average nearly cancels are dropped and counted.
    """
    if u.dim < 3:
        raise ConfigurationError("reduction needs dimension >= 3")
    grid = u.grid
    nred = grid.dim - 1
    uprime = u.data[..., :nred]
    norms = np.linalg.norm(uprime, axis=-1)
    bad = u.mask & (norms < floor)
    if bad.any():
        idx = np.argwhere(bad)
        raise NearPoleError(
            f"|u'| < {floor} at {int(bad.sum())} masked nodes "
            f"(first: {tuple(idx[0])})"
        )
    safe = np.where(norms > 0, norms, 1.0)
    v = uprime / safe[..., None]
    axis = grid.dim - 1
    red_mask = u.mask.all(axis=axis)
    vbar = v.mean(axis=axis)
    vbar_norm = np.linalg.norm(vbar, axis=-1)
    ok = red_mask & (vbar_norm >= floor)
    degenerate = int((red_mask & ~ok).sum())
    out = np.zeros_like(vbar)
    out[ok] = vbar[ok] / vbar_norm[ok][..., None]
    dev = 0.0
    if red_mask.any():
        diff = np.linalg.norm(v - np.expand_dims(vbar, axis), axis=-1)
        valid_cols = np.broadcast_to(np.expand_dims(red_mask, axis),
                                     diff.shape) & u.mask
        if valid_cols.any():
            dev = float(diff[valid_cols].max())
    grid_red = GridSpec(grid.shape[:axis], grid.spacing[:axis],
                        grid.origin[:axis])
    red = VectorField(grid_red, out, ok, unit=False)
    return DimensionalReduction(red, dev, degenerate)


@dataclass(frozen=True)
class StreamFormReport:
    label: str
    max_std_axial: float          # within-cell std of u_N
    max_std_profile: float        # within-cell std of |u'|
    max_misalignment: float       # max |u' - (u'.g)g|, g the alpha-direction
    deviation: float              # max of the three
    cells: int
    bin_width: float

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "max_std_axial": self.max_std_axial,
            "max_std_profile": self.max_std_profile,
            "max_misalignment": self.max_misalignment,
            "deviation": self.deviation,
            "cells": self.cells, "bin_width": self.bin_width,
        }


def stream_form_check(u: VectorField, label, bin_width: float | None = None
                      ) -> StreamFormReport:
    """Check the two-variable stream structure u = grad psi(alpha, x_N).

    ``label`` is a field classification of the reduced profile: Constant(w')
    sets alpha = w' . x', Vortex(P') sets alpha = |x' - P'|.  Masked nodes
    are binned into (alpha, x_N) cells of one grid-spacing width; within
    each cell the axial component u_N and the profile magnitude |u'| must be
    constant, and u' must align with the alpha-direction (the misalignment
    term is what rules out fields that genuinely depend on the angle of x'
    while keeping |u'| constant).
    """
    from eikinetic.geometry import FieldClass

    if not isinstance(label, FieldClass) or label.tag not in ("Constant",
                                                              "Vortex"):
        raise ValueError(
            "stream-form check needs a Constant or Vortex labeling of the "
            "reduced profile"
        )
    grid = u.grid
    if bin_width is None:
        bin_width = grid.max_spacing
    coords = grid.coords()
    xprime = coords[..., :-1]
    xn = coords[..., -1]
    uprime = u.data[..., :-1]
    un = u.data[..., -1]
    if label.tag == "Vortex":
        rel = xprime - np.asarray(label.center)
        alpha = np.linalg.norm(rel, axis=-1)
        safe = np.where(alpha > 0, alpha, 1.0)
        gdir = rel / safe[..., None]
    else:
        w = np.asarray(label.direction)
        alpha = xprime @ w
        gdir = np.broadcast_to(w, uprime.shape)

    m = u.mask
    a = alpha[m]
    b = xn[m]
    s_axial = un[m]
    s_profile = np.linalg.norm(uprime[m], axis=-1)
    radial = np.einsum("nd,nd->n", uprime[m], gdir[m])
    misalign = np.sqrt(np.maximum(s_profile**2 - radial**2, 0.0))

    ia = np.floor((a - a.min()) / bin_width).astype(np.int64)
    ib = np.floor((b - b.min()) / bin_width).astype(np.int64)
    cell = ia * (ib.max() + 1) + ib
    _, cell = np.unique(cell, return_inverse=True)
    ncells = int(cell.max()) + 1

    def max_std(x: np.ndarray) -> float:
        cnt = np.bincount(cell, minlength=ncells).astype(float)
        s1 = np.bincount(cell, weights=x, minlength=ncells)
        s2 = np.bincount(cell, weights=x * x, minlength=ncells)
        var = np.maximum(s2 / cnt - (s1 / cnt) ** 2, 0.0)
        return float(np.sqrt(var.max()))

    msa = max_std(s_axial)
    msp = max_std(s_profile)
    mis = float(misalign.max()) if misalign.size else 0.0
    return StreamFormReport(label.tag, msa, msp, mis, max(msa, msp, mis),
                            ncells, float(bin_width))
