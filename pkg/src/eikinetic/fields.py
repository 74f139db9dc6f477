"""Sampled fields on tensor-product grids, discrete calculus, bump test functions.

Everything downstream (kinetic residuals, level-set geometry, energies) works
on node-sampled scalar/vector fields over a uniform rectangular grid in
dimension 2, 3 or 4.  Conventions fixed here and relied on everywhere:

* node coordinates are always ``origin[d] + i * spacing[d]`` (bit-exact,
  never accumulated by repeated addition);
* vector data is stored with components on the last axis, row-major in the
  node indices, which is also the on-disk layout;
* derivative stencils are central in the interior and second-order one-sided
  on the boundary, with a mask recording where the full central stencil was
  available;
* weak pairings use compactly supported smooth bumps and plain node-sum
  quadrature (exact trapezoid here, since the bump vanishes near the block
  edges).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


class StencilUnavailableError(ValueError):
    """An axis is too short for the interior/boundary stencil family."""


class OutOfDomainError(ValueError):
    """Point evaluation requested outside the grid box or on invalid cells."""


class KernelUnderresolvedError(ValueError):
    """Mollifier radius too small for the grid spacing."""


class SupportViolationError(ValueError):
    """A test-function support ball leaves the box or touches invalid nodes."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor-product grid in dimension 2..4.

    Node ``i = (i_0, ..., i_{N-1})`` sits at ``origin + i * spacing``.
    Axis lengths must be at least 4 so that both the central and the
    second-order one-sided stencils exist on every axis.
    """

    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    origin: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        if not 2 <= self.dim <= 4:
            raise ValueError(f"dimension must be 2, 3 or 4, got {self.dim}")
        if len(self.spacing) != self.dim or len(self.origin) != self.dim:
            raise ValueError("shape, spacing and origin must have equal length")
        if any(n < 4 for n in self.shape):
            raise StencilUnavailableError(
                f"every axis needs >= 4 nodes, got shape {self.shape}"
            )
        if any(h <= 0 for h in self.spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def max_spacing(self) -> float:
        return max(self.spacing)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_coords(self, d: int) -> np.ndarray:
        return self.origin[d] + np.arange(self.shape[d]) * self.spacing[d]

    def coords(self) -> np.ndarray:
        """All node coordinates, shape ``(*shape, dim)``."""
        axes = np.meshgrid(*(self.axis_coords(d) for d in range(self.dim)),
                           indexing="ij")
        return np.stack(axes, axis=-1)

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.origin, dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return self.lo + (np.asarray(self.shape) - 1) * np.asarray(self.spacing)

    def contains(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.all((p >= self.lo) & (p <= self.hi), axis=-1)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ScalarField:
    """Node-sampled real function; ``values`` has shape ``grid.shape``."""

    grid: GridSpec
    values: np.ndarray
    allow_inf: bool = field(default=False, repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if np.isnan(v).any():
            raise ValueError("scalar field contains NaN")
        if not self.allow_inf and not np.isfinite(v).all():
            raise ValueError("scalar field contains non-finite values")
        object.__setattr__(self, "values", _freeze(v))


@dataclass(frozen=True)
class VectorField:
    """Node-sampled vector field with a validity mask.

    ``data`` has shape ``(*grid.shape, grid.dim)`` (components interleaved
    last, matching the serialization layout).  ``mask`` is True on nodes
    where the samples are meaningful; constructors of singular model fields
    mask out the cores.  If ``unit=True`` the field is declared unit-norm and
    that is enforced to 1e-12 on masked nodes at construction.
    """

    grid: GridSpec
    data: np.ndarray
    mask: np.ndarray
    unit: bool = False

    def __post_init__(self) -> None:
        d = np.asarray(self.data, dtype=float)
        m = np.asarray(self.mask, dtype=bool)
        want = (*self.grid.shape, self.grid.dim)
        if d.shape != want:
            raise ValueError(f"data shape {d.shape} != {want}")
        if m.shape != self.grid.shape:
            raise ValueError(f"mask shape {m.shape} != grid shape {self.grid.shape}")
        if not np.isfinite(d[m]).all():
            raise ValueError("vector field has non-finite values on masked nodes")
        if self.unit and m.any():
            norms = np.linalg.norm(d[m], axis=-1)
            worst = float(np.abs(norms - 1.0).max())
            if worst > 1e-12:
                raise ValueError(
                    f"field declared unit-norm but | |u|-1 | reaches {worst:.3e}"
                )
        object.__setattr__(self, "data", _freeze(d))
        object.__setattr__(self, "mask", _freeze(m))

    def component(self, i: int) -> np.ndarray:
        return self.data[..., i]

    @property
    def dim(self) -> int:
        return self.grid.dim


@dataclass(frozen=True)
class TestFunction:
    """Smooth bump ``exp(-1 / (1 - |x-c|^2/R^2))`` supported in the open
    ball ``B(center, radius)``, with analytic gradient."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError("test-function radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def _s(self, points: np.ndarray) -> np.ndarray:
        d = np.asarray(points, dtype=float) - np.asarray(self.center)
        return np.sum(d * d, axis=-1) / self.radius**2

    def value(self, points: np.ndarray) -> np.ndarray:
        s = self._s(points)
        out = np.zeros_like(s)
        inside = s < 1.0
        with np.errstate(over="ignore", under="ignore"):
            out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
        return out

    def gradient(self, points: np.ndarray) -> np.ndarray:
        """Analytic gradient, zero outside the support ball."""
        pts = np.asarray(points, dtype=float)
        d = pts - np.asarray(self.center)
        s = np.sum(d * d, axis=-1) / self.radius**2
        out = np.zeros_like(d)
        inside = s < 1.0
        si = s[inside]
        with np.errstate(over="ignore", under="ignore"):
            f = np.exp(-1.0 / (1.0 - si))
            coef = -2.0 * f / ((1.0 - si) ** 2 * self.radius**2)
        out[inside] = coef[..., None] * d[inside]
        return out

    def validate_support(self, grid: GridSpec) -> None:
        c = np.asarray(self.center)
        if self.dim != grid.dim:
            raise ValueError("test function / grid dimension mismatch")
        if np.any(c - self.radius <= grid.lo) or np.any(c + self.radius >= grid.hi):
            raise SupportViolationError(
                f"support ball B({self.center}, {self.radius}) not strictly "
                f"inside box [{grid.lo}, {grid.hi}]"
            )

    def support_slices(self, grid: GridSpec) -> tuple[slice, ...]:
        """Index block of nodes that can meet the open support ball."""
        c = np.asarray(self.center)
        lo_i = np.ceil((c - self.radius - grid.lo) / grid.spacing).astype(int)
        hi_i = np.floor((c + self.radius - grid.lo) / grid.spacing).astype(int)
        lo_i = np.clip(lo_i, 0, np.asarray(grid.shape) - 1)
        hi_i = np.clip(hi_i, 0, np.asarray(grid.shape) - 1)
        return tuple(slice(a, b + 1) for a, b in zip(lo_i, hi_i))


def interior_mask(grid: GridSpec) -> np.ndarray:
    m = np.zeros(grid.shape, dtype=bool)
    m[(slice(1, -1),) * grid.dim] = True
    return m


def _neighbors_valid(mask: np.ndarray) -> np.ndarray:
    """True where the node and all 2N axis neighbors are valid."""
    out = mask.copy()
    for ax in range(mask.ndim):
        lo = np.ones_like(mask)
        hi = np.ones_like(mask)
        sl_in = [slice(None)] * mask.ndim
        sl_out = [slice(None)] * mask.ndim
        sl_in[ax] = slice(1, None)
        sl_out[ax] = slice(None, -1)
        lo[tuple(sl_out)] = mask[tuple(sl_in)]
        hi[tuple(sl_in)] = mask[tuple(sl_out)]
        out &= lo & hi
    return out


def gradient(psi: ScalarField) -> VectorField:
    """Discrete gradient of a scalar field.

    Central differences at interior nodes, second-order one-sided stencils at
    boundary nodes (this is exactly ``np.gradient(..., edge_order=2)``).  The
    mask of the result marks the nodes where the full central stencil was
    available, i.e. the interior.
    """
    grid = psi.grid
    parts = np.gradient(psi.values, *grid.spacing, edge_order=2)
    data = np.stack(parts, axis=-1)
    return VectorField(grid, data, interior_mask(grid))


def _component_partials(u: VectorField) -> np.ndarray:
    """d_i u_j as array of shape (*shape, i, j)."""
    grid = u.grid
    out = np.empty((*grid.shape, grid.dim, grid.dim))
    for j in range(grid.dim):
        parts = np.gradient(u.component(j), *grid.spacing, edge_order=2)
        for i in range(grid.dim):
            out[..., i, j] = parts[i]
    return out


@dataclass(frozen=True)
class CurlResidual:
    max_abs: float
    pair_fields: dict
    mask: np.ndarray


def curl_residual(u: VectorField) -> CurlResidual:
    """Max of |d_i u_j - d_j u_i| over pairs i<j at valid interior nodes.

    A node counts as valid when it is interior and the central stencil only
    touches masked-valid nodes.
    """
    grid = u.grid
    partials = _component_partials(u)
    valid = _neighbors_valid(u.mask) & interior_mask(grid)
    pair_fields = {}
    worst = 0.0
    for i in range(grid.dim):
        for j in range(i + 1, grid.dim):
            r = partials[..., i, j] - partials[..., j, i]
            pair_fields[(i, j)] = r
            if valid.any():
                worst = max(worst, float(np.abs(r[valid]).max()))
    return CurlResidual(worst, pair_fields, valid)


def _cells_and_weights(grid: GridSpec, points: np.ndarray):
    """Lower cell corner indices and fractional offsets for multilinear
    interpolation; points exactly on the upper face are clamped into the
    last cell."""
    p = np.asarray(points, dtype=float)
    t = (p - grid.lo) / np.asarray(grid.spacing)
    cell = np.floor(t).astype(int)
    cell = np.clip(cell, 0, np.asarray(grid.shape) - 2)
    frac = t - cell
    return cell, frac


def interpolate_data(grid: GridSpec, data: np.ndarray,
                     mask: np.ndarray | None, points: np.ndarray):
    """Multilinear interpolation of ``data`` (shape ``(*grid.shape, K)``)
    at many points.

    Returns ``(values, ok)`` where ``ok`` is False for points outside the
    box or whose surrounding cell touches an invalid node; values are NaN
    there.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = pts.shape[0]
    ok = grid.contains(pts)
    cell, frac = _cells_and_weights(grid, pts)
    vals = np.zeros((m, data.shape[-1]))
    cell_ok = np.ones(m, dtype=bool)
    for offs in itertools.product((0, 1), repeat=grid.dim):
        idx = tuple((cell[:, d] + offs[d]) for d in range(grid.dim))
        w = np.ones(m)
        for d in range(grid.dim):
            w = w * (frac[:, d] if offs[d] else 1.0 - frac[:, d])
        vals += w[:, None] * data[idx]
        if mask is not None:
            cell_ok &= mask[idx]
    ok &= cell_ok
    vals[~ok] = np.nan
    return vals, ok


def interpolate_many(u: VectorField, points: np.ndarray):
    """Multilinear interpolation of a vector field at many points; see
    ``interpolate_data``."""
    return interpolate_data(u.grid, u.data, u.mask, points)


def interpolate(u: VectorField, p: np.ndarray) -> np.ndarray:
    """Multilinear interpolation at one point; raises when the point is
    outside the box or its cell touches an invalid node."""
    pts = np.asarray(p, dtype=float)[None, :]
    if not grid_contains_point(u.grid, pts[0]):
        raise OutOfDomainError(f"point {p} outside grid box")
    vals, ok = interpolate_many(u, pts)
    if not ok[0]:
        raise OutOfDomainError(f"cell around {p} touches invalid nodes")
    return vals[0]


def grid_contains_point(grid: GridSpec, p: np.ndarray) -> bool:
    return bool(grid.contains(np.asarray(p, dtype=float)))


def _mollifier_kernel(grid: GridSpec, eps: float) -> np.ndarray:
    if eps < 2.0 * grid.max_spacing:
        raise KernelUnderresolvedError(
            f"mollifier radius {eps} under-resolved: need eps >= 2*max(h) = "
            f"{2.0 * grid.max_spacing}"
        )
    radii = [int(np.floor(eps / h)) for h in grid.spacing]
    axes = [np.arange(-r, r + 1) * h for r, h in zip(radii, grid.spacing)]
    mesh = np.meshgrid(*axes, indexing="ij")
    s = sum(a * a for a in mesh) / eps**2
    kern = np.zeros_like(s)
    inside = s < 1.0
    kern[inside] = np.exp(-1.0 / (1.0 - s[inside]))
    return kern / kern.sum()


def mollify(f, eps: float):
    """Convolve with the normalized discrete bump kernel of radius eps.

    Scalar fields are smoothed with replicated-edge padding, so constants
    stay constant and the output range never leaves the input range (the
    kernel is a convex average).  Vector fields are smoothed per component
    and the mask is eroded by the kernel footprint: a node stays valid only
    if every node the kernel touched was valid.
    """
    if isinstance(f, ScalarField):
        kern = _mollifier_kernel(f.grid, eps)
        sm = ndimage.convolve(f.values, kern, mode="nearest")
        return ScalarField(f.grid, sm)
    if isinstance(f, VectorField):
        kern = _mollifier_kernel(f.grid, eps)
        comps = [ndimage.convolve(f.component(i), kern, mode="nearest")
                 for i in range(f.dim)]
        new_mask = ndimage.binary_erosion(f.mask, structure=kern > 0,
                                          border_value=0)
        return VectorField(f.grid, np.stack(comps, axis=-1), new_mask)
    raise TypeError(f"cannot mollify {type(f).__name__}")


def integrate_against(values: np.ndarray, grid: GridSpec, phi: TestFunction,
                      mode: str = "value", v: np.ndarray | None = None,
                      mask: np.ndarray | None = None) -> float:
    """Weak pairing of a node-sampled function against a bump.

    mode "value":          integral of  values(x) * phi(x)  dx
    mode "gradient-dot-v": integral of  values(x) * (v . grad phi)(x)  dx

    Node-sum quadrature with weight h^N on the support block; since phi and
    its gradient vanish at the block edge this coincides with the trapezoid
    rule.  Raises SupportViolationError when the support ball leaves the box
    or touches invalid nodes of ``mask``.
    """
    phi.validate_support(grid)
    vals = np.asarray(values, dtype=float)
    if vals.shape != grid.shape:
        raise ValueError("values shape does not match grid")
    block = phi.support_slices(grid)
    axes = [grid.axis_coords(d)[block[d]] for d in range(grid.dim)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    rel = mesh - np.asarray(phi.center)
    s = np.sum(rel * rel, axis=-1) / phi.radius**2
    inside = s < 1.0
    if mask is not None:
        if not mask[block][inside].all():
            raise SupportViolationError(
                f"support of bump at {phi.center} touches invalid nodes"
            )
    if mode == "value":
        w = phi.value(mesh)
    elif mode == "gradient-dot-v":
        if v is None:
            raise ValueError("mode 'gradient-dot-v' needs a vector v")
        w = phi.gradient(mesh) @ np.asarray(v, dtype=float)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(np.sum(vals[block] * w) * grid.cell_volume)


def halton_points(count: int, dim: int, skip: int = 20) -> np.ndarray:
    """Halton low-discrepancy points in the unit cube (deterministic)."""
    primes = [2, 3, 5, 7][:dim]
    out = np.empty((count, dim))
    for d, base in enumerate(primes):
        for k in range(count):
            n, f, x = k + skip, 1.0, 0.0
            while n > 0:
                f /= base
                x += f * (n % base)
                n //= base
            out[k, d] = x
    return out


def halton_test_functions(grid: GridSpec, count: int, radius: float,
                          mask: np.ndarray | None = None,
                          max_tries: int | None = None,
                          seed: int = 0) -> list[TestFunction]:
    """Deterministic family of bumps with valid supports.

    Centers walk a Halton sequence over the box shrunk by ``radius`` plus one
    spacing; candidates whose support ball touches invalid nodes are skipped.
    ``seed`` offsets the walk, giving disjoint deterministic families.
    Raises SupportViolationError if the quota cannot be met.
    """
    lo = grid.lo + radius + np.asarray(grid.spacing)
    hi = grid.hi - radius - np.asarray(grid.spacing)
    if np.any(lo >= hi):
        raise SupportViolationError(
            f"radius {radius} leaves no room for bump centers in the box"
        )
    if max_tries is None:
        max_tries = 50 * count + 200
    cands = halton_points(max_tries, grid.dim, skip=20 + 101 * seed)
    out: list[TestFunction] = []
    for c01 in cands:
        c = lo + c01 * (hi - lo)
        phi = TestFunction(tuple(c), radius)
        if mask is not None:
            block = phi.support_slices(grid)
            axes = [grid.axis_coords(d)[block[d]] for d in range(grid.dim)]
            mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
            s = np.sum((mesh - c) ** 2, axis=-1) / radius**2
            if not mask[block][s < 1.0].all():
                continue
        out.append(phi)
        if len(out) == count:
            return out
    raise SupportViolationError(
        f"could not place {count} bumps of radius {radius} on valid nodes "
        f"({len(out)} found)"
    )
