"""Line geometry, field classification, curvature, and topological degree.

A unit-norm gradient field is determined by the geometry of its
characteristic lines {x + t u(x)}: for genuinely N-dimensional fields the
lines are pairwise coplanar and either all parallel (constant field) or all
concurrent (point vortex).  This module provides the coplanarity defect,
the family classifier, the field classifier built on top of it, shape
operators / umbilicity reports for level sets of scalar fields, planar
level-curve curvature via circumcircles, and the topological degree of a
field around a suspected singularity (winding number in 2-d, solid-angle
sum in 3-d).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from eikinetic.directions import ConfigurationError, perp_basis
from eikinetic.fields import (GridSpec, ScalarField, VectorField, gradient,
                              interpolate_data)
from eikinetic.kinetic import GeometryError


class InsufficientSamplesError(ValueError):
    """Fewer valid sample nodes than the classifier needs."""


class CriticalPointError(ValueError):
    """|grad psi| fell below the floor where a normal was required."""


class DegenerateContourError(ValueError):
    """|u| dropped below 0.5 somewhere on the degree contour."""


class NoSamplesError(ValueError):
    """The requested level set is empty within the valid region."""


# ---------------------------------------------------------------------------
# lines


@dataclass(frozen=True)
class Line:
    """Oriented line {point + t * direction}; direction must be unit."""

    point: tuple
    direction: tuple

    def __post_init__(self):
        p = tuple(float(c) for c in self.point)
        d = tuple(float(c) for c in self.direction)
        if len(p) != len(d):
            raise ValueError("point and direction dimensions differ")
        nrm = float(np.linalg.norm(d))
        if abs(nrm - 1.0) > 1e-14:
            raise ValueError(f"direction norm {nrm} is not 1 within 1e-14")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "direction", d)

    @classmethod
    def through(cls, point, direction) -> "Line":
        """Line through ``point`` along ``direction`` (normalized here)."""
        d = np.asarray(direction, dtype=float)
        nrm = np.linalg.norm(d)
        if nrm < 1e-12:
            raise ValueError("direction is (numerically) zero")
        return cls(tuple(np.asarray(point, dtype=float)), tuple(d / nrm))

    @property
    def dim(self) -> int:
        return len(self.point)

    def distance_to(self, x) -> float:
        """Euclidean distance from ``x`` to the line."""
        p = np.asarray(self.point)
        d = np.asarray(self.direction)
        r = np.asarray(x, dtype=float) - p
        return float(np.linalg.norm(r - (r @ d) * d))


def coplanar(l1: Line, l2: Line, tol: float = 1e-8):
    """Whether two lines lie in a common plane, with the rank defect.

    The defect is the third singular value of the matrix with rows
    {d1, d2, p2 - p1}; zero exactly when the lines are parallel or
    intersecting.  Coplanar iff defect <= tol * max(1, |p2 - p1|).  In two
    dimensions the matrix has rank <= 2 automatically and the defect is 0.
    """
    d1 = np.asarray(l1.direction)
    d2 = np.asarray(l2.direction)
    dp = np.asarray(l2.point) - np.asarray(l1.point)
    m = np.stack([d1, d2, dp])
    svals = np.linalg.svd(m, compute_uv=False)
    defect = float(svals[2]) if svals.size >= 3 else 0.0
    scale = max(1.0, float(np.linalg.norm(dp)))
    return defect <= tol * scale, defect


@dataclass(frozen=True)
class LineFamilyClass:
    tag: str                      # Planar | Parallel | Concurrent | Incoherent
    point: tuple | None = None    # concurrency point
    residual: float = 0.0         # worst pairwise coplanarity defect
    witness: tuple | None = None  # (i, j, defect) for Incoherent
    fit_residual: float | None = None  # worst distance(point, line)

    def to_json_dict(self) -> dict:
        return {
            "tag": self.tag,
            "point": None if self.point is None else list(self.point),
            "residual": self.residual,
            "witness": None if self.witness is None else list(self.witness),
            "fit_residual": self.fit_residual,
        }


def classify_line_family(lines, tol: float = 1e-6) -> LineFamilyClass:
    """Classify a family of lines as Parallel, Concurrent, Planar, or
    Incoherent.

    Pairwise coplanarity is screened first (any failing pair is returned as
    an Incoherent witness).  All-parallel wins next (pairwise
    |d_i . d_j| >= 1 - tol).  Otherwise the point minimizing the sum of
    squared distances to the lines solves sum(I - d dT) O = sum(I - d dT) p;
    the family is Concurrent when the worst distance(O, line) is at most
    tol.  Families that merely fit one 2-plane are reported Planar and never
    refined further (dimension >= 3 only; in the plane that test is vacuous);
    a near-singular normal matrix falls back to Parallel.
    """
    lines = list(lines)
    if len(lines) < 3:
        raise ConfigurationError("need at least 3 lines to classify")
    n = len(lines)
    dim = lines[0].dim
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            ok, defect = coplanar(lines[i], lines[j], tol)
            worst = max(worst, defect)
            if not ok:
                return LineFamilyClass("Incoherent", residual=worst,
                                       witness=(i, j, defect))
    dirs = np.array([l.direction for l in lines])
    dots = np.abs(dirs @ dirs.T)
    if dots.min() >= 1.0 - tol:
        return LineFamilyClass("Parallel", residual=worst)

    pts = np.array([l.point for l in lines])
    a = np.zeros((dim, dim))
    b = np.zeros(dim)
    for d, p in zip(dirs, pts):
        proj = np.eye(dim) - np.outer(d, d)
        a += proj
        b += proj @ p
    eig = np.linalg.eigvalsh(a)
    if eig[0] <= 1e-12 * max(eig[-1], 1.0):
        return LineFamilyClass("Parallel", residual=worst)
    center = np.linalg.solve(a, b)
    dists = [l.distance_to(center) for l in lines]
    fit = float(max(dists))
    if fit <= tol:
        return LineFamilyClass("Concurrent", point=tuple(center),
                               residual=worst, fit_residual=fit)

    if dim >= 3:
        centered = pts - pts.mean(axis=0)
        scale = max(1.0, float(np.linalg.norm(centered, axis=1).max()))
        m = np.vstack([dirs, centered / scale])
        svals = np.linalg.svd(m, compute_uv=False)
        if float(svals[2]) <= tol:
            return LineFamilyClass("Planar", residual=worst, fit_residual=fit)
    return LineFamilyClass("Incoherent", residual=worst, fit_residual=fit)


def lines_from_csv(path) -> list:
    """Load lines from CSV rows ``p_1,...,p_N,d_1,...,d_N`` (directions are
    normalized on load)."""
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    if arr.shape[1] % 2 != 0:
        raise ValueError(f"need an even column count, got {arr.shape[1]}")
    dim = arr.shape[1] // 2
    if not 2 <= dim <= 4:
        raise ValueError(f"lines must live in dimension 2..4, got {dim}")
    out = []
    for k, row in enumerate(arr):
        try:
            out.append(Line.through(row[:dim], row[dim:]))
        except ValueError as exc:
            raise ValueError(f"row {k + 1}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# field classification


@dataclass(frozen=True)
class FieldClass:
    tag: str                      # Constant | Vortex | Other
    direction: tuple | None = None
    center: tuple | None = None
    sign: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {"tag": self.tag}
        if self.direction is not None:
            out["direction"] = list(self.direction)
        if self.center is not None:
            out["center"] = list(self.center)
        if self.sign is not None:
            out["sign"] = self.sign
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


def classify_field(u: VectorField, sample_count: int = 32, seed: int = 0,
                   tol: float = 1e-6) -> FieldClass:
    """Decide whether a sampled unit-norm field is a constant field, a
    point vortex (either sign), or neither.

    Characteristic lines (node, u(node)) are built at ``sample_count``
    seeded valid nodes and classified: a Parallel family whose sampled
    directions all agree with their mean gives Constant(w); a Concurrent
    family whose samples all point away from (or all toward) the
    concurrency point gives Vortex(center, sign); everything else — planar
    or incoherent families, mixed signs, inconsistent directions — is
    reported as Other with the family diagnostics attached.
    """
    if sample_count < 16:
        raise ConfigurationError("sample_count must be >= 16")
    valid = np.flatnonzero(u.mask)
    if valid.size < 16:
        raise InsufficientSamplesError(
            f"only {valid.size} valid nodes after masking (need >= 16)"
        )
    rng = np.random.default_rng(seed)
    take = min(sample_count, valid.size)
    idx = rng.choice(valid, size=take, replace=False)
    spacing = np.asarray(u.grid.spacing)
    pts = np.stack(np.unravel_index(idx, u.grid.shape), axis=1) * spacing
    pts = pts + np.asarray(u.grid.lo)
    dirs = u.data.reshape(-1, u.dim)[idx]
    lines = [Line.through(p, d) for p, d in zip(pts, dirs)]
    fam = classify_line_family(lines, tol)
    diag = {"family": fam.to_json_dict(), "samples": take, "seed": seed}

    if fam.tag == "Parallel":
        w = dirs.mean(axis=0)
        w = w / np.linalg.norm(w)
        if (dirs @ w > 0.0).all():
            return FieldClass("Constant", direction=tuple(w),
                              diagnostics=diag)
        return FieldClass("Other", diagnostics={**diag,
                                                "reason": "mixed-direction"})
    if fam.tag == "Concurrent":
        center = np.asarray(fam.point)
        signs = np.sign(np.einsum("nd,nd->n", dirs, pts - center))
        if (signs > 0).all():
            return FieldClass("Vortex", center=fam.point, sign=1,
                              diagnostics=diag)
        if (signs < 0).all():
            return FieldClass("Vortex", center=fam.point, sign=-1,
                              diagnostics=diag)
        diag["reason"] = "mixed-sign"
        diag["sign_counts"] = {"plus": int((signs > 0).sum()),
                               "minus": int((signs < 0).sum()),
                               "zero": int((signs == 0).sum())}
        return FieldClass("Other", diagnostics=diag)
    diag["reason"] = fam.tag.lower()
    return FieldClass("Other", diagnostics=diag)


# ---------------------------------------------------------------------------
# shape operator / umbilicity


@dataclass(frozen=True)
class ShapePrep:
    """Normalized gradient field of a scalar and its node-wise Jacobian,
    ready for interpolation at arbitrary points."""

    grid: GridSpec
    raw_grad: np.ndarray
    normals: np.ndarray
    jac: np.ndarray             # (*shape, N, N); jac[..., i, j] = d_i n_j
    normal_mask: np.ndarray
    jac_mask: np.ndarray
    floor: float


def _prepare_shape(psi: ScalarField, floor: float) -> ShapePrep:
    from eikinetic.fields import _neighbors_valid, interior_mask

    grid = psi.grid
    g = gradient(psi)
    norms = np.linalg.norm(g.data, axis=-1)
    finite = np.isfinite(norms)
    ok = g.mask & finite & (norms >= floor)
    safe = np.where(ok, norms, 1.0)
    normals = np.where(ok[..., None], g.data / safe[..., None], 0.0)
    jac = np.empty(grid.shape + (grid.dim, grid.dim))
    for j in range(grid.dim):
        parts = np.gradient(normals[..., j], *grid.spacing, edge_order=2)
        if grid.dim == 1:
            parts = [parts]
        for i in range(grid.dim):
            jac[..., i, j] = parts[i]
    jac_mask = _neighbors_valid(ok) & interior_mask(grid)
    return ShapePrep(grid, g.data, normals, jac, ok, jac_mask, floor)


@dataclass(frozen=True)
class ShapeOperatorResult:
    point: tuple
    normal: tuple
    tangent_basis: np.ndarray       # (N-1, N) rows
    matrix: np.ndarray              # (N-1, N-1), symmetric
    eigenvalues: np.ndarray         # ascending
    lam: float                      # mean principal curvature estimate
    deviation: float                # ||S - lam Id|| (operator norm)
    asymmetry: float                # raw antisymmetric part, diagnostic

    def to_json_dict(self) -> dict:
        return {
            "point": list(self.point), "normal": list(self.normal),
            "eigenvalues": self.eigenvalues.tolist(), "lam": self.lam,
            "deviation": self.deviation, "asymmetry": self.asymmetry,
        }


def _shape_at(prep: ShapePrep, x) -> ShapeOperatorResult:
    x = np.asarray(x, dtype=float)[None, :]
    dim = prep.grid.dim
    graw, ok = interpolate_data(prep.grid, prep.raw_grad, prep.normal_mask, x)
    if not ok[0] or np.linalg.norm(graw[0]) < prep.floor:
        raise CriticalPointError(
            f"|grad psi| below floor {prep.floor} at {tuple(x[0])}"
        )
    jflat = prep.jac.reshape(prep.grid.shape + (dim * dim,))
    jv, jok = interpolate_data(prep.grid, jflat, prep.jac_mask, x)
    nv, nok = interpolate_data(prep.grid, prep.normals, prep.normal_mask, x)
    if not (jok[0] and nok[0]):
        raise CriticalPointError(
            f"normal field not resolved around {tuple(x[0])}"
        )
    n = nv[0] / np.linalg.norm(nv[0])
    jac = jv[0].reshape(dim, dim)
    proj = np.eye(dim) - np.outer(n, n)
    amb = proj @ jac.T @ proj           # column-action: t -> grad_t n
    basis = perp_basis(n)
    s = basis @ amb @ basis.T
    asym = float(np.abs(s - s.T).max())
    s = 0.5 * (s + s.T)
    eig = np.linalg.eigvalsh(s)
    lam = float(eig.mean())
    dev = float(np.abs(eig - lam).max())
    return ShapeOperatorResult(tuple(x[0]), tuple(n), basis, s, eig, lam,
                               dev, asym)


def shape_operator(psi: ScalarField, x, floor: float = 1e-6
                   ) -> ShapeOperatorResult:
    """Shape operator of the level set of psi through x, in an orthonormal
    basis of the tangent space.

    The normal is the normalized gradient n = grad psi / |grad psi|; the
    operator is the tangential projection P (grad n) P of the central -
    difference Jacobian of n, symmetrized (the raw antisymmetric part is
    returned as a diagnostic).  Sign convention: the sphere |x - P| = r with
    outward normal has eigenvalues +1/r.
    """
    prep = _prepare_shape(psi, floor)
    return _shape_at(prep, x)


def level_points_on_grid_lines(psi: ScalarField, alpha: float, count: int,
                               seed: int, max_tries: int | None = None
                               ) -> np.ndarray:
    """Points on {psi = alpha} found by linear root bracketing along
    randomly chosen grid lines."""
    grid = psi.grid
    rng = np.random.default_rng(seed)
    if max_tries is None:
        max_tries = 400 * count
    spacing = np.asarray(grid.spacing)
    lo = np.asarray(grid.lo)
    pts = []
    for _ in range(max_tries):
        if len(pts) >= count:
            break
        ax = int(rng.integers(grid.dim))
        idx = [int(rng.integers(s)) for s in grid.shape]
        sel = tuple(slice(None) if d == ax else idx[d]
                    for d in range(grid.dim))
        vals = psi.values[sel] - alpha
        finite = np.isfinite(vals)
        cross = finite[:-1] & finite[1:] & (vals[:-1] * vals[1:] < 0)
        hits = np.flatnonzero(cross)
        if hits.size == 0:
            continue
        k = int(hits[rng.integers(hits.size)])
        t = vals[k] / (vals[k] - vals[k + 1])
        node = np.array(idx, dtype=float)
        node[ax] = k + t
        pts.append(lo + node * spacing)
    if not pts:
        raise NoSamplesError(
            f"level {{psi = {alpha}}} not found along sampled grid lines"
        )
    return np.asarray(pts)


@dataclass(frozen=True)
class UmbilicSample:
    point: tuple
    lam: float
    deviation: float
    eigenvalues: tuple

    def to_json_dict(self) -> dict:
        return {"point": list(self.point), "lam": self.lam,
                "deviation": self.deviation,
                "eigenvalues": list(self.eigenvalues)}


@dataclass(frozen=True)
class UmbilicReport:
    alpha: float
    tol: float
    samples: tuple
    umbilical: bool
    max_deviation: float
    spherical: bool
    center_estimate: tuple | None
    center_spread: float | None
    centers: np.ndarray | None

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha, "tol": self.tol,
            "samples": [s.to_json_dict() for s in self.samples],
            "umbilical": self.umbilical,
            "max_deviation": self.max_deviation,
            "spherical": self.spherical,
            "center_estimate": (None if self.center_estimate is None
                                else list(self.center_estimate)),
            "center_spread": self.center_spread,
        }


def umbilic_check(psi: ScalarField, alpha: float, sample_count: int = 24,
                  tol: float = 0.05, seed: int = 0,
                  lambda_floor: float = 0.05) -> UmbilicReport:
    """Sample the level set {psi = alpha} and test whether its shape
    operator is a multiple of the identity everywhere (totally umbilical).

    Points come from root bracketing along random grid lines; the verdict
    is umbilical iff every sample's deviation ||S - lam Id|| stays within
    ``tol``.  When the common eigenvalue is bounded away from zero the
    level set should be a sphere piece, and the report adds per-sample
    center estimates x - n/lam together with their spread; lam ~ 0 is the
    hyperplane branch and produces no centers.
    """
    if psi.grid.dim < 3:
        raise ConfigurationError("umbilic check needs dimension >= 3; use "
                                 "level_curvature_2d for planar fields")
    prep = _prepare_shape(psi, 1e-6)
    raw_pts = level_points_on_grid_lines(psi, alpha, 4 * sample_count, seed)
    samples = []
    centers = []
    for p in raw_pts:
        if len(samples) >= sample_count:
            break
        try:
            res = _shape_at(prep, p)
        except CriticalPointError:
            continue
        samples.append(UmbilicSample(tuple(p), res.lam, res.deviation,
                                     tuple(res.eigenvalues)))
        if abs(res.lam) >= lambda_floor:
            centers.append(np.asarray(p) - np.asarray(res.normal) / res.lam)
    if not samples:
        raise NoSamplesError(
            f"no shape-operator sample survived on {{psi = {alpha}}}"
        )
    max_dev = max(s.deviation for s in samples)
    umb = max_dev <= tol
    spherical = umb and len(centers) == len(samples)
    if spherical:
        c = np.asarray(centers)
        mean = c.mean(axis=0)
        spread = float(np.linalg.norm(c - mean, axis=1).max())
        return UmbilicReport(alpha, tol, tuple(samples), umb, max_dev, True,
                             tuple(mean), spread, c)
    return UmbilicReport(alpha, tol, tuple(samples), umb, max_dev, False,
                         None, None, None)


# ---------------------------------------------------------------------------
# 2-d level-curve curvature


@dataclass(frozen=True)
class CurvatureReport:
    alpha: float
    chord: float
    points: np.ndarray
    curvatures: np.ndarray

    @property
    def spread(self) -> float:
        return float(self.curvatures.max() - self.curvatures.min())

    def to_json_dict(self) -> dict:
        return {"alpha": self.alpha, "chord": self.chord,
                "points": self.points.tolist(),
                "curvatures": self.curvatures.tolist(),
                "spread": self.spread}


def menger_curvature(a, b, c) -> float:
    """Curvature of the circumcircle of a planar triple: 4 area / (product
    of side lengths)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    p, q = b - a, c - a
    area2 = abs(float(p[0] * q[1] - p[1] * q[0]))
    la, lb, lc = (np.linalg.norm(b - a), np.linalg.norm(c - b),
                  np.linalg.norm(a - c))
    if min(la, lb, lc) == 0.0:
        raise ValueError("degenerate triple")
    return 2.0 * area2 / (la * lb * lc)


def level_curvature_2d(psi: ScalarField, alpha: float, sample_count: int = 24,
                       arc: float | None = None, step: float | None = None,
                       seed: int = 0, region=None) -> CurvatureReport:
    """Curvature estimates along the planar level curve {psi = alpha}.

    From each sampled level point the curve is traced tangentially in both
    directions (predictor step + Newton re-projection along the gradient)
    over an arc of half-width ``arc``; a least-squares circle through the
    traced points gives the local curvature.  Curvature spread across
    samples distinguishes circles (constant) from generic offset curves.
    ``region`` optionally filters base points (callable on an (n, 2) array
    returning a boolean mask), e.g. to select one branch of an unsigned
    distance level set.
    """
    grid = psi.grid
    if grid.dim != 2:
        raise ConfigurationError("level_curvature_2d needs a 2-d field")
    if step is None:
        step = 2.0 * grid.max_spacing
    if arc is None:
        arc = 12.0 * grid.max_spacing
    n_steps = max(3, int(np.ceil(arc / step)))
    g = gradient(psi)
    vals3 = psi.values[..., None]

    def normal_at(p: np.ndarray) -> np.ndarray:
        gv, ok = interpolate_data(grid, g.data, g.mask, p[None, :])
        if not ok[0]:
            raise GeometryError("left the resolved region")
        return gv[0] / np.linalg.norm(gv[0])

    def project(p: np.ndarray) -> np.ndarray:
        out = p.copy()
        for _ in range(3):
            f, okf = interpolate_data(grid, vals3, g.mask, out[None, :])
            gv, okg = interpolate_data(grid, g.data, g.mask, out[None, :])
            if not (okf[0] and okg[0]):
                raise GeometryError("left the resolved region")
            gn2 = float(gv[0] @ gv[0])
            out = out - ((f[0, 0] - alpha) / gn2) * gv[0]
        return out

    def trace(p0: np.ndarray) -> np.ndarray:
        pts = [p0]
        for direction in (1.0, -1.0):
            p = p0.copy()
            for _ in range(n_steps):
                n = normal_at(p)
                tau = direction * np.array([-n[1], n[0]])
                p = project(p + step * tau)
                pts.append(p)
        return np.asarray(pts)

    def circle_fit(pts: np.ndarray) -> float:
        a = np.column_stack([2.0 * pts, np.ones(len(pts))])
        b = np.einsum("nd,nd->n", pts, pts)
        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
        r2 = sol[2] + sol[0] ** 2 + sol[1] ** 2
        if r2 <= 0:
            raise GeometryError("degenerate circle fit")
        return 1.0 / float(np.sqrt(r2))

    raw = level_points_on_grid_lines(psi, alpha, 8 * sample_count, seed)
    if region is not None:
        raw = raw[np.asarray(region(raw), dtype=bool)]
    pts, curv = [], []
    for p in raw:
        if len(pts) >= sample_count:
            break
        try:
            base = project(np.asarray(p, dtype=float))
            arc_pts = trace(base)
            curv.append(circle_fit(arc_pts))
            pts.append(base)
        except (GeometryError, ValueError):
            continue
    if not pts:
        raise NoSamplesError(
            f"no curvature sample survived on {{psi = {alpha}}}"
        )
    return CurvatureReport(alpha, float(arc), np.asarray(pts),
                           np.asarray(curv))


# ---------------------------------------------------------------------------
# topological degree


@dataclass(frozen=True)
class DegreeResult:
    degree: int
    raw: float
    defect: float
    method: str
    samples: int

    def to_json_dict(self) -> dict:
        return {"degree": self.degree, "raw": self.raw,
                "defect": self.defect, "method": self.method,
                "samples": self.samples}


def _icosphere(subdiv: int = 3):
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = list(verts)
    cache: dict = {}

    def midpoint(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            m = verts[i] + verts[j]
            verts.append(m / np.linalg.norm(m))
            cache[key] = len(verts) - 1
        return cache[key]

    for _ in range(subdiv):
        new = []
        for (i, j, k) in faces:
            a, b, c = midpoint(i, j), midpoint(j, k), midpoint(k, i)
            new += [(i, a, c), (j, b, a), (k, c, b), (a, b, c)]
        faces = new
    v = np.asarray(verts)
    f = np.asarray(faces, dtype=int)
    # enforce outward orientation face by face
    tri = v[f]
    nrm = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    cen = tri.mean(axis=1)
    flip = np.einsum("fd,fd->f", nrm, cen) < 0
    f[flip] = f[flip][:, [0, 2, 1]]
    return v, f


def jacobian_degree(u: VectorField, center, radius: float) -> DegreeResult:
    """Topological degree of u around ``center`` on a sphere of ``radius``.

    2-d: winding number from lifted angle increments along a sampled
    circle.  3-d: degree of the normalized field restricted to a subdivided
    icosahedral sphere, as the solid-angle sum of its image triangles over
    4 pi.  Both report the pre-rounding distance to the nearest integer.
    """
    center = np.asarray(center, dtype=float)
    if u.dim == 2:
        m = 720
        th = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
        pts = center + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        vals, ok = interpolate_data(u.grid, u.data, u.mask, pts)
        if not ok.all():
            raise GeometryError("degree contour touches invalid cells")
        norms = np.linalg.norm(vals, axis=1)
        if (norms < 0.5).any():
            raise DegenerateContourError(
                f"|u| dipped to {norms.min():.3f} on the contour"
            )
        ang = np.arctan2(vals[:, 1], vals[:, 0])
        inc = np.angle(np.exp(1j * (np.roll(ang, -1) - ang)))
        raw = float(inc.sum() / (2.0 * np.pi))
        deg = int(np.rint(raw))
        return DegreeResult(deg, raw, abs(raw - deg), "winding", m)
    if u.dim == 3:
        verts, faces = _icosphere(3)
        pts = center + radius * verts
        vals, ok = interpolate_data(u.grid, u.data, u.mask, pts)
        if not ok.all():
            raise GeometryError("degree sphere touches invalid cells")
        norms = np.linalg.norm(vals, axis=1)
        if (norms < 0.5).any():
            raise DegenerateContourError(
                f"|u| dipped to {norms.min():.3f} on the sphere"
            )
        w = vals / norms[:, None]
        a, b, c = w[faces[:, 0]], w[faces[:, 1]], w[faces[:, 2]]
        num = np.einsum("fd,fd->f", a, np.cross(b, c))
        den = (1.0 + np.einsum("fd,fd->f", a, b)
               + np.einsum("fd,fd->f", b, c)
               + np.einsum("fd,fd->f", c, a))
        omega = 2.0 * np.arctan2(num, den)
        raw = float(omega.sum() / (4.0 * np.pi))
        deg = int(np.rint(raw))
        return DegreeResult(deg, raw, abs(raw - deg), "solid-angle",
                            len(faces))
    raise ConfigurationError(
        "degree is implemented for dimensions 2 and 3 only"
    )
