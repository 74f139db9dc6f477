"""Quadrature direction sets on the unit sphere S^{N-1}, N = 2..4.

Schemes
-------
uniform-angle : N=2 only; equispaced angles 2*pi*k/count, weights 2*pi/count.
fibonacci     : N=3 only; golden-ratio lattice, weights 4*pi/count.
monte-carlo   : any N; seeded normalized Gaussians, weights area/count.

A direction set serializes to a JSON object
``{"dim", "count", "scheme", "seed", "nodes", "weights"}`` with nodes as a
list of length-N lists; ``from_json_dict`` round-trips it bit-exactly.

The half-sphere moment helpers below discretize the two sphere integrals the
averaging/curl identities rest on: the first moment of a half sphere is
V_{N-1} * n (volume of the unit ball one dimension down), and the second
moment of an equatorial half sphere in the hyperplane n-perp is
H^{N-2}(S^{N-2}) / (2(N-1)) times the identity on that hyperplane.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np


class ConfigurationError(ValueError):
    """Invalid scheme/dimension/seed combination."""


SCHEMES = ("uniform-angle", "fibonacci", "monte-carlo")


def sphere_area(dim: int) -> float:
    """Surface measure H^{dim-1}(S^{dim-1}) of the unit sphere in R^dim."""
    return 2.0 * pi ** (dim / 2.0) / gamma(dim / 2.0)


def unit_ball_volume(k: int) -> float:
    """Volume of the unit ball in R^k (V_1 = 2, V_2 = pi, V_3 = 4 pi / 3)."""
    return pi ** (k / 2.0) / gamma(k / 2.0 + 1.0)


@dataclass(frozen=True)
class DirectionSet:
    """Quadrature nodes on S^{dim-1} with positive weights.

    Weights sum to the full surface measure by construction; node norms are
    enforced to 1e-14 at construction time.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    seed: int | None = None

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != self.dim:
            raise ValueError(f"nodes must be (count, {self.dim})")
        if weights.shape != (nodes.shape[0],):
            raise ValueError("weights length must match node count")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        norms = np.linalg.norm(nodes, axis=1)
        if np.abs(norms - 1.0).max() > 1e-14:
            raise ValueError("direction nodes must be unit vectors")
        total = weights.sum()
        if abs(total - sphere_area(self.dim)) > 1e-3 * sphere_area(self.dim):
            raise ValueError(
                f"weights sum {total} != surface measure {sphere_area(self.dim)}"
            )
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def count(self) -> int:
        return self.nodes.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "count": self.count,
            "scheme": self.scheme,
            "seed": self.seed,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "DirectionSet":
        return DirectionSet(int(d["dim"]), np.asarray(d["nodes"], dtype=float),
                            np.asarray(d["weights"], dtype=float),
                            str(d["scheme"]), d.get("seed"))


def build_directions(dim: int, count: int, scheme: str,
                     seed: int | None = None) -> DirectionSet:
    """Build a quadrature set on S^{dim-1}; see module docstring for schemes."""
    if count < 1:
        raise ConfigurationError("count must be positive")
    if scheme == "uniform-angle":
        if dim != 2:
            raise ConfigurationError("uniform-angle scheme is 2-d only")
        ang = 2.0 * pi * np.arange(count) / count
        nodes = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        weights = np.full(count, 2.0 * pi / count)
    elif scheme == "fibonacci":
        if dim != 3:
            raise ConfigurationError("fibonacci scheme is 3-d only")
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        theta = pi * (1.0 + 5.0**0.5) * i
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        nodes = np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)
        nodes /= np.linalg.norm(nodes, axis=1)[:, None]
        weights = np.full(count, 4.0 * pi / count)
    elif scheme == "monte-carlo":
        if not 2 <= dim <= 4:
            raise ConfigurationError("monte-carlo scheme supports dim 2..4")
        if seed is None:
            raise ConfigurationError("monte-carlo scheme needs a seed")
        rng = np.random.default_rng(seed)
        nodes = rng.standard_normal((count, dim))
        norms = np.linalg.norm(nodes, axis=1)
        while (norms < 1e-12).any():          # essentially unreachable
            bad = norms < 1e-12
            nodes[bad] = rng.standard_normal((int(bad.sum()), dim))
            norms = np.linalg.norm(nodes, axis=1)
        nodes /= norms[:, None]
        weights = np.full(count, sphere_area(dim) / count)
    else:
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    return DirectionSet(dim, nodes, weights, scheme, seed)


def perp_basis(xi: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the hyperplane xi-perp.

    Rows are the basis vectors.  For N=2 this is the rotation
    ``xi-perp = (-xi_2, xi_1)`` exactly; for N>=3 it is Gram-Schmidt over the
    standard basis vectors taken in lexicographic order, skipping those that
    degenerate against the span built so far.
    """
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[0]
    xi = xi / np.linalg.norm(xi)
    if n == 2:
        return np.array([[-xi[1], xi[0]]])
    rows = [xi]
    for k in range(n):
        if len(rows) == n:
            break
        v = np.zeros(n)
        v[k] = 1.0
        for r in rows:
            v = v - (v @ r) * r
        nv = np.linalg.norm(v)
        if nv > 1e-10:
            rows.append(v / nv)
    return np.stack(rows[1:], axis=0)


def spanning_tangents(xi: np.ndarray, count: int) -> np.ndarray:
    """``count`` unit vectors spanning xi-perp (rows).

    The first N-1 are the deterministic orthonormal basis from
    ``perp_basis``; further vectors cycle through normalized sums of
    consecutive basis pairs so any requested size stays deterministic.
    """
    basis = perp_basis(xi)
    m = basis.shape[0]
    if count < m:
        raise ConfigurationError(
            f"need at least {m} tangents to span the orthogonal complement"
        )
    rows = [basis[i] for i in range(m)]
    k = 0
    while len(rows) < count:
        v = basis[k % m] + basis[(k + 1) % m]
        rows.append(v / np.linalg.norm(v))
        k += 1
    return np.stack(rows, axis=0)


def half_sphere_first_moment(ds: DirectionSet, n: np.ndarray) -> np.ndarray:
    """Quadrature of  integral over {xi . n > 0} of xi  (exact value: the
    unit-ball volume V_{N-1} times n for unit n)."""
    n = np.asarray(n, dtype=float)
    sel = ds.nodes @ n > 0.0
    return (ds.weights[sel, None] * ds.nodes[sel]).sum(axis=0)


_EQUATOR_DEFAULT = {2: "uniform-angle", 3: "fibonacci"}


def equator_set(ds: DirectionSet, n: np.ndarray) -> tuple[DirectionSet, np.ndarray]:
    """Quadrature set on the equator sphere S^{N-2} inside n-perp.

    Returns the (N-1)-dimensional direction set (coordinates in the
    deterministic basis of n-perp) together with the basis rows, so embedded
    nodes are ``eq.nodes @ basis``.  The parent's scheme is inherited when it
    exists one dimension down (Monte Carlo stays Monte Carlo with a derived
    seed); otherwise the deterministic default for that dimension is used.
    """
    sub_dim = ds.dim - 1
    if sub_dim < 2:
        raise ConfigurationError("equator of a circle is not a quadrature set")
    if ds.scheme == "monte-carlo":
        scheme = "monte-carlo"
        seed = (0 if ds.seed is None else int(ds.seed)) + 1
    else:
        scheme = _EQUATOR_DEFAULT[sub_dim]
        seed = None
    basis = perp_basis(np.asarray(n, dtype=float))
    return build_directions(sub_dim, ds.count, scheme, seed), basis


def half_sphere_second_moment(ds: DirectionSet, n: np.ndarray,
                              half: int = +1) -> np.ndarray:
    """Quadrature of  integral over a half equator of xi (x) xi.

    The equator is S^{N-2} in the hyperplane n-perp; the positive half keeps
    nodes with positive first coordinate in the deterministic tangent basis
    (ties go to the negative half, mirroring the half-space indicator
    convention).  The returned (N-1) x (N-1) matrix is expressed in that
    basis; the exact value is H^{N-2}(S^{N-2}) / (2(N-1)) times the identity
    (pi/2 Id for N=3, 2 pi/3 Id for N=4).
    """
    if half not in (+1, -1):
        raise ConfigurationError("half must be +1 or -1")
    eq, _basis = equator_set(ds, n)
    first = eq.nodes[:, 0]
    sel = first > 0.0 if half == +1 else first <= 0.0
    nodes = eq.nodes[sel]
    w = eq.weights[sel]
    return np.einsum("k,ki,kj->ij", w, nodes, nodes)
