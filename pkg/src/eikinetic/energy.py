"""Line-energy functional with an H^-1 curl penalty (2-d).

E_eps(u) = eps * int |grad u|^2  +  (1/eps) * int (1 - |u|^2)^2
           + (1/eps) * || curl u ||^2 in the H^-1 norm,

where H^-1 is the dual of H^1_0 on the grid rectangle, realized through the
five-point Dirichlet Poisson solve: ||w||^2 = int phi w with -lap phi = w.
Unit-norm gradient fields are exactly the zero-energy states of the eps -> 0
limit; the functional quantifies how far a sampled field sits from that
class and reproduces the vanishing-energy vortex family when the core is
linearly regularized at scale eps.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg

from eikinetic.directions import ConfigurationError
from eikinetic.fields import (ScalarField, VectorField, _component_partials,
                              _neighbors_valid, interior_mask)


class SolverError(RuntimeError):
    """Conjugate gradients failed to reach the target residual."""


def _dirichlet_laplacian(grid) -> sparse.spmatrix:
    """Five-point Laplacian on interior nodes, homogeneous Dirichlet."""
    nx, ny = grid.shape[0] - 2, grid.shape[1] - 2
    hx, hy = grid.spacing

    def second_diff(n, h):
        return sparse.diags([-1.0, 2.0, -1.0], [-1, 0, 1],
                            shape=(n, n), format="csr") / h**2

    return (sparse.kron(second_diff(nx, hx), sparse.eye(ny), format="csr")
            + sparse.kron(sparse.eye(nx), second_diff(ny, hy), format="csr"))


_CG_TOL_KW = "rtol" if "rtol" in inspect.signature(cg).parameters else "tol"


def hminus1_norm_sq(omega: ScalarField) -> float:
    """Squared H^-1 norm of a 2-d source: solve -lap phi = omega with zero
    boundary values by conjugate gradients (relative residual 1e-10, at most
    10n iterations) and return the duality pairing int phi omega."""
    grid = omega.grid
    if grid.dim != 2:
        raise ConfigurationError("H^-1 norm is defined on 2-d grids here")
    w = omega.values[1:-1, 1:-1]
    if not np.isfinite(w).all():
        raise ConfigurationError("source has non-finite interior values")
    b = w.reshape(-1)
    if not b.any():
        return 0.0
    a = _dirichlet_laplacian(grid)
    n = b.size
    phi, info = cg(a, b, maxiter=10 * n, atol=0.0, **{_CG_TOL_KW: 1e-10})
    if info != 0:
        raise SolverError(
            f"conjugate gradients stopped with status {info} "
            f"after {10 * n} iterations"
        )
    return float(grid.cell_volume * (phi @ b))


@dataclass(frozen=True)
class EnergyBreakdown:
    eps: float
    dirichlet: float     # eps * int |grad u|^2
    penalty: float       # (1/eps) * int (1 - |u|^2)^2
    curl_term: float     # (1/eps) * ||curl u||^2 in H^-1
    total: float

    def to_json_dict(self) -> dict:
        return {"eps": self.eps, "dirichlet": self.dirichlet,
                "penalty": self.penalty, "curl_term": self.curl_term,
                "total": self.total}


def gl_energy(u: VectorField, eps: float) -> EnergyBreakdown:
    """Assemble the three energy terms for a sampled 2-d field.

    Gradients are central differences; all integrals run over the same
    valid set (nodes whose full stencil is valid and central), and the curl
    is zero-extended onto the rectangle for the Poisson solve so masked
    regions contribute nothing to any term.
    """
    if u.dim != 2:
        raise ConfigurationError("the line energy is 2-d only")
    if not eps > 0:
        raise ConfigurationError("eps must be positive")
    grid = u.grid
    parts = _component_partials(u)
    valid = _neighbors_valid(u.mask) & interior_mask(grid)
    vol = grid.cell_volume

    grad_sq = np.einsum("...ij,...ij->...", parts, parts)
    dirichlet = eps * vol * float(grad_sq[valid].sum())

    norm_sq = np.einsum("...d,...d->...", u.data, u.data)
    penalty = (1.0 / eps) * vol * float(((1.0 - norm_sq[valid]) ** 2).sum())

    omega = np.where(valid, parts[..., 0, 1] - parts[..., 1, 0], 0.0)
    curl_term = (1.0 / eps) * hminus1_norm_sq(ScalarField(grid, omega))

    total = dirichlet + penalty + curl_term
    return EnergyBreakdown(eps, dirichlet, penalty, curl_term, total)


def gen_regularized_vortex(grid, center, eps: float) -> VectorField:
    """The vanishing-energy vortex family: u* outside the core, linearly
    interpolated to 0 inside |x - center| < eps.  Not unit-norm in the core;
    defined (as 0) at the center itself, so no mask is needed."""
    center = np.asarray(center, dtype=float)
    if grid.dim != 2:
        raise ConfigurationError("regularized vortex family is 2-d")
    if not eps > 0:
        raise ConfigurationError("eps must be positive")
    rel = grid.coords() - center
    r = np.linalg.norm(rel, axis=-1)
    safe = np.where(r > 0, r, 1.0)
    unit = np.where(r[..., None] > 0, rel / safe[..., None], 0.0)
    scale = np.minimum(r / eps, 1.0)
    return VectorField(grid, unit * scale[..., None],
                       np.ones(grid.shape, dtype=bool), unit=False)
