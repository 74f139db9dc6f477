"""Line-energy functional and the discrete H^-1 norm.

The H^-1 oracle: for the Dirichlet eigenfunction w = sin(pi x) sin(pi y) on
the unit square, -lap phi = w gives phi = w / (2 pi^2), so ||w||^2 in H^-1
is exactly 1 / (8 pi^2).
"""

import numpy as np
import pytest

from eikinetic import (ConfigurationError, GridSpec, ScalarField, VectorField,
                       gen_constant, gen_regularized_vortex, gl_energy,
                       hminus1_norm_sq)


def unit_square(n):
    h = 1.0 / (n - 1)
    return GridSpec((n, n), (h, h), (0.0, 0.0))


def quarter_turn(u):
    """v(x) = R u(R^T x) for the quarter turn R(a,b) = (-b, a), resampled
    on the same centered square grid."""
    a = u.data
    g = a.transpose(1, 0, 2)[::-1]          # g[i, j] = a[j, n-1-i]
    data = np.stack([-g[..., 1], g[..., 0]], axis=-1)
    mask = u.mask.transpose(1, 0)[::-1].copy()
    return VectorField(u.grid, data, mask, unit=u.unit)


def test_parts_nonnegative_and_sum(vortex2):
    br = gl_energy(vortex2, 0.15)
    assert br.dirichlet >= 0 and br.penalty >= 0 and br.curl_term >= 0
    assert br.total == pytest.approx(
        br.dirichlet + br.penalty + br.curl_term, rel=1e-12)
    assert br.eps == 0.15


def test_hminus1_eigenfunction_oracle():
    g = unit_square(65)
    x = g.coords()
    w = np.sin(np.pi * x[..., 0]) * np.sin(np.pi * x[..., 1])
    val = hminus1_norm_sq(ScalarField(g, w))
    assert val == pytest.approx(1.0 / (8.0 * np.pi**2), rel=1e-2)


def test_hminus1_quadratic_scaling():
    g = unit_square(33)
    rng = np.random.default_rng(7)
    w = rng.standard_normal(g.shape)
    base = hminus1_norm_sq(ScalarField(g, w))
    assert base > 0
    scaled = hminus1_norm_sq(ScalarField(g, 3.0 * w))
    assert scaled == pytest.approx(9.0 * base, rel=1e-10)


def test_hminus1_guards(grid3):
    g = unit_square(17)
    assert hminus1_norm_sq(ScalarField(g, np.zeros(g.shape))) == 0.0
    with pytest.raises(ConfigurationError):
        hminus1_norm_sq(ScalarField(grid3, np.zeros(grid3.shape)))
    vals = np.zeros(g.shape)
    vals[8, 8] = np.inf
    with pytest.raises(ConfigurationError):
        hminus1_norm_sq(ScalarField(g, vals, allow_inf=True))


def test_gradient_field_has_tiny_curl_energy(vortex2, rotational2):
    br = gl_energy(vortex2, 0.1)
    # sampled radial field: discrete curl is O(h^2) noise, five orders
    # below the O(1) curl energy of the rotational counterexample
    assert br.curl_term <= 1e-4
    assert gl_energy(rotational2, 0.1).curl_term >= 1e4 * br.curl_term
    assert br.penalty <= 1e-28        # data normalized on the valid set


def test_constant_field_has_zero_energy(grid2):
    u = gen_constant(grid2, (0.8, -0.6))
    br = gl_energy(u, 0.1)
    assert br.total == 0.0


def test_energy_eps_scaling_is_exact():
    g = GridSpec((65, 65), (1 / 32, 1 / 32), (-1.0, -1.0))
    u = gen_regularized_vortex(g, (0.2, -0.1), 0.3)
    a = gl_energy(u, 0.2)
    b = gl_energy(u, 0.1)
    assert b.dirichlet == pytest.approx(0.5 * a.dirichlet, rel=1e-14)
    assert b.penalty == pytest.approx(2.0 * a.penalty, rel=1e-14)
    assert b.curl_term == pytest.approx(2.0 * a.curl_term, rel=1e-14)


def test_energy_quarter_turn_invariant():
    g = GridSpec((65, 65), (1 / 32, 1 / 32), (-1.0, -1.0))
    u = gen_regularized_vortex(g, (0.3, -0.2), 0.25)
    v = quarter_turn(u)
    e_u = gl_energy(u, 0.15)
    e_v = gl_energy(v, 0.15)
    assert e_v.dirichlet == pytest.approx(e_u.dirichlet, rel=1e-8)
    assert e_v.penalty == pytest.approx(e_u.penalty, rel=1e-8)
    assert e_v.curl_term == pytest.approx(e_u.curl_term, rel=1e-8, abs=1e-14)
    assert e_v.total == pytest.approx(e_u.total, rel=1e-8)


def test_regularized_vortex_profile_and_energy_decay():
    g = GridSpec((129, 129), (1 / 64, 1 / 64), (-1.0, -1.0))
    u = gen_regularized_vortex(g, (0.0, 0.0), 0.25)
    r = np.linalg.norm(g.coords(), axis=-1)
    speed = np.linalg.norm(u.data, axis=-1)
    assert np.allclose(speed, np.minimum(r / 0.25, 1.0), atol=1e-12)
    totals = [gl_energy(gen_regularized_vortex(g, (0.0, 0.0), e), e).total
              for e in (0.2, 0.1)]
    assert totals[0] > totals[1] > 0


def test_energy_guards(vortex3, vortex2):
    with pytest.raises(ConfigurationError):
        gl_energy(vortex3, 0.1)
    with pytest.raises(ConfigurationError):
        gl_energy(vortex2, 0.0)
    with pytest.raises(ConfigurationError):
        gen_regularized_vortex(vortex3.grid, (0.0, 0.0, 0.0), 0.1)


def test_breakdown_json_round_trip(vortex2):
    br = gl_energy(vortex2, 0.1)
    d = br.to_json_dict()
    assert set(d) == {"eps", "dirichlet", "penalty", "curl_term", "total"}
    assert d["total"] == br.total
