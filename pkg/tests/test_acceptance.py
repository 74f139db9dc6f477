"""Acceptance gate: the twelve headline checks, each printing one line.

Every test exercises one end-to-end claim at its stated tolerance and time
budget on a single CPU.  Run with ``pytest -v tests/test_acceptance.py``;
add ``-s`` to see the per-criterion PASS/FAIL lines inline.
"""

import json
import time

import numpy as np

from eikinetic import TestFunction as Bump  # alias: pytest must not collect it
from eikinetic import (GridSpec, ScalarField, VectorField,
                       averaging_reconstruct, build_directions, classify_field,
                       cli, dimensional_reduce, entropy_residual_2d,
                       fast_marching, gen_constant, gen_distance_field_2d,
                       gen_ellipsoid_distance, gen_regularized_vortex,
                       gen_rotational_2d, gen_vortex, gen_vortex_line,
                       gl_energy, gradient, half_sphere_first_moment,
                       half_sphere_second_moment, halton_test_functions,
                       hminus1_norm_sq, jacobian_degree, kinetic_residual,
                       level_curvature_2d, ordering_check, stream_form_check,
                       umbilic_check)

N3 = np.array([0.0, 0.0, 1.0])


def grid64():
    return GridSpec((64,) * 3, (3.0 / 63,) * 3, (-1.5,) * 3)


def grid33(origin=(-1.5, -1.5, -1.5)):
    return GridSpec((33,) * 3, (3.0 / 32,) * 3, origin)


def vortex_line_box(n=64):
    """Box shifted to x_2 in [1, 4]: the singular axis {x_1 = x_2 = 0} of the
    planar-vortex field stays outside, so every node is valid."""
    h = 3.0 / (n - 1)
    return GridSpec((n,) * 3, (h,) * 3, (-1.5, 1.0, -1.5))


def emit(num, ok, detail):
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} {detail}")


def test_criterion_01_averaging_reconstruction():
    t0 = time.monotonic()
    g = grid64()
    ds = build_directions(3, 10_000, "fibonacci")
    errs = {}
    for name, u in (("vortex", gen_vortex(g, (0.0, 0.0, 0.0))),
                    ("constant", gen_constant(g, (3.0, 1.0, -2.0)))):
        errs[name] = averaging_reconstruct(u, ds).max_error
    elapsed = time.monotonic() - t0
    ok = max(errs.values()) <= 1e-2 and elapsed <= 60.0
    emit(1, ok, f"reconstruction errors {errs['vortex']:.2e} (vortex), "
                f"{errs['constant']:.2e} (constant) <= 1e-2 "
                f"in {elapsed:.1f}s <= 60s")
    assert errs["vortex"] <= 1e-2
    assert errs["constant"] <= 1e-2
    assert elapsed <= 60.0


def test_criterion_02_half_sphere_moments():
    t0 = time.monotonic()
    ds3 = build_directions(3, 10_000, "fibonacci")
    first = np.abs(half_sphere_first_moment(ds3, N3) - np.pi * N3).max()
    second3 = np.abs(half_sphere_second_moment(ds3, N3)
                     - (np.pi / 2) * np.eye(2)).max()
    ds4 = build_directions(4, 50_000, "monte-carlo", seed=8)
    second4 = np.abs(half_sphere_second_moment(ds4, np.array([0., 0., 0., 1.]))
                     - (2 * np.pi / 3) * np.eye(3)).max()
    elapsed = time.monotonic() - t0
    ok = first <= 1e-2 and second3 <= 1e-2 and second4 <= 2e-2 and elapsed <= 10
    emit(2, ok, f"moment errors: first {first:.2e}, second {second3:.2e} "
                f"(N=3, <=1e-2); second {second4:.2e} (N=4, <=2e-2) "
                f"in {elapsed:.1f}s <= 10s")
    assert first <= 1e-2
    assert second3 <= 1e-2
    assert second4 <= 2e-2
    assert elapsed <= 10.0


def test_criterion_03_residual_discrimination():
    t0 = time.monotonic()
    ds = build_directions(3, 200, "fibonacci")
    extra = np.array([[1.0, 0.0, 1.0]]) / np.sqrt(2.0)

    verdicts, ratio = {}, None
    for name, u in (("vortex", gen_vortex(grid64(), (0.0, 0.0, 0.0))),
                    ("constant", gen_constant(grid64(), (3.0, 1.0, -2.0)))):
        phis = halton_test_functions(u.grid, 20, 0.45, mask=u.mask, seed=0)
        rep = kinetic_residual(u, ds, 3, phis, extra_xis=extra)
        verdicts[name] = rep.verdict

    g = vortex_line_box()
    u = gen_vortex_line(g, (0.0, 0.0, 0.0))
    # two bumps straddling the indicator jump across {x_1 = 0}
    phis = [Bump((0.0, 2.2, 0.0), 0.7),
            Bump((0.0, 3.0, 0.6), 0.45)]
    phis += halton_test_functions(g, 18, 0.45, mask=u.mask, seed=0)
    rep = kinetic_residual(u, ds, 3, phis, extra_xis=extra)
    verdicts["vortex-line"] = rep.verdict
    ratio = rep.max_abs / rep.params["tolerance"]
    elapsed = time.monotonic() - t0

    ok = (verdicts == {"vortex": "pass", "constant": "pass",
                       "vortex-line": "fail"}
          and ratio >= 10.0 and elapsed <= 120.0)
    emit(3, ok, f"verdicts {verdicts}, failing residual at "
                f"xi=(1,0,1)/sqrt(2) is {ratio:.1f}x tolerance (>=10x) "
                f"in {elapsed:.1f}s <= 120s")
    assert verdicts["vortex"] == "pass"
    assert verdicts["constant"] == "pass"
    assert verdicts["vortex-line"] == "fail"
    assert ratio >= 10.0
    assert elapsed <= 120.0


def test_criterion_04_weak_split_in_one_report(tmp_path):
    out = tmp_path / "field.vfld"
    assert cli.main(["generate", "--kind", "vortex-line", "--dim", "3",
                     "--shape", "33", "--origin=-1.5,1.0,-1.5",
                     "--axis-point", "0,0,0", "--out", str(out)]) == 0
    full_args = ["--phi", "0,2.2,0,0.7", "--phi", "0,3.0,0.6,0.45",
                 "--phi-count", "2"]
    assert cli.main(["residual", str(out), "--count", "48", "--tangents", "2",
                     "--xi", "1,0,1", *full_args,
                     "--report", str(tmp_path / "full.json")]) == 1
    assert cli.main(["weak", str(out), "--count", "32", *full_args,
                     "--report", str(tmp_path / "weak.json")]) == 0
    rc = cli.main(["report", str(tmp_path),
                   "--out", str(tmp_path / "summary.json")])
    doc = json.loads((tmp_path / "summary.json").read_text())
    verdicts = {e["command"]: e["verdict"] for e in doc["reports"]}
    ok = (rc == 1 and doc["overall"] == "fail"
          and verdicts == {"residual": "fail", "weak": "pass"})
    emit(4, ok, f"one report bundle: {verdicts}, overall "
                f"{doc['overall']} (weak passes, full fails)")
    assert verdicts == {"residual": "fail", "weak": "pass"}
    assert doc["overall"] == "fail" and rc == 1


def test_criterion_05_ordering():
    g = grid33()
    h = g.max_spacing
    clean = {}
    for name, u in (("vortex", gen_vortex(g, (0.0, 0.0, 0.0))),
                    ("constant", gen_constant(g, (3.0, 1.0, -2.0)))):
        rep = ordering_check(u, 10_000, 4, 5 * h, seed=0)
        clean[name] = rep.violations
    g2 = GridSpec((65, 65), (1 / 32, 1 / 32), (-1.0, -1.0))
    rot = ordering_check(gen_rotational_2d(g2, (0.0, 0.0)), 10_000, 4,
                         5 / 32, seed=0)
    ok = clean == {"vortex": 0, "constant": 0} and rot.violations >= 1
    emit(5, ok, f"violations over 1e4 pairs at delta=5h: {clean}, "
                f"rotational flags {rot.violations} (>=1) with "
                f"{len(rot.witnesses)} witnesses")
    assert clean["vortex"] == 0
    assert clean["constant"] == 0
    assert rot.violations >= 1


def test_criterion_06_classification_sweep():
    g = grid33()
    h = g.max_spacing
    centers = [(0.0, 0.0, 0.0), (0.31, -0.22, 0.11), (-0.4, 0.1, 0.35)]
    worst = 0.0
    for seed in range(5):
        for sign in (1, -1):
            for c in centers:
                fc = classify_field(gen_vortex(g, c, sign=sign),
                                    sample_count=32, seed=seed)
                assert fc.tag == "Vortex", (seed, sign, c, fc.tag)
                assert fc.sign == sign, (seed, sign, c)
                worst = max(worst, float(
                    np.linalg.norm(np.asarray(fc.center) - np.asarray(c))))
    const = classify_field(gen_constant(g, (3.0, 1.0, -2.0)), 32, seed=0)
    other = classify_field(gen_vortex_line(vortex_line_box(33), (0., 0., 0.)),
                           32, seed=0)
    ok = worst <= 2 * h and const.tag == "Constant" and other.tag == "Other"
    emit(6, ok, f"30/30 vortex labels correct, worst center error "
                f"{worst:.2e} <= 2h={2 * h:.2e}; constant -> "
                f"{const.tag}, vortex-line -> {other.tag}")
    assert worst <= 2 * h
    assert const.tag == "Constant"
    assert other.tag == "Other"


def test_criterion_07_umbilicity():
    h = 3.0 / 48
    g = GridSpec((49,) * 3, (h,) * 3, (-1.5,) * 3)
    p = np.array([0.1, -0.05, 0.0])
    psi = ScalarField(g, np.linalg.norm(g.coords() - p, axis=-1))
    sph = umbilic_check(psi, 0.8, sample_count=24, tol=0.05, seed=0)

    ell = umbilic_check(gen_ellipsoid_distance(g, (2.0, 1.0, 1.0)), 0.35,
                        sample_count=24, tol=0.02, seed=0)

    hh = 1.0 / 64
    g2 = GridSpec((257, 257), (hh, hh), (-2.0, -2.0))
    x = g2.coords()
    circ = ScalarField(g2, np.abs(np.linalg.norm(x, axis=-1) - 0.9))
    rc = level_curvature_2d(circ, 0.4, sample_count=16, arc=24 * hh, seed=0,
                            region=lambda q: np.linalg.norm(q, axis=-1) > 0.9)
    t = np.linspace(-1.8, 1.8, 600)
    curve = np.stack([t, 0.6 * t**2 - 1.2], axis=1)
    par = gen_distance_field_2d(g2, curve)
    rp = level_curvature_2d(par, 0.35, sample_count=16, arc=24 * hh, seed=0,
                            region=lambda q: q[..., 1] > 0.6 * q[..., 0]**2
                            - 1.2)

    ok = (sph.umbilical and sph.spherical and sph.center_spread <= 3 * h
          and not ell.umbilical and ell.max_deviation >= 10 * 0.02
          and rc.spread <= 0.05 and rp.spread >= 0.5)
    emit(7, ok, f"sphere umbilical with center spread "
                f"{sph.center_spread:.2e} <= 3h; ellipsoid eigenvalue "
                f"spread {ell.max_deviation:.2f} >= 10x tol; level "
                f"curvature spread circle {rc.spread:.3f} vs parabola "
                f"{rp.spread:.2f}")
    assert sph.umbilical and sph.spherical
    assert sph.center_spread <= 3 * h
    assert np.linalg.norm(np.asarray(sph.center_estimate) - p) <= 3 * h
    assert not ell.umbilical
    assert ell.max_deviation >= 10 * 0.02
    assert rc.spread <= 0.05
    assert rp.spread >= 0.5


def test_criterion_08_degrees():
    g2 = GridSpec((65, 65), (1 / 32, 1 / 32), (-1.0, -1.0))
    v2 = gen_vortex(g2, (0.0, 0.0))
    refl = VectorField(g2, v2.data * np.array([-1.0, 1.0]), v2.mask,
                       unit=True)
    runs = {
        "vortex-2d": jacobian_degree(v2, (0.0, 0.0), 0.6),
        "vortex-3d": jacobian_degree(gen_vortex(grid33(), (0.0,) * 3),
                                     (0.0,) * 3, 0.8),
        "constant": jacobian_degree(gen_constant(g2, (1.0, 1.0)),
                                    (0.0, 0.0), 0.6),
        "reflected": jacobian_degree(refl, (0.0, 0.0), 0.6),
    }
    got = {k: r.degree for k, r in runs.items()}
    want = {"vortex-2d": 1, "vortex-3d": 1, "constant": 0, "reflected": -1}
    defect = max(r.defect for r in runs.values())
    ok = got == want and defect <= 0.05
    emit(8, ok, f"degrees {got}, worst integer distance {defect:.2e} <= 0.05")
    assert got == want
    assert defect <= 0.05


def test_criterion_09_fast_marching():
    p = np.array([0.11, -0.07])
    errs = {}
    for h in (1 / 32, 1 / 64, 1 / 128):
        n = int(round(2 / h)) + 1
        g = GridSpec((n, n), (h, h), (-1.0, -1.0))
        psi = fast_marching(g, [p])
        exact = np.linalg.norm(g.coords() - p, axis=-1)
        err = float(np.abs(psi.values - exact).max())
        errs[h] = (err, 0.75 * h * np.log(1.0 / h))
    bound_ok = all(e <= b for e, b in errs.values())

    h = 1 / 64
    g = GridSpec((129, 129), (h, h), (-1.0, -1.0))
    gr = gradient(fast_marching(g, [p]))
    r = np.linalg.norm(g.coords() - p, axis=-1)
    keep = gr.mask & (r >= 0.25)
    norms = np.linalg.norm(gr.data, axis=-1)
    u = VectorField(g, gr.data / np.maximum(norms, 1e-30)[..., None], keep,
                    unit=True)
    fc = classify_field(u, sample_count=32, seed=0, tol=0.05)
    cerr = float(np.linalg.norm(np.asarray(fc.center) - p))
    ok = bound_ok and fc.tag == "Vortex" and cerr <= 2 * h
    emit(9, ok, "value errors vs C h log(1/h), C=0.75: "
                + ", ".join(f"{e:.3e}<={b:.3e}" for e, b in errs.values())
                + f"; gradient classifies {fc.tag} at center error "
                  f"{cerr:.2e} <= 2h")
    for e, b in errs.values():
        assert e <= b
    assert fc.tag == "Vortex"
    assert cerr <= 2 * h


def test_criterion_10_energy():
    h = 1.0 / 128
    g = GridSpec((129, 129), (h, h), (0.0, 0.0))
    x = g.coords()
    w = np.sin(np.pi * x[..., 0]) * np.sin(np.pi * x[..., 1])
    got = hminus1_norm_sq(ScalarField(g, w))
    exact = 1.0 / (8.0 * np.pi**2)
    rel = abs(got - exact) / exact

    gs = GridSpec((257, 257), (h, h), (-1.0, -1.0))
    totals = [gl_energy(gen_regularized_vortex(gs, (0.0, 0.0), e), e).total
              for e in (0.2, 0.1, 0.05)]
    decreasing = totals[0] > totals[1] > totals[2]
    ok = rel <= 1e-2 and decreasing
    emit(10, ok, f"H^-1 eigenfunction identity within {rel:.2e} (<=1%); "
                 f"regularized-vortex energies "
                 + " > ".join(f"{t:.3f}" for t in totals))
    assert rel <= 1e-2
    assert decreasing


def test_criterion_11_dimensional_reduction():
    t0 = time.monotonic()
    h = 3.0 / 23
    g = GridSpec((24,) * 4, (h,) * 4, (-1.5, 1.0, -1.5, -1.5))
    u = gen_vortex_line(g, (0.0, 0.0, 0.0))
    red = dimensional_reduce(u)
    fc = classify_field(red.field, sample_count=32, seed=0)
    srep = stream_form_check(u, fc)
    elapsed = time.monotonic() - t0
    ok = (red.slice_deviation <= 1e-10 and fc.tag == "Vortex"
          and srep.deviation <= 1e-6 and elapsed <= 120.0)
    emit(11, ok, f"24^4 field reduces (slice deviation "
                 f"{red.slice_deviation:.1e}) to a 3-d {fc.tag}; "
                 f"stream-form deviation {srep.deviation:.1e} <= 1e-6 "
                 f"in {elapsed:.1f}s <= 120s")
    assert red.slice_deviation <= 1e-10
    assert red.degenerate_nodes == 0
    assert fc.tag == "Vortex"
    assert srep.deviation <= 1e-6
    assert elapsed <= 120.0


def test_criterion_12_entropy_residuals():
    h = 1.0 / 64
    g = GridSpec((257, 257), (h, h), (-2.0, -2.0))
    th = np.linspace(0.0, 2.0 * np.pi, 600)
    curve = 0.9 * np.stack([np.cos(th), np.sin(th)], axis=1)
    psi = gen_distance_field_2d(g, curve)
    gr = gradient(psi)
    r = np.linalg.norm(g.coords(), axis=-1)
    norms = np.linalg.norm(gr.data, axis=-1)
    # keep the smooth annuli: away from the circle (kink of the unsigned
    # distance), away from the inner focal point, and where |grad psi| ~ 1
    keep = (gr.mask & (psi.values > 4 * h) & (r > 4 * h)
            & (np.abs(norms - 1.0) < 0.2))
    u = VectorField(g, gr.data / np.maximum(norms, 1e-30)[..., None], keep,
                    unit=True)
    phis = halton_test_functions(g, 10, 0.35, mask=keep, seed=0)
    rep = entropy_residual_2d(u, (1.0, 0.0), phis, (4, 8, 16))
    conv = list(rep.convergence)
    monotone = all(a > b for a, b in zip(conv, conv[1:]))
    ok = rep.verdict == "pass" and monotone
    emit(12, ok, f"circle-distance gradient: verdict {rep.verdict} "
                 f"(max residual {rep.max_abs:.2e}); smoothed-to-sharp "
                 f"gaps {', '.join(f'{c:.1e}' for c in conv)} decrease "
                 f"monotonically")
    assert rep.verdict == "pass"
    assert monotone
