"""Batch front door: generation, checks, reports, and SVG plots.

Subcommands: generate, residual, residual2d, weak, classify, trace,
umbilic, degree, energy, entropy, reduce, report.  Fields travel as VFLD
files; every check emits a JSON report (``report_version`` 1) embedding the
full parameter set needed to regenerate it.  Exit codes: 0 when the check
passed (or produced its artifact), 1 when a verdict was fail or
indeterminate, 2 on errors (bad input, malformed files, unknown flags).
``--threads N`` (or EIKINETIC_THREADS) caps residual worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from eikinetic import calibration
from eikinetic.directions import ConfigurationError, build_directions
from eikinetic.fields import GridSpec, TestFunction, halton_test_functions
from eikinetic import generators
from eikinetic import geometry
from eikinetic import kinetic
from eikinetic import energy as energy_mod
from eikinetic.vfld import read_vfld, write_vfld

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
REPORT_VERSION = 1


# ---------------------------------------------------------------------------
# small helpers


def _floats(text: str) -> tuple:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


def _ints(text: str) -> tuple:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad int list {text!r}") from exc


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _write_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, default=_json_default)
    if path is None:
        print(text)
        return
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".json-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _report(command: str, params: dict, result, verdict=None) -> dict:
    out = {"report_version": REPORT_VERSION, "command": command,
           "params": params}
    if verdict is not None:
        out["verdict"] = verdict
    out["result"] = result
    return out


def _verdict_exit(verdict: str) -> int:
    return EXIT_PASS if verdict == "pass" else EXIT_FAIL


def _load_vector(path):
    return read_vfld(path).vector_field()


def _load_scalar(path):
    return read_vfld(path).scalar_field()


def _phi_set(grid, u_mask, args) -> list:
    phis = [TestFunction(tuple(spec[:-1]), spec[-1])
            for spec in (args.phi or [])]
    want = args.phi_count - len(phis)
    if want > 0:
        phis += halton_test_functions(grid, want, args.phi_radius,
                                      mask=u_mask, seed=args.phi_seed)
    if not phis:
        raise ConfigurationError("no usable test functions; pass --phi or "
                                 "raise --phi-count")
    return phis


def _add_phi_args(p, count=20, radius=0.45):
    p.add_argument("--phi-count", type=int, default=count,
                   help="number of random bump test functions")
    p.add_argument("--phi-radius", type=float, default=radius,
                   help="bump radius")
    p.add_argument("--phi-seed", type=int, default=0,
                   help="Halton scramble seed for bump centers")
    p.add_argument("--phi", action="append", type=_floats, metavar="C...,R",
                   help="pinned bump: center coordinates then radius "
                        "(repeatable)")


def _add_common(p):
    p.add_argument("--report", help="write the JSON report here "
                                    "(default: stdout)")
    p.add_argument("--threads", type=int,
                   help="worker threads for residual entries")


def _apply_threads(args) -> None:
    if getattr(args, "threads", None):
        os.environ["EIKINETIC_THREADS"] = str(args.threads)


def _maybe_plot_vector(u, out_path, slice_spec) -> str | None:
    from eikinetic import plots

    target = os.fspath(out_path) + ".svg"
    if u.dim == 2:
        plots.field_svg(u, target)
        return target
    if slice_spec is not None:
        axis, value = slice_spec
        plots.field_svg(plots.take_slice(u, int(axis), value), target,
                        title=f"slice axis {int(axis)} = {value}")
        return target
    return None


# ---------------------------------------------------------------------------
# generate


def _default_grid(dim: int, shape, origin, spacing) -> GridSpec:
    if len(shape) == 1:
        shape = shape * dim
    if origin is None:
        origin = (-1.5,) * dim
    elif len(origin) == 1:
        origin = origin * dim
    if spacing is None:
        spacing = tuple(3.0 / (s - 1) for s in shape)
    elif len(spacing) == 1:
        spacing = spacing * dim
    return GridSpec(tuple(shape), tuple(spacing), tuple(origin))


def cmd_generate(args) -> int:
    dim = args.dim
    grid = _default_grid(dim, args.shape, args.origin, args.spacing)
    prov = {"kind": args.kind, "shape": list(grid.shape),
            "spacing": list(grid.spacing), "origin": list(grid.origin)}
    mid = tuple(0.5 * (lo + hi) for lo, hi in zip(grid.lo, grid.hi))

    if args.kind == "vortex":
        center = args.center or mid
        u = generators.gen_vortex(grid, center, sign=args.sign)
        prov.update(center=list(center), sign=args.sign, unit=True)
    elif args.kind == "constant":
        direction = args.direction or (1.0,) + (0.0,) * (dim - 1)
        u = generators.gen_constant(grid, direction)
        prov.update(direction=list(direction), unit=True)
    elif args.kind == "vortex-line":
        axis_point = args.axis_point or mid[:-1]
        u = generators.gen_vortex_line(grid, axis_point)
        prov.update(axis_point=list(axis_point), unit=True)
    elif args.kind == "rotational2d":
        center = args.center or mid
        u = generators.gen_rotational_2d(grid, center)
        prov.update(center=list(center), unit=True)
    elif args.kind == "regularized-vortex":
        center = args.center or mid
        u = energy_mod.gen_regularized_vortex(grid, center, args.eps)
        prov.update(center=list(center), eps=args.eps, unit=False)
    elif args.kind == "distance-point":
        center = args.center or mid
        psi = generators.fast_marching(grid, [center])
        prov.update(center=list(center))
        write_vfld(args.out, grid, {"psi": psi.values}, provenance=prov)
        print(f"wrote {args.out}")
        return EXIT_PASS
    elif args.kind == "distance-circle":
        if dim != 2:
            raise ConfigurationError("distance-circle is 2-d")
        center = args.center or mid
        th = np.linspace(0.0, 2.0 * np.pi, args.segments)
        curve = np.asarray(center) + args.radius * np.stack(
            [np.cos(th), np.sin(th)], axis=1)
        psi = generators.gen_distance_field_2d(grid, curve)
        prov.update(center=list(center), radius=args.radius)
        write_vfld(args.out, grid, {"psi": psi.values}, provenance=prov)
        print(f"wrote {args.out}")
        return EXIT_PASS
    elif args.kind == "distance-parabola":
        if dim != 2:
            raise ConfigurationError("distance-parabola is 2-d")
        a, c = args.parabola
        half = 0.45 * (grid.hi[0] - grid.lo[0])
        t = np.linspace(mid[0] - half, mid[0] + half, args.segments)
        curve = np.stack([t, a * (t - mid[0]) ** 2 + c], axis=1)
        psi = generators.gen_distance_field_2d(grid, curve)
        prov.update(parabola=[a, c])
        write_vfld(args.out, grid, {"psi": psi.values}, provenance=prov)
        print(f"wrote {args.out}")
        return EXIT_PASS
    elif args.kind == "ellipsoid-distance":
        if dim != 3:
            raise ConfigurationError("ellipsoid-distance is 3-d")
        psi = generators.gen_ellipsoid_distance(grid, args.semi_axes)
        prov.update(semi_axes=list(args.semi_axes))
        write_vfld(args.out, grid, {"psi": psi.values}, provenance=prov)
        print(f"wrote {args.out}")
        return EXIT_PASS
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigurationError(f"unknown kind {args.kind}")

    write_vfld(args.out, grid, {"u": u.data}, mask=u.mask, provenance=prov)
    print(f"wrote {args.out}")
    plotted = _maybe_plot_vector(u, args.out, args.slice)
    if plotted:
        print(f"wrote {plotted}")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# residual family


def cmd_residual(args) -> int:
    _apply_threads(args)
    u = _load_vector(args.field)
    ds = build_directions(u.dim, args.count, args.scheme, seed=args.ds_seed)
    phis = _phi_set(u.grid, u.mask, args)
    extra = None
    if args.xi:
        extra = np.asarray(args.xi, dtype=float)
    rep = kinetic.kinetic_residual(u, ds, args.tangents, phis,
                                   tolerance=args.tolerance, extra_xis=extra)
    params = {"field": os.fspath(args.field), **rep.params,
              "phi_seed": args.phi_seed,
              "pinned_xis": [list(x) for x in (args.xi or [])]}
    _write_json(args.report, _report("residual", params, rep.to_json_dict(),
                                     rep.verdict))
    return _verdict_exit(rep.verdict)


def cmd_residual2d(args) -> int:
    _apply_threads(args)
    u = _load_vector(args.field)
    ds = build_directions(2, args.count, args.scheme, seed=args.ds_seed)
    phis = _phi_set(u.grid, u.mask, args)
    rep = kinetic.kinetic_residual_2d(u, ds, phis, tolerance=args.tolerance)
    params = {"field": os.fspath(args.field), **rep.params,
              "phi_seed": args.phi_seed}
    _write_json(args.report, _report("residual2d", params,
                                     rep.to_json_dict(), rep.verdict))
    return _verdict_exit(rep.verdict)


def cmd_weak(args) -> int:
    _apply_threads(args)
    u = _load_vector(args.field)
    ds = build_directions(u.dim - 1, args.count, args.scheme,
                          seed=args.ds_seed)
    phis = _phi_set(u.grid, u.mask, args)
    rep = kinetic.weak_kinetic_residual(u, ds, phis,
                                        tolerance=args.tolerance)
    params = {"field": os.fspath(args.field), **rep.params,
              "phi_seed": args.phi_seed}
    _write_json(args.report, _report("weak", params, rep.to_json_dict(),
                                     rep.verdict))
    return _verdict_exit(rep.verdict)


def cmd_entropy(args) -> int:
    u = _load_vector(args.field)
    phis = _phi_set(u.grid, u.mask, args)
    rep = kinetic.entropy_residual_2d(u, args.xi, phis, args.ks,
                                      tolerance=args.tolerance)
    params = {"field": os.fspath(args.field), **rep.params,
              "xi": list(rep.xi), "ks": list(rep.ks),
              "phi_seed": args.phi_seed}
    _write_json(args.report, _report("entropy", params, rep.to_json_dict(),
                                     rep.verdict))
    return _verdict_exit(rep.verdict)


# ---------------------------------------------------------------------------
# geometry family


def cmd_classify(args) -> int:
    if args.lines:
        fam = geometry.classify_line_family(
            geometry.lines_from_csv(args.lines), tol=args.tol)
        params = {"lines": os.fspath(args.lines), "tol": args.tol}
        _write_json(args.report, _report("classify-lines", params,
                                         fam.to_json_dict()))
        return EXIT_PASS
    u = _load_vector(args.field)
    fc = geometry.classify_field(u, sample_count=args.samples,
                                 seed=args.seed, tol=args.tol)
    params = {"field": os.fspath(args.field), "samples": args.samples,
              "seed": args.seed, "tol": args.tol}
    if args.report is None:
        print(json.dumps(fc.to_json_dict(), default=_json_default))
    else:
        _write_json(args.report, _report("classify", params,
                                         fc.to_json_dict()))
    return EXIT_PASS


def cmd_trace(args) -> int:
    u = _load_vector(args.field)
    tf = kinetic.trace_on_segment(u, args.a, args.b, args.radii,
                                  n_samples=args.samples,
                                  trace_tol=args.tol)
    params = {"field": os.fspath(args.field), "a": list(args.a),
              "b": list(args.b), "radii": list(args.radii),
              "samples": args.samples, "trace_tol": args.tol}
    _write_json(args.report, _report("trace", params, tf.to_json_dict()))
    return EXIT_PASS


def cmd_umbilic(args) -> int:
    psi = _load_scalar(args.field)
    rep = geometry.umbilic_check(psi, args.level, sample_count=args.samples,
                                 tol=args.tol, seed=args.seed)
    params = {"field": os.fspath(args.field), "level": args.level,
              "samples": args.samples, "tol": args.tol, "seed": args.seed}
    verdict = "pass" if rep.umbilical else "fail"
    _write_json(args.report, _report("umbilic", params, rep.to_json_dict(),
                                     verdict))
    return _verdict_exit(verdict)


def cmd_degree(args) -> int:
    u = _load_vector(args.field)
    res = geometry.jacobian_degree(u, args.center, args.radius)
    params = {"field": os.fspath(args.field), "center": list(args.center),
              "radius": args.radius}
    _write_json(args.report, _report("degree", params, res.to_json_dict()))
    return EXIT_PASS


# ---------------------------------------------------------------------------
# energy / reduce / report


def cmd_energy(args) -> int:
    u = _load_vector(args.field)
    rows = [energy_mod.gl_energy(u, eps) for eps in args.eps]
    params = {"field": os.fspath(args.field), "eps": list(args.eps)}
    result = [r.to_json_dict() for r in rows]
    if args.csv:
        lines = ["eps,dirichlet,penalty,curl_term,total"]
        lines += [f"{r.eps},{r.dirichlet},{r.penalty},{r.curl_term},{r.total}"
                  for r in rows]
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {args.csv}")
    _write_json(args.report, _report("energy", params, result))
    return EXIT_PASS


def cmd_reduce(args) -> int:
    u = _load_vector(args.field)
    red = kinetic.dimensional_reduce(u, floor=args.floor)
    result = {"slice_deviation": red.slice_deviation,
              "degenerate_nodes": red.degenerate_nodes}
    label = None
    if args.classify:
        label = geometry.classify_field(red.field, sample_count=args.samples,
                                        seed=args.seed)
        result["classification"] = label.to_json_dict()
    verdict = None
    if args.stream_tol is not None:
        if label is None or label.tag not in ("Constant", "Vortex"):
            raise ConfigurationError(
                "--stream-tol needs --classify to land on Constant/Vortex")
        srep = kinetic.stream_form_check(u, label)
        result["stream_form"] = srep.to_json_dict()
        verdict = ("pass" if srep.deviation <= args.stream_tol else "fail")
    if args.out:
        write_vfld(args.out, red.field.grid, {"u": red.field.data},
                   mask=red.field.mask,
                   provenance={"kind": "reduced", "unit": True,
                               "source": os.fspath(args.field)})
        result["out"] = os.fspath(args.out)
    params = {"field": os.fspath(args.field), "floor": args.floor,
              "classify": args.classify, "stream_tol": args.stream_tol,
              "samples": args.samples, "seed": args.seed}
    _write_json(args.report, _report("reduce", params, result, verdict))
    return EXIT_PASS if verdict is None else _verdict_exit(verdict)


def cmd_report(args) -> int:
    entries = []
    worst = "pass"
    for name in sorted(os.listdir(args.directory)):
        if not name.endswith(".json"):
            continue
        path = os.path.join(args.directory, name)
        if args.out and os.path.abspath(path) == os.path.abspath(args.out):
            continue
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError):
            continue
        if not isinstance(doc, dict) or "report_version" not in doc:
            continue
        entry = {"file": name, "command": doc.get("command"),
                 "params": doc.get("params", {})}
        if "verdict" in doc:
            entry["verdict"] = doc["verdict"]
            if doc["verdict"] != "pass":
                worst = "fail"
        entries.append(entry)
    if not entries:
        raise ConfigurationError(f"no reports found in {args.directory}")
    summary = {"report_version": REPORT_VERSION, "command": "report",
               "reports": entries, "overall": worst}
    _write_json(args.out, summary)
    return EXIT_PASS if worst == "pass" else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="eikinetic",
        description="Verification toolkit for unit-norm gradient fields: "
                    "transport residuals, reconstructions, traces, "
                    "umbilicity, classification, degree, and line energy.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a reference field to VFLD")
    g.add_argument("--kind", required=True,
                   choices=["vortex", "constant", "vortex-line",
                            "rotational2d", "regularized-vortex",
                            "distance-point", "distance-circle",
                            "distance-parabola", "ellipsoid-distance"])
    g.add_argument("--dim", type=int, default=3, choices=[2, 3, 4])
    g.add_argument("--shape", type=_ints, default=(64,),
                   help="nodes per axis (single int or comma list)")
    g.add_argument("--origin", type=_floats)
    g.add_argument("--spacing", type=_floats)
    g.add_argument("--center", type=_floats)
    g.add_argument("--sign", type=int, default=1, choices=[1, -1])
    g.add_argument("--direction", type=_floats)
    g.add_argument("--axis-point", type=_floats)
    g.add_argument("--semi-axes", type=_floats, default=(2.0, 1.0, 1.0))
    g.add_argument("--eps", type=float, default=0.1)
    g.add_argument("--radius", type=float, default=0.9)
    g.add_argument("--parabola", type=_floats, default=(0.6, -1.2),
                   metavar="A,C", help="curve y = A (x-mid)^2 + C")
    g.add_argument("--segments", type=int, default=600)
    g.add_argument("--slice", type=_floats, metavar="AXIS,VALUE",
                   help="plot an axis-aligned slice for dim >= 3")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("residual", help="full kinetic transport residual")
    r.add_argument("field")
    r.add_argument("--count", type=int, default=200)
    r.add_argument("--scheme", default="fibonacci",
                   choices=["uniform-angle", "fibonacci", "monte-carlo"])
    r.add_argument("--ds-seed", type=int, default=None)
    r.add_argument("--tangents", type=int, default=3)
    r.add_argument("--xi", action="append", type=_floats,
                   help="pinned direction (repeatable; normalized)")
    r.add_argument("--tolerance", type=float)
    _add_phi_args(r)
    _add_common(r)
    r.set_defaults(func=cmd_residual)

    r2 = sub.add_parser("residual2d", help="planar kinetic residual")
    r2.add_argument("field")
    r2.add_argument("--count", type=int, default=64)
    r2.add_argument("--scheme", default="uniform-angle",
                    choices=["uniform-angle", "monte-carlo"])
    r2.add_argument("--ds-seed", type=int, default=None)
    r2.add_argument("--tolerance", type=float)
    _add_phi_args(r2, count=12, radius=0.35)
    _add_common(r2)
    r2.set_defaults(func=cmd_residual2d)

    w = sub.add_parser("weak", help="equatorial-directions residual")
    w.add_argument("field")
    w.add_argument("--count", type=int, default=64)
    w.add_argument("--scheme", default="uniform-angle",
                   choices=["uniform-angle", "fibonacci", "monte-carlo"])
    w.add_argument("--ds-seed", type=int, default=None)
    w.add_argument("--tolerance", type=float)
    _add_phi_args(w)
    _add_common(w)
    w.set_defaults(func=cmd_weak)

    c = sub.add_parser("classify", help="constant / vortex / other")
    c.add_argument("field", nargs="?")
    c.add_argument("--lines", help="classify a CSV line family instead")
    c.add_argument("--samples", type=int, default=32)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float, default=1e-6)
    _add_common(c)
    c.set_defaults(func=cmd_classify)

    t = sub.add_parser("trace", help="tube-average trace on a segment")
    t.add_argument("field")
    t.add_argument("--a", type=_floats, required=True)
    t.add_argument("--b", type=_floats, required=True)
    t.add_argument("--radii", type=_floats, required=True,
                   help="decreasing tube radii")
    t.add_argument("--samples", type=int, default=33)
    t.add_argument("--tol", type=float, default=0.05)
    _add_common(t)
    t.set_defaults(func=cmd_trace)

    um = sub.add_parser("umbilic", help="level-set umbilicity check")
    um.add_argument("field")
    um.add_argument("--level", type=float, required=True)
    um.add_argument("--samples", type=int, default=24)
    um.add_argument("--tol", type=float, default=0.05)
    um.add_argument("--seed", type=int, default=0)
    _add_common(um)
    um.set_defaults(func=cmd_umbilic)

    d = sub.add_parser("degree", help="topological degree around a point")
    d.add_argument("field")
    d.add_argument("--center", type=_floats, required=True)
    d.add_argument("--radius", type=float, required=True)
    _add_common(d)
    d.set_defaults(func=cmd_degree)

    e = sub.add_parser("energy", help="line-energy sweep (2-d)")
    e.add_argument("field")
    e.add_argument("--eps", type=_floats, default=(0.2, 0.1, 0.05))
    e.add_argument("--csv", help="write the sweep as CSV here")
    _add_common(e)
    e.set_defaults(func=cmd_energy)

    en = sub.add_parser("entropy", help="2-d entropy-flux residuals")
    en.add_argument("field")
    en.add_argument("--xi", type=_floats, default=(1.0, 0.0))
    en.add_argument("--ks", type=_ints, default=(4, 8, 16))
    en.add_argument("--tolerance", type=float)
    _add_phi_args(en, count=10, radius=0.35)
    _add_common(en)
    en.set_defaults(func=cmd_entropy)

    rd = sub.add_parser("reduce", help="collapse the last axis (dim >= 3)")
    rd.add_argument("field")
    rd.add_argument("--floor", type=float, default=calibration.REDUCTION_FLOOR)
    rd.add_argument("--out", help="write the reduced field here")
    rd.add_argument("--classify", action="store_true",
                    help="also classify the reduced field")
    rd.add_argument("--stream-tol", type=float,
                    help="run the stream-form check against this tolerance "
                         "(implies --classify)")
    rd.add_argument("--samples", type=int, default=32)
    rd.add_argument("--seed", type=int, default=0)
    _add_common(rd)
    rd.set_defaults(func=cmd_reduce)

    rp = sub.add_parser("report", help="bundle a directory of JSON reports")
    rp.add_argument("directory")
    rp.add_argument("--out", help="write the summary here (default stdout)")
    rp.set_defaults(func=cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "stream_tol", None) is not None:
        args.classify = True
    if args.command == "classify" and not args.field and not args.lines:
        ap.error("classify needs a VFLD file or --lines CSV")
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
