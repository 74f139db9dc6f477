"""End-to-end command-line runs, in process via cli.main(argv).

Exit-code contract: 0 = check passed / artifact written, 1 = fail or
indeterminate verdict, 2 = usage or runtime error.
"""

import json
import shutil

import numpy as np
import pytest

from eikinetic import GridSpec, cli, read_vfld, write_vfld


@pytest.fixture(scope="module")
def ws(tmp_path_factory):
    """A workspace of generated fields shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cliws")

    def gen(*argv):
        assert cli.main(["generate", *argv]) == 0

    gen("--kind", "vortex", "--dim", "3", "--shape", "33",
        "--out", str(root / "v3.vfld"))
    gen("--kind", "vortex-line", "--dim", "3", "--shape", "33",
        "--origin=-1.5,1.0,-1.5", "--axis-point", "0,0,0",
        "--out", str(root / "vl3.vfld"))
    gen("--kind", "vortex", "--dim", "2", "--shape", "65",
        "--out", str(root / "v2.vfld"))
    gen("--kind", "rotational2d", "--dim", "2", "--shape", "65",
        "--out", str(root / "rot2.vfld"))
    gen("--kind", "regularized-vortex", "--dim", "2", "--shape", "65",
        "--eps", "0.25", "--out", str(root / "reg2.vfld"))
    gen("--kind", "ellipsoid-distance", "--dim", "3", "--shape", "33",
        "--out", str(root / "ell3.vfld"))
    gen("--kind", "vortex-line", "--dim", "4", "--shape", "17",
        "--origin=-1.5,1.0,-1.5,-1.5", "--axis-point", "0,0,0",
        "--out", str(root / "vl4.vfld"))

    g = GridSpec((33,) * 3, (3 / 32,) * 3, (-1.5,) * 3)
    psi = np.linalg.norm(g.coords() - np.array([0.1, 0.0, -0.05]), axis=-1)
    write_vfld(root / "sph3.vfld", g, {"psi": psi})
    return root


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


# ----------------------------------------------------------------- generate


def test_generate_writes_vfld_and_svg(ws):
    vf = read_vfld(ws / "v3.vfld")
    assert vf.grid.shape == (33, 33, 33)
    assert vf.provenance["kind"] == "vortex" and vf.provenance["unit"]
    assert vf.mask is not None
    svg = (ws / "v2.vfld.svg").read_text()
    assert svg.lstrip().startswith("<")         # 2-d fields get a plot


def test_generate_3d_slice_plot(tmp_path, capsys):
    out = tmp_path / "s.vfld"
    rc, stdout, _ = run(capsys, "generate", "--kind", "vortex", "--dim", "3",
                        "--shape", "17", "--slice", "2,0.0", "--out", str(out))
    assert rc == 0
    assert f"wrote {out}.svg" in stdout
    assert (tmp_path / "s.vfld.svg").exists()


# ----------------------------------------------------------------- classify


def test_classify_prints_plain_json(ws, capsys):
    rc, stdout, _ = run(capsys, "classify", str(ws / "v3.vfld"))
    assert rc == 0
    doc = json.loads(stdout)
    assert doc["tag"] == "Vortex" and doc["sign"] == 1
    assert np.linalg.norm(doc["center"]) <= 2 * (3 / 32)


def test_classify_report_wraps_result(ws, tmp_path, capsys):
    rep = tmp_path / "c.json"
    rc, stdout, _ = run(capsys, "classify", str(ws / "v3.vfld"),
                        "--report", str(rep))
    assert rc == 0 and stdout == ""
    doc = json.loads(rep.read_text())
    assert doc["report_version"] == 1 and doc["command"] == "classify"
    assert doc["result"]["tag"] == "Vortex"


def test_classify_line_family_csv(tmp_path, capsys):
    csv = tmp_path / "fam.csv"
    rows = []
    rng = np.random.default_rng(0)
    for _ in range(4):
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        p = np.array([0.5, -1.0, 2.0]) + 1.7 * d
        rows.append(",".join(map(str, [*p, *d])))
    csv.write_text("\n".join(rows) + "\n")
    rc, stdout, _ = run(capsys, "classify", "--lines", str(csv))
    assert rc == 0
    doc = json.loads(stdout)
    assert doc["command"] == "classify-lines"
    assert doc["result"]["tag"] == "Concurrent"
    assert np.allclose(doc["result"]["point"], (0.5, -1.0, 2.0), atol=1e-6)


def test_classify_without_input_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["classify"])
    assert exc.value.code == 2


# ----------------------------------------------------------------- residual


def test_residual_pass_with_report(ws, tmp_path, capsys):
    rep = tmp_path / "r.json"
    rc, _, _ = run(capsys, "residual", str(ws / "v3.vfld"),
                   "--count", "48", "--tangents", "2", "--phi-count", "6",
                   "--phi-radius", "0.42", "--report", str(rep))
    assert rc == 0
    doc = json.loads(rep.read_text())
    assert doc["report_version"] == 1
    assert doc["verdict"] == "pass"
    p = doc["params"]
    assert p["scheme"] == "fibonacci" and p["ds_count"] == 48
    assert p["tolerance"] > 0
    assert doc["result"]["max_abs"] <= p["tolerance"]


def test_residual_fails_on_vortex_line(ws, tmp_path, capsys):
    rep = tmp_path / "r.json"
    rc, _, _ = run(capsys, "residual", str(ws / "vl3.vfld"),
                   "--count", "48", "--tangents", "2", "--xi", "1,0,1",
                   "--phi", "0,2.2,0,0.7", "--phi", "0,3.0,0.6,0.45",
                   "--phi-count", "2", "--report", str(rep))
    assert rc == 1
    doc = json.loads(rep.read_text())
    assert doc["verdict"] == "fail"
    assert doc["params"]["pinned_xis"] == [[1.0, 0.0, 1.0]]


def test_weak_residual_passes_where_full_fails(ws, tmp_path, capsys):
    rep = tmp_path / "w.json"
    rc, _, _ = run(capsys, "weak", str(ws / "vl3.vfld"), "--count", "32",
                   "--phi", "0,2.2,0,0.7", "--phi", "0,3.0,0.6,0.45",
                   "--phi-count", "2", "--report", str(rep))
    assert rc == 0
    doc = json.loads(rep.read_text())
    assert doc["command"] == "weak" and doc["verdict"] == "pass"
    assert doc["result"]["kind"] == "weak"


def test_residual2d_runs(ws, tmp_path, capsys):
    rep = tmp_path / "r2.json"
    rc, _, _ = run(capsys, "residual2d", str(ws / "v2.vfld"),
                   "--count", "32", "--phi-count", "6", "--phi-radius", "0.4",
                   "--report", str(rep))
    assert rc == 0
    assert json.loads(rep.read_text())["result"]["kind"] == "2d"


# ------------------------------------------------------------------ entropy


def test_entropy_verdicts(ws, tmp_path, capsys):
    rep = tmp_path / "e.json"
    rc, _, _ = run(capsys, "entropy", str(ws / "v2.vfld"), "--xi", "1,0",
                   "--ks", "4,8", "--phi-count", "6", "--phi-radius", "0.4",
                   "--report", str(rep))
    assert rc == 0
    doc = json.loads(rep.read_text())
    assert doc["verdict"] == "pass" and len(doc["result"]["convergence"]) == 2

    rc, _, _ = run(capsys, "entropy", str(ws / "rot2.vfld"), "--xi", "1,0",
                   "--ks", "4,8", "--phi-count", "6", "--phi-radius", "0.4",
                   "--report", str(rep))
    assert rc == 1


# ----------------------------------------------------- geometry subcommands


def test_trace_report(ws, tmp_path, capsys):
    rep = tmp_path / "t.json"
    rc, _, _ = run(capsys, "trace", str(ws / "v3.vfld"),
                   "--a", "0.2,0.1,-0.8", "--b", "0.2,0.1,0.8",
                   "--radii", "0.3,0.2,0.1", "--samples", "17",
                   "--report", str(rep))
    assert rc == 0
    doc = json.loads(rep.read_text())
    res = doc["result"]
    assert len(res["ts"]) == 17 and len(res["values"]) == 17
    assert any(res["reliable"])


def test_umbilic_pass_and_fail(ws, tmp_path, capsys):
    rep = tmp_path / "u.json"
    rc, _, _ = run(capsys, "umbilic", str(ws / "sph3.vfld"),
                   "--level", "0.8", "--report", str(rep))
    assert rc == 0
    doc = json.loads(rep.read_text())
    assert doc["verdict"] == "pass" and doc["result"]["spherical"]
    assert np.allclose(doc["result"]["center_estimate"], (0.1, 0.0, -0.05),
                       atol=3 * 3 / 32)

    rc, _, _ = run(capsys, "umbilic", str(ws / "ell3.vfld"),
                   "--level", "0.35", "--tol", "0.02", "--report", str(rep))
    assert rc == 1
    assert json.loads(rep.read_text())["verdict"] == "fail"


def test_degree_report(ws, tmp_path, capsys):
    rep = tmp_path / "d.json"
    rc, _, _ = run(capsys, "degree", str(ws / "v2.vfld"),
                   "--center", "0,0", "--radius", "0.6", "--report", str(rep))
    assert rc == 0
    res = json.loads(rep.read_text())["result"]
    assert res["degree"] == 1 and res["defect"] <= 0.05


# ------------------------------------------------------------ energy/reduce


def test_energy_sweep_csv(ws, tmp_path, capsys):
    rep, csv = tmp_path / "e.json", tmp_path / "sweep.csv"
    rc, _, _ = run(capsys, "energy", str(ws / "reg2.vfld"),
                   "--eps", "0.2,0.1", "--csv", str(csv),
                   "--report", str(rep))
    assert rc == 0
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "eps,dirichlet,penalty,curl_term,total"
    totals = [float(l.split(",")[-1]) for l in lines[1:]]
    assert len(totals) == 2 and totals[0] > totals[1]
    rows = json.loads(rep.read_text())["result"]
    assert [r["eps"] for r in rows] == [0.2, 0.1]


def test_reduce_classify_stream_form(ws, tmp_path, capsys):
    rep, out = tmp_path / "red.json", tmp_path / "red3.vfld"
    # --stream-tol implies --classify
    rc, _, _ = run(capsys, "reduce", str(ws / "vl4.vfld"),
                   "--stream-tol", "1e-4", "--out", str(out),
                   "--report", str(rep))
    assert rc == 0
    doc = json.loads(rep.read_text())
    assert doc["verdict"] == "pass"
    res = doc["result"]
    assert res["classification"]["tag"] == "Vortex"
    assert res["stream_form"]["deviation"] <= 1e-4
    assert res["degenerate_nodes"] == 0
    red = read_vfld(out)
    assert red.grid.dim == 3
    assert red.vector_field().unit


# ------------------------------------------------------------------ reports


def test_report_bundle_aggregates_verdicts(ws, tmp_path, capsys):
    bundle = tmp_path / "bundle"
    bundle.mkdir()
    rc, _, _ = run(capsys, "residual", str(ws / "vl3.vfld"), "--count", "48",
                   "--tangents", "2", "--xi", "1,0,1",
                   "--phi", "0,2.2,0,0.7", "--phi", "0,3.0,0.6,0.45",
                   "--phi-count", "2", "--report", str(bundle / "full.json"))
    assert rc == 1
    rc, _, _ = run(capsys, "weak", str(ws / "vl3.vfld"), "--count", "32",
                   "--phi", "0,2.2,0,0.7", "--phi", "0,3.0,0.6,0.45",
                   "--phi-count", "2", "--report", str(bundle / "weak.json"))
    assert rc == 0
    (bundle / "notes.txt").write_text("ignored\n")

    rc, stdout, _ = run(capsys, "report", str(bundle))
    assert rc == 1
    doc = json.loads(stdout)
    assert doc["overall"] == "fail"
    verdicts = {e["file"]: e["verdict"] for e in doc["reports"]}
    assert verdicts == {"full.json": "fail", "weak.json": "pass"}

    # the summary skips its own output file when written into the directory
    rc, _, _ = run(capsys, "report", str(bundle),
                   "--out", str(bundle / "summary.json"))
    assert rc == 1
    doc = json.loads((bundle / "summary.json").read_text())
    assert len(doc["reports"]) == 2


def test_report_empty_directory_is_error(tmp_path, capsys):
    rc, _, err = run(capsys, "report", str(tmp_path))
    assert rc == 2 and err.startswith("error:")


# ------------------------------------------------------------------- errors


def test_missing_field_file_is_error(tmp_path, capsys):
    rc, _, err = run(capsys, "residual", str(tmp_path / "missing.vfld"))
    assert rc == 2 and err.startswith("error:")


def test_malformed_vfld_is_error(tmp_path, capsys):
    bad = tmp_path / "bad.vfld"
    bad.write_text("this is not a field\n")
    rc, _, err = run(capsys, "classify", str(bad))
    assert rc == 2 and "error:" in err


def test_unknown_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_bad_float_list_is_usage_error(ws, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["degree", str(ws / "v2.vfld"), "--center", "a,b",
                  "--radius", "0.5"])
    assert exc.value.code == 2


def test_energy_on_3d_field_is_error(ws, capsys):
    rc, _, err = run(capsys, "energy", str(ws / "v3.vfld"))
    assert rc == 2 and "2-d" in err
