"""End-to-end demonstration of the command-line verification pipeline.

Generates the three reference fields (radial vortex, constant, planar
vortex-line on a box avoiding its singular axis), runs the full and
equatorial kinetic residuals plus classification on each, and bundles the
JSON reports into one summary.  The expected outcome is overall "fail":
the vortex-line passes the equatorial check but fails the full one.
"""

import argparse
import json
import os

from eikinetic import cli


def run(*argv) -> int:
    print("$ eikinetic " + " ".join(argv))
    return cli.main(list(argv))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="pipeline-out")
    ap.add_argument("--shape", type=int, default=33, help="nodes per axis")
    ap.add_argument("--count", type=int, default=64,
                    help="direction count for the residual checks")
    args = ap.parse_args(argv)

    out = args.outdir
    os.makedirs(out, exist_ok=True)
    j = lambda name: os.path.join(out, name)

    run("generate", "--kind", "vortex", "--dim", "3",
        "--shape", str(args.shape), "--out", j("vortex.vfld"))
    run("generate", "--kind", "constant", "--dim", "3",
        "--shape", str(args.shape), "--direction", "3,1,-2",
        "--out", j("constant.vfld"))
    run("generate", "--kind", "vortex-line", "--dim", "3",
        "--shape", str(args.shape), "--origin=-1.5,1.0,-1.5",
        "--axis-point", "0,0,0", "--out", j("vortex-line.vfld"))

    for name in ("vortex", "constant"):
        run("residual", j(f"{name}.vfld"), "--count", str(args.count),
            "--tangents", "2", "--phi-count", "8", "--phi-radius", "0.42",
            "--report", j(f"residual-{name}.json"))
        run("classify", j(f"{name}.vfld"),
            "--report", j(f"classify-{name}.json"))

    straddle = ["--phi", "0,2.2,0,0.7", "--phi", "0,3.0,0.6,0.45",
                "--phi-count", "2"]
    run("residual", j("vortex-line.vfld"), "--count", str(args.count),
        "--tangents", "2", "--xi", "1,0,1", *straddle,
        "--report", j("residual-vortex-line.json"))
    run("weak", j("vortex-line.vfld"), "--count", str(args.count),
        *straddle, "--report", j("weak-vortex-line.json"))

    rc = run("report", out, "--out", j("summary.json"))
    with open(j("summary.json"), encoding="utf-8") as fh:
        summary = json.load(fh)
    print(f"\nbundled {len(summary['reports'])} reports, overall: "
          f"{summary['overall']} (exit {rc})")
    for entry in summary["reports"]:
        verdict = entry.get("verdict", "-")
        print(f"  {entry['file']:>28}  {entry['command']:>10}  {verdict}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
