"""Scan half-sphere moment errors against node count and scheme.

Prints one table per (dimension, scheme): the worst-entry error of the
first half-sphere moment against V_{N-1} n and of the equatorial second
moment against H^{N-2}(S^{N-2}) / (2 (N-1)) Id, as the node count grows.
Useful for picking quadrature sizes before a long residual run.
"""

import argparse

import numpy as np

from eikinetic import (build_directions, half_sphere_first_moment,
                       half_sphere_second_moment, sphere_area,
                       unit_ball_volume)


def moment_errors(dim, count, scheme, seed):
    n = np.zeros(dim)
    n[-1] = 1.0
    ds = build_directions(dim, count, scheme, seed=seed)
    first = np.abs(half_sphere_first_moment(ds, n)
                   - unit_ball_volume(dim - 1) * n).max()
    if dim == 2:          # the equator of a circle is not a quadrature set
        return first, None
    exact2 = sphere_area(dim - 1) / (2.0 * (dim - 1)) * np.eye(dim - 1)
    second = np.abs(half_sphere_second_moment(ds, n) - exact2).max()
    return first, second


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--counts", type=int, nargs="+",
                    default=[500, 2_000, 8_000, 32_000])
    ap.add_argument("--seed", type=int, default=0,
                    help="seed for monte-carlo schemes")
    args = ap.parse_args(argv)

    combos = [(2, "uniform-angle"), (2, "monte-carlo"),
              (3, "fibonacci"), (3, "monte-carlo"), (4, "monte-carlo")]
    for dim, scheme in combos:
        print(f"\nN={dim} {scheme}")
        print(f"{'count':>8} {'first moment':>14} {'second moment':>14}")
        for count in args.counts:
            seed = args.seed if scheme == "monte-carlo" else None
            first, second = moment_errors(dim, count, scheme, seed)
            tail = "             -" if second is None else f"{second:>14.3e}"
            print(f"{count:>8} {first:>14.3e} {tail}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
