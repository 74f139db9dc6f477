"""Measured tolerances.

Residual verdicts are judged against what the same discretization produces
on fields known to satisfy the identity being tested: a constant field and
point vortices (one centered between nodes, one on the box center).  The
verdict threshold is 3x the worst residual those references produce; a
field is flagged "fail" only beyond 10x the threshold, leaving a decade of
separation between discretization noise and genuine defects.
"""

from __future__ import annotations

import numpy as np

from eikinetic.directions import ConfigurationError
from eikinetic.fields import GridSpec, VectorField

#: |u'| floor below which the axis reduction refuses to normalize.
REDUCTION_FLOOR = 1e-6

#: relative tolerance on | |u|-1 | for unit-norm field construction.
UNIT_NORM_TOL = 1e-12

#: verdict multiplier: tolerance = CALIBRATION_FACTOR * worst reference entry.
CALIBRATION_FACTOR = 3.0

_CONSTANT_DIRECTION = {
    2: (3.0, 1.0),
    3: (3.0, 1.0, -2.0),
    4: (3.0, 1.0, -2.0, 0.5),
}


def reference_fields(grid: GridSpec) -> list[VectorField]:
    """Known-pass fields on ``grid``: a constant field in a generic
    direction plus two point vortices (centered on the box midpoint and at a
    0.371-spacing offset, to cover both node-aligned and generic indicator
    boundaries)."""
    from eikinetic.generators import gen_constant, gen_vortex

    w = np.asarray(_CONSTANT_DIRECTION[grid.dim], dtype=float)
    mid = 0.5 * (np.asarray(grid.lo) + np.asarray(grid.hi))
    off = mid + 0.371 * np.asarray(grid.spacing)
    return [
        gen_constant(grid, w),
        gen_vortex(grid, mid),
        gen_vortex(grid, off),
    ]


def residual_tolerance(grid: GridSpec, measure) -> float:
    """3x the worst value of ``measure`` over the reference fields.

    ``measure`` maps a reference field to its max |residual| (or None when
    none of the test functions fit inside the reference's valid region —
    references whose vortex core collides with every bump are skipped).
    """
    worst = None
    for ref in reference_fields(grid):
        val = measure(ref)
        if val is None:
            continue
        worst = val if worst is None else max(worst, val)
    if worst is None:
        raise ConfigurationError(
            "no reference field admits the given test functions; cannot "
            "calibrate a verdict tolerance"
        )
    return max(CALIBRATION_FACTOR * float(worst), 1e-14)
