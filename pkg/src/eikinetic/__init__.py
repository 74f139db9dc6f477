"""Numerical verification toolkit for unit-norm gradient vector fields.

Sampled fields on rectangular grids (dimensions 2-4) are checked against
the structure theory of eikonal stream functions: transport residuals of
half-space indicators, sphere-average reconstruction, ordering along
segments, traces on lines, umbilicity of level sets, vortex/constant
classification through characteristic-line geometry, topological degree,
axis reduction, and the line-energy functional with an H^-1 curl term.
"""

from eikinetic.directions import (ConfigurationError, DirectionSet,
                                  build_directions, equator_set,
                                  half_sphere_first_moment,
                                  half_sphere_second_moment, perp_basis,
                                  spanning_tangents, sphere_area,
                                  unit_ball_volume)
from eikinetic.fields import (GridSpec, KernelUnderresolvedError,
                              OutOfDomainError, ScalarField,
                              StencilUnavailableError, SupportViolationError,
                              TestFunction, VectorField, curl_residual,
                              gradient, halton_test_functions,
                              integrate_against, interpolate,
                              interpolate_many, mollify)
from eikinetic.generators import (fast_marching, gen_constant,
                                  gen_distance_field_2d,
                                  gen_ellipsoid_distance, gen_rotational_2d,
                                  gen_vortex, gen_vortex_line,
                                  polyline_distance)
from eikinetic.kinetic import (AveragingResult, Characteristic, ChiField,
                               EntropyReport, GeometryError, NearPoleError,
                               OrderingReport, ResidualEntry, ResidualReport,
                               StreamFormReport, TraceField,
                               averaging_reconstruct, characteristic_trace,
                               chi, curl_symmetry_check, dimensional_reduce,
                               entropy_residual_2d, kinetic_residual,
                               kinetic_residual_2d, ordering_check,
                               stream_form_check, trace_on_segment,
                               weak_kinetic_residual)
from eikinetic.geometry import (CriticalPointError, CurvatureReport,
                                DegenerateContourError, DegreeResult,
                                FieldClass, InsufficientSamplesError, Line,
                                LineFamilyClass, NoSamplesError,
                                ShapeOperatorResult, UmbilicReport,
                                classify_field, classify_line_family,
                                coplanar, jacobian_degree, level_curvature_2d,
                                lines_from_csv, menger_curvature,
                                shape_operator, umbilic_check)
from eikinetic.energy import (EnergyBreakdown, SolverError,
                              gen_regularized_vortex, gl_energy,
                              hminus1_norm_sq)
from eikinetic.vfld import VfldFile, VfldParseError, read_vfld, write_vfld

__version__ = "0.1.0"

__all__ = [
    "AveragingResult", "Characteristic", "ChiField", "ConfigurationError",
    "CriticalPointError", "CurvatureReport", "DegenerateContourError",
    "DegreeResult", "DirectionSet", "EnergyBreakdown", "EntropyReport",
    "FieldClass", "GeometryError", "GridSpec", "InsufficientSamplesError",
    "KernelUnderresolvedError", "Line", "LineFamilyClass", "NearPoleError",
    "NoSamplesError", "OrderingReport", "OutOfDomainError", "ResidualEntry",
    "ResidualReport", "ScalarField", "ShapeOperatorResult", "SolverError",
    "StencilUnavailableError", "StreamFormReport", "SupportViolationError",
    "TestFunction", "TraceField", "UmbilicReport", "VectorField", "VfldFile",
    "VfldParseError", "averaging_reconstruct", "build_directions",
    "characteristic_trace", "chi", "classify_field", "classify_line_family",
    "coplanar", "curl_residual", "curl_symmetry_check", "dimensional_reduce",
    "entropy_residual_2d", "equator_set", "fast_marching", "gen_constant",
    "gen_distance_field_2d", "gen_ellipsoid_distance",
    "gen_regularized_vortex", "gen_rotational_2d", "gen_vortex",
    "gen_vortex_line", "gl_energy", "gradient", "half_sphere_first_moment",
    "half_sphere_second_moment", "halton_test_functions", "hminus1_norm_sq",
    "integrate_against", "interpolate", "interpolate_many",
    "jacobian_degree", "kinetic_residual", "kinetic_residual_2d",
    "level_curvature_2d", "lines_from_csv", "menger_curvature", "mollify",
    "ordering_check", "perp_basis", "polyline_distance", "read_vfld",
    "shape_operator", "spanning_tangents", "sphere_area",
    "stream_form_check", "trace_on_segment", "umbilic_check",
    "unit_ball_volume", "weak_kinetic_residual", "write_vfld",
]
