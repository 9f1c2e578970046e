"""Numerics for stiff connections on pseudo-Euclidean spaces.

Straight-line-geodesic connections with a quadratic potential: canonical
models, curvature, parallel transport and holonomy, geodesic time
parameterization, the isochrone conformal metric, and the two-dimensional
weakly stiff constructions.  The compiled integrator core is used when the
extension built; set STIFFGEO_PURE=1 to force the pure Python kernels.
"""

from .errors import DomainError, StiffgeoError
from .geodesics import (CompletenessVerdict, GeodesicLine, GeodesicSolution,
                        TravelTime, TriangleResult, completeness_verdict,
                        find_s0, reduce_line, solve_geodesic,
                        travel_time, triangle_experiment)
from .kernels import BACKEND
from .metrics import (ConformalMetric, comparison_table, curvature_forms,
                      flatten_lambda0, h_geodesic, levi_civita_h, metric_at,
                      scalar_curvature_h, vol_g, vol_h, volume_form_coeff)
from .models import (CanonicalModel, ClassificationResult, classify, contains,
                     domain_facts, format_model, interior_point, is_isomorphism,
                     parse_model, rescale, stiffness_check)
from .projconn import (AssociatedForm, QuadraticPotential, christoffel,
                       curvature, curvature_from_potential,
                       form_from_potential, incompressibility_report, ricci)
from .pseudospace import (AffineMap, Signature, classify_affine_map,
                          complete_orthonormal, inf_rotation_J,
                          infinitesimal_kind)
from .transport import (Arc, Polyline, RaySegment, TransportMap, circle_loop,
                        conjugate_rotation_angle, holonomy_loop,
                        infinitesimal_holonomy, path_arc, transport_arc,
                        transport_lightcone, transport_ode, transport_ray)
from .weakstiff2d import (CanonicalDiskModel, ExtendsPastBoundary, HatRealPair,
                          RationalComplexFn, conj_dichotomy, from_meromorphic,
                          from_pair_11, verify_weakstiff)

__version__ = "0.1.0"

__all__ = [
    "AffineMap", "Arc", "AssociatedForm", "BACKEND", "CanonicalDiskModel",
    "CanonicalModel", "ClassificationResult", "CompletenessVerdict",
    "ConformalMetric", "DomainError", "ExtendsPastBoundary", "GeodesicLine",
    "GeodesicSolution", "HatRealPair", "Polyline", "QuadraticPotential",
    "RationalComplexFn", "RaySegment", "Signature", "StiffgeoError",
    "TransportMap", "TravelTime", "TriangleResult", "christoffel",
    "circle_loop", "classify", "classify_affine_map", "comparison_table",
    "complete_orthonormal", "completeness_verdict", "conj_dichotomy",
    "conjugate_rotation_angle", "contains", "curvature",
    "curvature_from_potential", "curvature_forms", "domain_facts", "find_s0",
    "flatten_lambda0", "form_from_potential", "format_model",
    "from_meromorphic", "from_pair_11", "h_geodesic", "holonomy_loop",
    "incompressibility_report", "inf_rotation_J", "infinitesimal_holonomy",
    "infinitesimal_kind", "interior_point", "is_isomorphism", "levi_civita_h",
    "metric_at", "parse_model", "path_arc", "rescale", "reduce_line", "ricci",
    "scalar_curvature_h", "solve_geodesic", "stiffness_check", "transport_arc",
    "transport_lightcone", "transport_ode", "transport_ray", "travel_time",
    "triangle_experiment", "verify_weakstiff", "vol_g", "vol_h",
    "volume_form_coeff",
]
