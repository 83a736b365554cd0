"""Space-periodic static vacuum solitons from rod diagrams.

Construction by renormalized Green's-function superposition, conical
singularity balancing, and numerical verification of the claimed geometry:
Ricci flatness, Kasner asymptotics, homology flux, holonomy genericity, and
the Wick-rotation duality with black-hole solutions.
"""

from .balance import (DefectReport, angle_defect, balance_constants,
                      balance_solution, compute_defects, defect_constancy)
from .curvature import (CurvatureFrame, MetricFrame, curvature_components,
                        curvature_endomorphisms, fd_ricci_max, fd_riemann_lowered,
                        flux_formula, holonomy_rank, homology_flux, metric_at,
                        ricci_residual)
from .errors import (AccuracyError, CornerEvaluationError, InputError,
                     SingularPointError, UnbalanceableError, UnsupportedStructureError,
                     WeylrodsError)
from .asymptotics import (BlackHoleSolution, KasnerData, KasnerFit,
                          far_field_gauge, kasner_from_amplitudes, verify_kasner,
                          wick_ricci_check, wick_rotate)
from .potentials import (ChargedInterval, FarFieldFit, PotentialSet, far_field_fit,
                         green_log, green_log_grad, green_log_hessian,
                         laplacian_residual)
from .quadrature import AlphaField
from .rods import (Rod, RodDiagram, RodStructure, SymmetryDescriptor, TopologyLabel,
                   ValidationReport, basis_structure, classify_slice_topology, det2,
                   detect_reflection_symmetry, diagram_from_families,
                   equal_rod_diagram, full_axis_diagram, horizon_topology, validate)
from .solution import SolitonSolution, build_solution

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "AlphaField", "BlackHoleSolution", "ChargedInterval",
    "CornerEvaluationError", "CurvatureFrame", "DefectReport", "FarFieldFit",
    "InputError", "KasnerData", "KasnerFit", "MetricFrame", "PotentialSet",
    "Rod", "RodDiagram", "RodStructure", "SingularPointError", "SolitonSolution",
    "SymmetryDescriptor", "TopologyLabel", "UnbalanceableError",
    "UnsupportedStructureError", "ValidationReport", "WeylrodsError",
    "angle_defect", "balance_constants", "balance_solution", "basis_structure",
    "build_solution", "classify_slice_topology", "compute_defects",
    "curvature_components", "curvature_endomorphisms", "defect_constancy",
    "det2", "detect_reflection_symmetry", "diagram_from_families",
    "far_field_gauge",
    "equal_rod_diagram", "far_field_fit", "fd_ricci_max", "fd_riemann_lowered",
    "flux_formula", "full_axis_diagram", "green_log", "green_log_grad",
    "green_log_hessian", "holonomy_rank", "homology_flux", "horizon_topology",
    "kasner_from_amplitudes", "laplacian_residual", "metric_at", "ricci_residual",
    "validate", "verify_kasner", "wick_ricci_check", "wick_rotate",
]
