"""Exact constrained-dynamics algebra and radial spectroscopy for a planar
magnetic dipole in radial electric fields.

The package has four layers:

* ``phase_space`` / ``parsing``: exact rational phase-space expressions,
  Poisson and Dirac brackets, constraint classification, quadratic
  quantization, and a round-trip text grammar;
* ``model``: the physical model (fields, kinetic momenta, Hamiltonian,
  constraints, radial reduction, the dual charged model, parameter files);
* ``radial``: deterministic finite-difference eigensolver with a
  sector-aware extrapolation ladder;
* ``angular`` / ``cli``: angular-momentum ladders, guiding-center and
  duality reports, and the batch command line.
"""

from .parsing import ParseError, format_expr, parse_expr
from .phase_space import (
    BracketError,
    ConstraintSystem,
    OscillatorSpectrum,
    PhaseSpaceExpr,
    QuantizeError,
    Term,
    build_constraint_system,
    dirac_bracket,
    poisson_bracket,
    quantize_quadratic,
)
from .model import (
    ZeroDensityRegimeError,
    DualChargedParams,
    ExactScalar,
    ModelParams,
    build_constraints,
    build_dual_charged_model,
    build_hamiltonian,
    effective_vector_potential,
    electric_field,
    kinetic_momenta,
    load_params,
    parse_params_text,
    parse_scalar,
    radial_effective_potential,
    twin_radial_potential,
)
from .radial import (
    C_BOUNDARY,
    ConvergenceError,
    EigenResult,
    RadialGrid,
    RadialProblem,
    TridiagonalSystem,
    converge,
    converge_problem,
    convergence_slope,
    discretize,
    eigen_lowest,
    expectation,
)
from .angular import (
    AngularReport,
    DualityReport,
    LadderRule,
    angular_report,
    kinetic_j_shift,
    canonical_j_rule,
    duality_report,
    guiding_center_check,
    guiding_center_coordinates,
    kinetic_j_numeric_check,
    kinetic_j_spectrum,
    reduced_j_observable,
    reduced_j_spectrum,
    report_json_dict,
    topological_phases,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # parsing
    "ParseError",
    "format_expr",
    "parse_expr",
    # phase space
    "BracketError",
    "ConstraintSystem",
    "OscillatorSpectrum",
    "PhaseSpaceExpr",
    "QuantizeError",
    "Term",
    "build_constraint_system",
    "dirac_bracket",
    "poisson_bracket",
    "quantize_quadratic",
    # model
    "ZeroDensityRegimeError",
    "DualChargedParams",
    "ExactScalar",
    "ModelParams",
    "build_constraints",
    "build_dual_charged_model",
    "build_hamiltonian",
    "effective_vector_potential",
    "electric_field",
    "kinetic_momenta",
    "load_params",
    "parse_params_text",
    "parse_scalar",
    "radial_effective_potential",
    "twin_radial_potential",
    # radial
    "C_BOUNDARY",
    "ConvergenceError",
    "EigenResult",
    "RadialGrid",
    "RadialProblem",
    "TridiagonalSystem",
    "converge",
    "converge_problem",
    "convergence_slope",
    "discretize",
    "eigen_lowest",
    "expectation",
    # angular
    "AngularReport",
    "DualityReport",
    "LadderRule",
    "angular_report",
    "kinetic_j_shift",
    "canonical_j_rule",
    "duality_report",
    "guiding_center_check",
    "guiding_center_coordinates",
    "kinetic_j_numeric_check",
    "kinetic_j_spectrum",
    "reduced_j_observable",
    "reduced_j_spectrum",
    "report_json_dict",
    "topological_phases",
]
