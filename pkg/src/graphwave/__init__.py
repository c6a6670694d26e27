"""graphwave: wave equations on metric graphs with local Kelvin-Voigt damping.

A numpy/scipy laboratory for damped wave networks: build metric trees and
graphs of strings, validate the damping-placement hypotheses, assemble P1
finite-element systems with the transmission conditions built in, integrate
in time with an energy-exact Crank-Nicolson scheme, and probe stability
through the quadratic eigenvalue pencil and energy-norm resolvent scans.
"""

__version__ = "0.1.0"

from .config import NetworkSpec, load_network
from .damping import (
    ContinuityReport,
    DampingProfile,
    PropertyReport,
    check_property_P,
    classify_continuity,
)
from .errors import GraphWaveError
from .fem import (
    DiscreteSystem,
    GeneratorAction,
    Mesh,
    WellPosedness,
    assemble,
    build_mesh,
    check_generator_wellposed,
    dump_matrices,
    generator,
    operator_norm_estimate,
)
from .graph import (
    Edge,
    IncidenceMatrix,
    MetricGraph,
    ValidationReport,
    adjacent_edges,
    build_graph,
    incidence_matrix,
    interior_vertices,
    validate_structure,
)
from .simulate import (
    CrankNicolson,
    DecayFit,
    EnergyTrace,
    State,
    check_dissipation,
    default_dt,
    fit_exponential,
    fit_power,
    initial_state,
    modal_initial_state,
    run,
    step,
)
from .spectral import (
    ResolventScan,
    SpectrumResult,
    StabilityVerdict,
    classify_stability,
    eigenvalues,
    resolved_band_limit,
    resolvent_norm,
    resolvent_scan,
)

__all__ = [
    "__version__",
    "NetworkSpec",
    "load_network",
    "DampingProfile",
    "PropertyReport",
    "ContinuityReport",
    "check_property_P",
    "classify_continuity",
    "GraphWaveError",
    "MetricGraph",
    "Edge",
    "IncidenceMatrix",
    "ValidationReport",
    "build_graph",
    "incidence_matrix",
    "interior_vertices",
    "adjacent_edges",
    "validate_structure",
    "Mesh",
    "DiscreteSystem",
    "GeneratorAction",
    "WellPosedness",
    "build_mesh",
    "assemble",
    "generator",
    "check_generator_wellposed",
    "operator_norm_estimate",
    "dump_matrices",
    "State",
    "EnergyTrace",
    "DecayFit",
    "CrankNicolson",
    "initial_state",
    "modal_initial_state",
    "default_dt",
    "step",
    "run",
    "check_dissipation",
    "fit_exponential",
    "fit_power",
    "SpectrumResult",
    "ResolventScan",
    "StabilityVerdict",
    "eigenvalues",
    "resolvent_norm",
    "resolvent_scan",
    "resolved_band_limit",
    "classify_stability",
]
