"""Photon kinematics in the helicity representation.

Momentum-space states of a single photon, the transverse position
operator that acts on them, free evolution under H = |p|, and the
arrival-time statistics of a detector shell.  Everything is built on a
product quadrature grid in spherical momentum coordinates.
"""

from .sphgrid import MomentumGrid, build_grid
from .polarization import (
    HELICITIES,
    LEVI_CIVITA,
    PoleError,
    frame,
    helicity_matrix,
    pole_frame,
    polarization_vector,
    rotation_R,
    spin_matrix,
    to_helicity_rep,
    to_photon_frame,
    transverse_projector,
)
from .photon_state import (
    HelicityAmplitude,
    NormLeakError,
    PositionSamples,
    StateSpec,
    TransversalityError,
    VectorAmplitude,
    coordinate_wavefunction,
    from_spec,
    from_vector,
    inner,
    load_state,
    localized_state,
    norm,
    probability_in_region,
    riemann_silberstein,
    save_state,
    to_position_rep,
    to_vector,
)
from .position_op import (
    AnalyticState,
    CommutatorReport,
    apply_position_helicity,
    apply_position_vector,
    commutator_check,
    covariant_derivative,
    expectation_position,
    gaussian_analytic,
    nabla_weighted,
    position_eigenfunction_residual,
)
from .dynamics import (
    EhrenfestReport,
    MaxwellReport,
    ehrenfest_check,
    energy_mean,
    evolve,
    helicity_transport_residual,
    k_char,
    maxwell_refinement,
    maxwell_residual,
    mean_direction,
    unitarity_energy_drift,
)
from .arrival import (
    ArrivalDensity,
    DetectedState,
    apply_time_operator,
    arrival_density,
    constraint_residual,
    detected_norm_sq,
    embed_detected,
    kernel_overlap,
    kernel_overlap_closed,
    mean_arrival_time,
    project_detected,
    radial_detected_amplitude,
    time_amplitude,
)

__version__ = "0.1.0"

__all__ = [
    "MomentumGrid", "build_grid",
    "HELICITIES", "LEVI_CIVITA", "PoleError", "frame", "helicity_matrix",
    "pole_frame", "polarization_vector", "rotation_R", "spin_matrix",
    "to_helicity_rep", "to_photon_frame", "transverse_projector",
    "HelicityAmplitude", "NormLeakError", "PositionSamples", "StateSpec",
    "TransversalityError", "VectorAmplitude", "coordinate_wavefunction",
    "from_spec", "from_vector", "inner", "load_state", "localized_state",
    "norm", "probability_in_region", "riemann_silberstein", "save_state",
    "to_position_rep", "to_vector",
    "AnalyticState", "CommutatorReport", "apply_position_helicity",
    "apply_position_vector", "commutator_check", "covariant_derivative",
    "expectation_position", "gaussian_analytic", "nabla_weighted",
    "position_eigenfunction_residual",
    "EhrenfestReport", "MaxwellReport", "ehrenfest_check", "energy_mean",
    "evolve", "helicity_transport_residual", "k_char", "maxwell_refinement",
    "maxwell_residual", "mean_direction", "unitarity_energy_drift",
    "ArrivalDensity", "DetectedState", "apply_time_operator",
    "arrival_density", "constraint_residual", "detected_norm_sq",
    "embed_detected", "kernel_overlap", "kernel_overlap_closed",
    "mean_arrival_time", "project_detected", "radial_detected_amplitude",
    "time_amplitude",
    "__version__",
]
