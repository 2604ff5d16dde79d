"""Structure-preserving 1D finite-volume solver for nonisothermal
Maxwell-Stefan gas mixtures (mass diffusion + heat conduction, zero
barycentric velocity).

The solver works in entropy variables, so positivity of densities and
temperature is structural, and its conservation, entropy-dissipation, and
Onsager-positivity properties are runtime-checkable invariants rather than
aspirations.
"""

__version__ = "0.1.0"

from .constitutive import (LocalEntropyVars, LocalState, MixtureParams,
                           chemical_potential, driving_force, entropy_density,
                           entropy_vars_from_state, free_energy,
                           internal_energy, partial_pressure,
                           state_from_entropy_vars, total_pressure)
from .diagnostics import (DiagnosticsRecord, entropy_inequality_check,
                          relative_entropy, total_entropy,
                          weak_strong_experiment)
from .errors import (ConfigError, MsntError, SingularMSMatrixError,
                     StateRecoveryError, StepFailed, ValidationError)
from .grid1d import Grid, apply_boundary, divergence, face_gradient
from .msalgebra import (MSLocal, bott_duffin, build_M, flux_energy, flux_mass,
                        ms_local, onsager, projections, velocities)
from .stepper import (StepConfig, TrajectoryState, initial_state, jacobian,
                      residual, simulate, step)

__all__ = [
    "__version__",
    "MixtureParams", "LocalState", "LocalEntropyVars",
    "chemical_potential", "entropy_density", "internal_energy",
    "partial_pressure", "total_pressure", "driving_force", "free_energy",
    "entropy_vars_from_state", "state_from_entropy_vars",
    "MSLocal", "build_M", "projections", "bott_duffin", "ms_local",
    "velocities", "onsager", "flux_mass", "flux_energy",
    "Grid", "face_gradient", "divergence", "apply_boundary",
    "StepConfig", "TrajectoryState", "initial_state", "residual", "jacobian",
    "step", "simulate",
    "DiagnosticsRecord", "total_entropy", "relative_entropy",
    "entropy_inequality_check", "weak_strong_experiment",
    "MsntError", "ValidationError", "ConfigError", "StateRecoveryError",
    "SingularMSMatrixError", "StepFailed",
]
