"""Odd-symmetric split-step laboratory for the 1-D defocusing
inhomogeneous NLS ``i u_t + u_xx = |x|^{-b} |u|^alpha u``."""
from .domain import (
    DomainError,
    Grid,
    InitialSpec,
    PhysParams,
    ScatteringRegimeWarning,
    State,
    make_grid,
    make_params,
    sample_initial,
)
from .transform import (
    SpectralState,
    free_propagate,
    from_spectral,
    sobolev_norm,
    to_spectral,
)
from .nonlinear import PotentialWeights, phase_step, potential_energy, potential_weight
from .observables import (
    AdmissiblePair,
    ObservableSample,
    admissible_pairs,
    energy,
    local_norms,
    mass,
    morawetz,
    observe,
    strichartz_norm,
)
from .integrator import (
    NumericalFault,
    Schedule,
    Trajectory,
    convergence_order,
    convergence_study,
    evolve,
    strang_step,
)

__version__ = "0.1.0"
