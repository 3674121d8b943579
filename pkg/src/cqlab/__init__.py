"""Numerical laboratory for phase-space dynamics and its wave-equation limit.

The package wires together four layers:

- ``core``: periodic grids, spectral calculus, physical parameters;
- ``classical``: q- and p-family pure states, particle ensembles, characteristics;
- ``bridge``: polar-form wavefunction map, internal-noise scalar, gauge tools;
- ``quantum``/``wigner``/``observables``: split-step propagation, phase-space
  transforms, and expectation values on either side of the map.

``scenarios`` runs TOML-configured experiments; ``acceptance`` holds the
numbered release checks behind ``cqlab accept``.
"""

__version__ = "0.1.0"

from .bridge import (
    GaugeFunction,
    WaveFunction,
    averaged_lagrangian,
    averaged_lagrangian_psi,
    covariant_gradient,
    gauge_transform,
    madelung_forward,
    madelung_forward_p,
    madelung_inverse,
    madelung_inverse_p,
    second_moment_tensor,
    sigma_squared,
)
from .classical import (
    ActionField,
    ParticleEnsemble,
    PStochasticState,
    QStochasticState,
    TrajectoryBundle,
    action_time_stencil,
    classical_trajectories,
    evolve_p_state,
    evolve_q_state,
    hj_time_derivative,
    lagrangian_density,
    liouville_evolve_ensemble,
    normalized_density,
    sample_ensemble_from_state,
)
from .config import ScenarioConfig, load_config, parse_config
from .core import (
    ComplexField,
    GridSpec,
    PhysicalParams,
    RealField,
    fourier_shift,
    from_momentum_space,
    integrate,
    spectral_gradient,
    spectral_laplacian,
    to_momentum_space,
)
from .errors import (
    CausticError,
    CoverageError,
    NonConvergenceError,
    PhaseNodeError,
    UnsupportedObservableError,
    UnsupportedPotentialError,
    ValidationError,
    VortexError,
    ZeroCaptureError,
)
from .observables import (
    DensityMatrix,
    MarginalPair,
    Observable,
    collapse_classical,
    collapse_quantum,
    ehrenfest_check,
    expect_classical,
    expect_classical_p,
    expect_ensemble,
    expect_quantum,
    heisenberg_product_classical,
    heisenberg_product_quantum,
    kinetic_momentum_classical,
    kinetic_momentum_quantum,
    marginals_classical,
    marginals_classical_p,
    marginals_ensemble,
    marginals_quantum,
    mixture_expectation,
    variance_classical,
    variance_quantum,
)
from .potentials import PotentialSpec
from .quantum import (
    classical_wave_residual,
    nlse_residual,
    nonlinear_coupling,
    split_step_propagate,
    stationary_state,
    wavefunction_time_stencil,
)
from .wigner import (
    WignerField,
    compatibility_residual,
    wigner_transform,
    xi_expansion_check,
)

__all__ = [
    "__version__",
    # core
    "GridSpec",
    "PhysicalParams",
    "RealField",
    "ComplexField",
    "integrate",
    "spectral_gradient",
    "spectral_laplacian",
    "fourier_shift",
    "to_momentum_space",
    "from_momentum_space",
    # potentials
    "PotentialSpec",
    # classical
    "ActionField",
    "QStochasticState",
    "PStochasticState",
    "ParticleEnsemble",
    "TrajectoryBundle",
    "evolve_q_state",
    "evolve_p_state",
    "liouville_evolve_ensemble",
    "sample_ensemble_from_state",
    "classical_trajectories",
    "normalized_density",
    "lagrangian_density",
    "hj_time_derivative",
    "action_time_stencil",
    # bridge
    "WaveFunction",
    "madelung_forward",
    "madelung_forward_p",
    "madelung_inverse",
    "madelung_inverse_p",
    "sigma_squared",
    "second_moment_tensor",
    "averaged_lagrangian",
    "averaged_lagrangian_psi",
    "covariant_gradient",
    "GaugeFunction",
    "gauge_transform",
    # quantum
    "split_step_propagate",
    "stationary_state",
    "nlse_residual",
    "classical_wave_residual",
    "wavefunction_time_stencil",
    "nonlinear_coupling",
    # observables
    "Observable",
    "expect_classical",
    "expect_classical_p",
    "expect_quantum",
    "expect_ensemble",
    "variance_classical",
    "variance_quantum",
    "heisenberg_product_classical",
    "heisenberg_product_quantum",
    "kinetic_momentum_classical",
    "kinetic_momentum_quantum",
    "ehrenfest_check",
    "DensityMatrix",
    "mixture_expectation",
    "MarginalPair",
    "marginals_classical",
    "marginals_classical_p",
    "marginals_quantum",
    "marginals_ensemble",
    "collapse_classical",
    "collapse_quantum",
    # wigner
    "WignerField",
    "wigner_transform",
    "compatibility_residual",
    "xi_expansion_check",
    # config / scenarios
    "ScenarioConfig",
    "parse_config",
    "load_config",
    # errors
    "ValidationError",
    "CausticError",
    "PhaseNodeError",
    "VortexError",
    "NonConvergenceError",
    "UnsupportedPotentialError",
    "UnsupportedObservableError",
    "CoverageError",
    "ZeroCaptureError",
]
