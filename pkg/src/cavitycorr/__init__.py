"""Exact non-Markovian dynamics of a cavity mode in a structured reservoir with correlated initial states."""
from .correlations import (
    BeamSplitterThermal,
    CorrelationFunctions,
    SqueezedVacuumCorrelated,
    UncorrelatedThermal,
    correlation_functions,
    discrete_mode_correlations,
    initial_chain_moments,
)
from .errors import (
    CavityCorrError,
    ConfigError,
    GridMismatchError,
    QuadratureError,
    SingularGeneratorError,
    StepRejectedError,
    TruncationError,
    ValidityWindowError,
)
from .observables import ObservableTrajectory, covariance_matrix, evolve_observables, squeezing_decomposition
from .oracle import ChainHamiltonian, GaussianMoments, oracle_F, oracle_moments, oracle_u
from .propagator import ConvolutionSeries, PropagatorSolution, compute_F, logarithmic_derivative, solve_u
from .reservoir import (
    Crow,
    DiscreteModes,
    KernelSeries,
    Tabulated,
    TimeGrid,
    crow_spectral_density,
    f_kernel,
    memory_kernel,
    thermal_kernel,
)
from .scenario import ScenarioConfig, compare_with_uncorrelated, preset, run_scenario
from .tcl import (
    FockDensityMatrix,
    MasterEqCoefficients,
    extract_coefficients,
    fock_evolve,
    moment_ode_residuals,
)

__version__ = "0.1.0"
