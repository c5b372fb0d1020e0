"""Split-step Fourier solvers for periodic Schroedinger dynamics.

Spectral grids and norms, exact sub-flows, Lie/Strang/fourth-order
compositions, a non-resonance step-size toolkit, and an experiment
harness measuring long-time error growth and scaling.
"""

__version__ = "0.1.0"

from .backend import BACKEND_NAME, get_kernels
from .errors import (
    ConfigError,
    DegenerateFit,
    DegenerateInterval,
    EigendecompositionFailure,
    GridIncompatible,
    NoAdmissibleStepInRadius,
    NonconvergentSeries,
    NonFiniteField,
    OddPointCount,
    OracleScaleExceeded,
    ShapeMismatch,
    SplitwaveError,
    TimeAlignmentError,
    TimeMismatch,
    UnsupportedDimension,
)
from .flows import (
    NonlinearitySpec,
    PotentialSpec,
    dense_hamiltonian,
    exact_linear_evolve,
    free_flow,
    nonlinear_flow,
    phase_table,
    potential_flow,
)
from .grid import (
    Grid,
    SobolevIndex,
    SpectralField,
    dft_forward,
    dft_inverse,
    l2_discrete_norm,
    make_grid,
    project,
    sample_field,
    sobolev_norm,
)
from .harness import (
    ErrorSeries,
    ReferenceSolution,
    SlopeFit,
    SnapshotRecorder,
    error_series,
    experiment_convergence,
    experiment_eps_scaling,
    experiment_error_growth,
    experiment_twist,
    extend_coeffs,
    fit_line,
    fit_slope,
    local_error_probe,
    reference_run,
    restrict_coeffs,
    twist_diagnostic,
)
from .integrators import (
    ProblemSpec,
    SchemeSpec,
    evolve,
    lie_step,
    lie_step_adjoint,
    linear_problem,
    nlse_problem,
    order4_step,
    strang_step,
)
from .stepsize import (
    StepRule,
    certify_nonres,
    check_diophantine,
    check_small_step,
    diophantine_mask,
    excluded_intervals,
    lambda_const,
    min_gap,
    small_step_bound,
    small_step_certificate,
    suggest_step,
    zeta_series,
)
