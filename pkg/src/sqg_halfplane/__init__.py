"""Pseudo-spectral critical SQG on the half-plane with Dirichlet boundary data."""
from .analysis import (
    AnalyticityReport,
    EstimateReport,
    analyticity_diagnostic,
    holder_seminorm,
    run_battery,
    time_derivative,
    verify_bilinear,
    verify_maximal_regularity,
    verify_smoothing,
)
from .calculus import (
    BesovParams,
    DyadicPartition,
    apply_multiplier,
    besov_norm,
    frac_lambda,
    lp_block,
    make_partition,
    partition_for_grid,
    semigroup,
    velocity,
)
from .grid import (
    ExtendedField,
    Field,
    GridMismatchError,
    GridSpec,
    Spectrum,
    even_extend,
    forward_transform,
    inverse_transform,
    odd_extend,
    restrict,
)
from .presets import preset
from .solver import (
    NumericalFailure,
    PicardResult,
    SolverConfig,
    Trajectory,
    bilinear_form,
    mild_rhs,
    nonlinear_term,
    picard_solve,
    simulate,
    step_evolve,
)

__version__ = "0.1.0"
