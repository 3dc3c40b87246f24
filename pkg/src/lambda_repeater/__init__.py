"""Entanglement swapping between Lambda-type atoms in two-mode cavities.

Qutrit registers, the dispersive pair dynamics, the two-stage swap protocol,
negativity and success probability, a cavity-model cross-check and a sweep CLI.
"""
from .dynamics import (
    ModelParams,
    PairPropagator,
    apply_pair_propagator,
    build_effective_hamiltonian,
    effective_rate,
    pair_propagator,
    pair_propagator_expm,
)
from .errors import (
    CapacityError,
    ConfigError,
    ConvergenceFailure,
    DegenerateDenominatorError,
    NotNormalizedError,
    UnknownFigureError,
    ZeroNormError,
)
from .expm import matrix_exponential
from .full_model import ComparisonReport, FullParams, FullRegister, compare_effective, evolve_full
from .measures import (
    MeasureReport,
    negativity_partial_transpose,
    negativity_sector,
    partial_transpose,
    pure_state_negativity,
    success_probability,
)
from .protocol import (
    BranchSet,
    FinalPair,
    StageOneOutcome,
    SwapCase,
    closed_form_branches,
    initial_bell_pair,
    run_protocol,
    stabilized_negativity,
    stage_one_coefficients,
    stage_one_measure,
    stage_one_state,
    stage_two_coefficients,
    stage_two_measure,
    stage_two_state,
)
from .registers import (
    CONVENTION,
    DensityMatrix,
    QutritRegister,
    normalize,
    outcomes,
    permute_atoms,
    project_levels,
    reduced_density,
    tensor_product,
)
from .sweep import SeriesOutput, SweepConfig, load_config, reproduce_figure, run_sweep
from .validation import validate

__version__ = "0.1.0"
