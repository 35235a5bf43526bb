"""Probabilistic Adams-Bashforth / Adams-Moulton integrators from a Gaussian-process prior."""
from .coeffs import (
    ab_coefficients,
    ab_next_order_identity,
    am_coefficients,
    bd_coefficients,
    error_constant,
    scheme_table,
    truncation_constant,
)
from .experiments import (
    attractor_amplitude,
    chaos_divergence_study,
    divergence_time,
    run_convergence,
    run_ensemble,
    write_convergence,
    write_ensemble,
)
from .gpcond import (
    ConditionalLaw,
    PriorMatrix,
    build_prior,
    condition,
    condition_float,
    conditional_law,
    verify_propositions,
)
from .models import MODELS, ModelSpec, get_model, register_model
from .polybasis import (
    BasisSet,
    Family,
    Polynomial,
    build_basis,
    format_polynomial,
    integrate_01,
    lagrange_basis,
)
from .solver import (
    AlphaMode,
    DivergenceError,
    OdeSystem,
    Scheme,
    SolverConfig,
    StepperState,
    Trajectory,
    estimate_alpha,
    rk_init,
    solve,
    solve_ensemble,
    step_ab,
    step_am_pc,
)

__version__ = "0.1.0"
