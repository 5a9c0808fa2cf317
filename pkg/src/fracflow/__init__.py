"""Fractional mean curvature flow of entire Lipschitz graphs on uniform grids."""

from .kernel import (
    KernelParams,
    GsTable,
    build_gs_table,
    get_gs_table,
    gs_value,
    gs_prime,
    gs_infinity,
    sphere_area,
    unit_ball_curvature,
)
from .gridfield import (
    Periodic,
    Affine,
    Cone,
    GridFunction,
    from_callable,
    evaluate,
    gradient,
    gradient_field,
    lipschitz_constant,
    oscillation,
    save_gridfunction,
    load_gridfunction,
)
from .curvature import (
    QuadratureConfig,
    CurvatureField,
    hs_at,
    hs_field,
    hs_at_kernel_form,
    tail_contribution,
    lattice_weight_total,
)
from .flow import (
    StepControl,
    FlowState,
    Trajectory,
    stable_dt,
    step,
    evolve,
    time_rescale,
    inverse_time_rescale,
    to_rescaled,
    from_rescaled,
)
from .selfsimilar import (
    ConvergenceError,
    ExpanderProfile,
    ShrinkerScan,
    expander_residual,
    shrinker_residual,
    solve_expander,
    scan_shrinker,
    homothety_check,
    save_expander_profile,
    load_expander_profile,
)
from .experiments import (
    SCENARIOS,
    ScenarioConfig,
    Verdict,
    graph_distance,
    decay_fit,
    holder_modulus,
    cached_expander,
    run_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "KernelParams",
    "GsTable",
    "build_gs_table",
    "get_gs_table",
    "gs_value",
    "gs_prime",
    "gs_infinity",
    "sphere_area",
    "unit_ball_curvature",
    "Periodic",
    "Affine",
    "Cone",
    "GridFunction",
    "from_callable",
    "evaluate",
    "gradient",
    "gradient_field",
    "lipschitz_constant",
    "oscillation",
    "save_gridfunction",
    "load_gridfunction",
    "QuadratureConfig",
    "CurvatureField",
    "hs_at",
    "hs_field",
    "hs_at_kernel_form",
    "tail_contribution",
    "lattice_weight_total",
    "StepControl",
    "FlowState",
    "Trajectory",
    "stable_dt",
    "step",
    "evolve",
    "time_rescale",
    "inverse_time_rescale",
    "to_rescaled",
    "from_rescaled",
    "ConvergenceError",
    "ExpanderProfile",
    "ShrinkerScan",
    "expander_residual",
    "shrinker_residual",
    "solve_expander",
    "scan_shrinker",
    "homothety_check",
    "save_expander_profile",
    "load_expander_profile",
    "SCENARIOS",
    "ScenarioConfig",
    "Verdict",
    "graph_distance",
    "decay_fit",
    "holder_modulus",
    "cached_expander",
    "run_scenario",
    "__version__",
]
