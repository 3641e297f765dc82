"""Simulation and competitive-modes analysis of asymmetric water wheels with
unsteady inflow."""

from .forcing import (
    Affine,
    Constant,
    Sinusoid,
    TanhStep,
    TimeFunction,
    eval_deriv,
    freeze,
    make_reference_forcings,
)
from .integrate import (
    BlowupError,
    IntegrationError,
    IntegratorOptions,
    StepUnderflowError,
    Trajectory,
    integrate,
    step_rk4,
)
from .models import (
    SCENARIOS,
    DimensionalParams,
    ModeParams,
    ReducedParams,
    dimensional_rhs,
    make_scenario,
    mode_rhs,
    reduced_divergence,
    reduced_rhs,
)

__version__ = "0.1.0"
