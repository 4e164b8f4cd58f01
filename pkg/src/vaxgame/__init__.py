"""Coupled epidemic / vaccination-behavior / perceived-risk dynamics toolkit."""

from .dynamics import (
    FullState,
    ModelParams,
    ReducedState,
    fermi_vacc_rate,
    full_rhs,
    infection_prob_dynamic,
    infection_prob_equilibrium,
    perceived_cost,
    reduced_rhs,
)
from .equilibria import (
    FixedPoint,
    RegimeReport,
    classify_fixed_point,
    classify_regime,
    enumerate_fixed_points,
    jacobian_reduced,
)
from .integrate import (
    IntegrationConfig,
    Trajectory,
    classify_endpoint,
    full_initial_state,
    integrate,
    simulate_full,
    simulate_reduced,
)
from .control import ControlPolicy, ControlReport, compare_runs, effective_theta

__version__ = "0.1.0"
