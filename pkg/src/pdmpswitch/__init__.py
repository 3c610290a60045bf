"""Planar systems switched at random times between two vector fields.

Submodules
----------
linalg2
    Trace-zero 2x2 matrices: exponentials, normal forms, proportionality.
switched_linear
    Exact log-polar simulation of randomly switched linear flows.
lyapunov
    Growth-rate estimates by time averages and by the stationary angular law.
lotka_volterra
    Switched predator-prey dynamics with a conservation-checked integrator.
experiments
    Exit-time, oscillation and transience Monte Carlo batches.
cli
    The ``pdmpswitch`` command.
"""

from .linalg2 import (
    QuadraticInvariant,
    SpectralConditionError,
    TraceZeroMatrix2,
    expm,
    is_proportional,
    normal_form,
    omega,
    quadratic_invariant,
    trace_criterion,
)
from .lotka_volterra import (
    DEMO_SYSTEM,
    Equilibrium,
    IntegratorConfig,
    LVRegime,
    LVState,
    SwitchedLVSystem,
    check_noncollinear,
    equilibrium,
    first_integral,
    flow_lv,
    has_common_equilibrium,
    linearize,
    simulate_lv,
)
from .lyapunov import GrowthRateEstimate, estimate_lambda_mc, estimate_lambda_quadrature
from .switched_linear import LogPolarState, LogPolarTrajectory, SwitchedLinearSystem, simulate

__version__ = "0.1.0"
