"""Exact Riemann solvers for isothermal pipe flow with pressure valves."""

from .classification import (
    NU_C,
    RegimeReport,
    ch_prime,
    classify,
    coherent_by_definition,
    consistent_by_definition,
    in_invariant_domain,
    invariant_domain_slack,
    phi,
)
from .godunov_sim import Boundary, Grid1D, RunResult, SimConfig, make_grid, piecewise_grid, riemann_grid, run, step
from .lax_curves import (
    CurveKind,
    Family,
    FluxWindow,
    bar_state,
    check_state,
    curve_value,
    flux_window_minus,
    flux_window_plus,
    hat_state,
    intermediate_state,
    shock_speed,
    underline_state,
    xi,
    xi_inv,
)
from .riemann_classic import Wave, WaveFan, WaveKind, l1_distance, sample, solve_rp, traces
from .state_space import DomainError, GasParams, SonicClass, State, eigenvalues, flux, sonic_class, to_mu_nu
from .valve_coupling import (
    ElectronicValve,
    NoValveSolution,
    OneWayValve,
    PressureDropValve,
    SpringValve,
    ValveDecision,
    ValveMode,
    ValveModel,
    solve_coupled,
    valve_from_config,
)

__all__ = [name for name in dir() if not name.startswith("_")]
