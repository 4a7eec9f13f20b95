"""First-order Godunov scheme for a pipe with a valve at ``x = 0``.

Interior interface fluxes are the physical flux of the exact classical
Riemann solution at ``x / t = 0``. At the valve interface the coupling
solver decides, from the two adjacent cell averages, whether the valve is
open (single flux) or active (equal mass fluxes, different momentum fluxes
on the two sides).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .lax_curves import hat_state, check_state
from .riemann_classic import sample, solve_rp
from .state_space import RHO_MIN, DomainError, GasParams, State
from .valve_coupling import ValveDecision, ValveModel

_NEWTON_ITERS = 100
_MU_TOL = 1e-13


class Boundary(enum.Enum):
    OUTFLOW = "outflow"
    REFLECTIVE = "reflective"


class SimulationError(RuntimeError):
    """The scheme produced an inadmissible state."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh of cell averages ``cells[:, 0] = rho``, ``cells[:, 1] = q``.

    ``valve_interface`` is the index ``j`` of the first cell right of ``x = 0``
    (interface between cells ``j - 1`` and ``j``), or ``None`` when the domain
    does not contain the origin in its interior.
    """

    x_min: float
    x_max: float
    cells: np.ndarray
    valve_interface: int | None
    time: float = 0.0

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=float)
        if cells.ndim != 2 or cells.shape[1] != 2 or cells.shape[0] < 1:
            raise DomainError(f"cells must have shape (n, 2), got {cells.shape}")
        if not np.all(np.isfinite(cells)):
            raise DomainError("cell averages must be finite")
        if np.any(cells[:, 0] < RHO_MIN):
            raise DomainError(f"cell densities must be >= {RHO_MIN:g}")
        object.__setattr__(self, "cells", cells)

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def mass(self) -> float:
        return float(np.sum(self.cells[:, 0]) * self.dx)

    def momentum(self) -> float:
        return float(np.sum(self.cells[:, 1]) * self.dx)

    def state(self, i: int) -> State:
        return State(self.cells[i, 0], self.cells[i, 1])


def make_grid(x_min: float, x_max: float, n_cells: int) -> Grid1D:
    """Empty (unit density, at rest) grid whose interfaces include ``x = 0``."""
    if not (n_cells >= 1 and x_max > x_min):
        raise DomainError(f"need n_cells >= 1 and x_max > x_min, got {n_cells}, [{x_min}, {x_max}]")
    valve = None
    if x_min < 0.0 < x_max:
        j = -x_min / (x_max - x_min) * n_cells
        valve = round(j)
        if abs(j - valve) > 1e-9 * n_cells or not 0 < valve < n_cells:
            raise DomainError(
                f"x = 0 is not a cell interface for [{x_min}, {x_max}] with {n_cells} cells"
            )
    return Grid1D(x_min, x_max, np.tile([1.0, 0.0], (n_cells, 1)), valve)


def piecewise_grid(x_min: float, x_max: float, n_cells: int, pieces: list[tuple[float, float, float, float]]) -> Grid1D:
    """Grid initialized from ``(x_lo, x_hi, rho, q)`` pieces by cell center.

    Every cell center must be covered by some piece; later pieces win on overlap.
    """
    grid = make_grid(x_min, x_max, n_cells)
    xc = grid.centers()
    cells = np.full((n_cells, 2), np.nan)
    for x_lo, x_hi, rho, q in pieces:
        mask = (xc >= x_lo) & (xc <= x_hi)
        cells[mask] = (rho, q)
    if np.any(np.isnan(cells)):
        raise DomainError("initial pieces do not cover every cell center")
    return replace(grid, cells=cells)


def riemann_grid(x_min: float, x_max: float, n_cells: int, u_l: State, u_r: State) -> Grid1D:
    grid = make_grid(x_min, x_max, n_cells)
    cells = np.where((grid.centers() < 0.0)[:, None], [u_l.rho, u_l.q], [u_r.rho, u_r.q])
    return replace(grid, cells=cells)


@dataclass(frozen=True)
class SimConfig:
    t_end: float
    g: GasParams = field(default_factory=GasParams)
    cfl: float = 0.5
    boundary: Boundary = Boundary.OUTFLOW
    valve: ValveModel | None = None
    output_every: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.cfl <= 1.0:
            raise DomainError(f"cfl must lie in (0, 1], got {self.cfl!r}")
        if not (self.t_end >= 0.0 and math.isfinite(self.t_end)):
            raise DomainError(f"t_end must be finite and non-negative, got {self.t_end!r}")
        if self.output_every is not None and not self.output_every > 0.0:
            raise DomainError(f"output_every must be positive, got {self.output_every!r}")


# ---------------------------------------------------------------------------
# vectorized exact interface flux


def _forward1(mu, mu_s, nu_s):
    d = mu - mu_s
    shock = d > 0.0
    val = np.where(shock, nu_s - 2.0 * np.sinh(0.5 * d), nu_s - d)
    der = np.where(shock, -np.cosh(0.5 * d), -1.0)
    return val, der


def _backward2(mu, mu_s, nu_s):
    d = mu_s - mu
    shock = d < 0.0
    val = np.where(shock, nu_s - 2.0 * np.sinh(0.5 * d), nu_s - d)
    der = np.where(shock, np.cosh(0.5 * d), 1.0)
    return val, der


def _intermediate_mu(mu_l, nu_l, mu_r, nu_r):
    def f(mu):
        v1, d1 = _forward1(mu, mu_l, nu_l)
        v2, d2 = _backward2(mu, mu_r, nu_r)
        return v1 - v2, d1 - d2

    lo = np.minimum(mu_l, mu_r)
    closed = f(lo)[0] <= 0.0
    mu_t = 0.5 * (nu_l - nu_r + mu_l + mu_r)
    if np.all(closed):
        return mu_t
    idx = np.nonzero(~closed)[0]
    ml, nl, mr, nr = mu_l[idx], nu_l[idx], mu_r[idx], nu_r[idx]

    def fi(mu):
        v1, d1 = _forward1(mu, ml, nl)
        v2, d2 = _backward2(mu, mr, nr)
        return v1 - v2, d1 - d2

    a = np.minimum(ml, mr)
    b = np.maximum(ml, mr)
    step = np.ones_like(b)
    for _ in range(200):
        pos = fi(b)[0] > 0.0
        if not np.any(pos):
            break
        a = np.where(pos, b, a)
        b = np.where(pos, b + step, b)
        step = np.where(pos, 2.0 * step, step)
    x = 0.5 * (a + b)
    for _ in range(_NEWTON_ITERS):
        fx, dfx = fi(x)
        # f is decreasing: positive values lie left of the root
        a = np.where(fx > 0.0, x, a)
        b = np.where(fx < 0.0, x, b)
        newton = x - fx / dfx
        ok = (newton > a) & (newton < b)
        x_new = np.where(ok, newton, 0.5 * (a + b))
        x_new = np.where(fx == 0.0, x, x_new)
        done = np.abs(x_new - x) < _MU_TOL
        x = x_new
        if np.all(done):
            break
    mu_t[idx] = x
    return mu_t


def interface_flux(rho_l, q_l, rho_r, q_r, a: float) -> tuple[np.ndarray, np.ndarray]:
    """Physical flux of the exact classical Riemann solution at ``x / t = 0``.

    Arrays of left and right data in, mass and momentum fluxes out.
    Identical neighbours return their own flux exactly.
    """
    rho_l, q_l, rho_r, q_r = (np.asarray(x, dtype=float) for x in (rho_l, q_l, rho_r, q_r))
    v_l, v_r = q_l / rho_l, q_r / rho_r
    mu_l, mu_r = np.log(rho_l), np.log(rho_r)
    nu_l, nu_r = v_l / a, v_r / a
    mu_t = _intermediate_mu(mu_l, nu_l, mu_r, nu_r)
    nu_t = 0.5 * (_forward1(mu_t, mu_l, nu_l)[0] + _backward2(mu_t, mu_r, nu_r)[0])
    rho_t = np.exp(mu_t)
    v_t = a * nu_t

    # default: intermediate state, overwritten from the outside in
    rho = rho_t.copy()
    v = v_t.copy()

    shock2 = mu_r < mu_t
    s2 = v_r + a * np.sqrt(rho_t / rho_r)
    right_of_2 = np.where(shock2, s2 <= 0.0, v_r + a <= 0.0)
    inside_2 = ~shock2 & (v_t + a <= 0.0) & (v_r + a > 0.0)
    rho = np.where(right_of_2, rho_r, rho)
    v = np.where(right_of_2, v_r, v)
    rho = np.where(inside_2, rho_r * np.exp((-a - v_r) / a), rho)
    v = np.where(inside_2, -a, v)

    shock1 = mu_t > mu_l
    s1 = v_l - a * np.sqrt(rho_t / rho_l)
    left_of_1 = np.where(shock1, s1 > 0.0, v_l - a > 0.0)
    inside_1 = ~shock1 & (v_l - a <= 0.0) & (v_t - a > 0.0)
    rho = np.where(inside_1, rho_l * np.exp((v_l - a) / a), rho)
    v = np.where(inside_1, a, v)
    rho = np.where(left_of_1, rho_l, rho)
    v = np.where(left_of_1, v_l, v)

    q = rho * v
    f1 = q
    f2 = q * v + a * a * rho
    # exact data fluxes where the solution at 0 is a datum
    on_l = left_of_1
    on_r = right_of_2 & ~left_of_1
    f1 = np.where(on_l, q_l, np.where(on_r, q_r, f1))
    f2 = np.where(on_l, q_l * v_l + a * a * rho_l, np.where(on_r, q_r * v_r + a * a * rho_r, f2))
    same = (rho_l == rho_r) & (q_l == q_r)
    f1 = np.where(same, q_l, f1)
    f2 = np.where(same, q_l * v_l + a * a * rho_l, f2)
    return f1, f2


def _state_flux(u: State, g: GasParams) -> tuple[float, float]:
    return u.q, u.q * u.q / u.rho + g.a * g.a * u.rho


def valve_fluxes(
    u_l: State, u_r: State, model: ValveModel | None, g: GasParams
) -> tuple[tuple[float, float], tuple[float, float], ValveDecision | None]:
    """Fluxes seen by the cell left and right of the valve, plus the decision."""
    decision = None if model is None else model.decide(u_l, u_r, g)
    if decision is None or not decision.active:
        f = _state_flux(sample(solve_rp(u_l, u_r, g), 0.0, g), g)
        return f, f, decision
    q_m = decision.q_m
    rho_hat = hat_state(q_m, u_l, g).rho
    rho_check = check_state(q_m, u_r, g).rho
    a2 = g.a * g.a
    f_minus = (q_m, q_m * q_m / rho_hat + a2 * rho_hat)
    f_plus = (q_m, q_m * q_m / rho_check + a2 * rho_check)
    return f_minus, f_plus, decision


# ---------------------------------------------------------------------------
# time stepping


@dataclass(frozen=True)
class ValveEvent:
    t: float
    mode: str
    q_m: float
    gap: float


@dataclass(frozen=True)
class StepReport:
    dt: float
    boundary_mass_inflow: float
    boundary_momentum_inflow: float
    momentum_deficit: float
    event: ValveEvent | None


def stable_dt(grid: Grid1D, cfg: SimConfig) -> float:
    rho, q = grid.cells[:, 0], grid.cells[:, 1]
    smax = float(np.max(np.abs(q / rho) + cfg.g.a))
    return cfg.cfl * grid.dx / smax


def advance(grid: Grid1D, cfg: SimConfig, dt: float) -> tuple[Grid1D, StepReport]:
    """One conservative update of length ``dt``."""
    a = cfg.g.a
    cells = grid.cells
    n = grid.n_cells
    first, last = cells[0], cells[-1]
    if cfg.boundary is Boundary.REFLECTIVE:
        ghost_l, ghost_r = (first[0], -first[1]), (last[0], -last[1])
    else:
        ghost_l, ghost_r = tuple(first), tuple(last)
    rho_ext = np.concatenate(([ghost_l[0]], cells[:, 0], [ghost_r[0]]))
    q_ext = np.concatenate(([ghost_l[1]], cells[:, 1], [ghost_r[1]]))
    f1, f2 = interface_flux(rho_ext[:-1], q_ext[:-1], rho_ext[1:], q_ext[1:], a)
    if cfg.boundary is Boundary.REFLECTIVE:
        f1[0] = 0.0
        f1[-1] = 0.0

    # per-cell left and right fluxes; they differ only at an active valve
    f1_left, f2_left = f1[:-1].copy(), f2[:-1].copy()
    f1_right, f2_right = f1[1:].copy(), f2[1:].copy()
    event = None
    deficit = 0.0
    j = grid.valve_interface
    if j is not None and cfg.valve is not None:
        u_l, u_r = grid.state(j - 1), grid.state(j)
        f_minus, f_plus, decision = valve_fluxes(u_l, u_r, cfg.valve, cfg.g)
        f1_right[j - 1], f2_right[j - 1] = f_minus
        f1_left[j], f2_left[j] = f_plus
        deficit = dt * (f_plus[1] - f_minus[1])
        event = ValveEvent(
            grid.time,
            decision.mode.value,
            decision.q_m if decision.active else math.nan,
            decision.gap,
        )

    lam = dt / grid.dx
    new = np.empty_like(cells)
    new[:, 0] = cells[:, 0] - lam * (f1_right - f1_left)
    new[:, 1] = cells[:, 1] - lam * (f2_right - f2_left)
    bad = np.nonzero(~(new[:, 0] >= RHO_MIN) | ~np.isfinite(new[:, 1]))[0]
    if bad.size:
        i = int(bad[0])
        raise SimulationError(
            f"inadmissible state in cell {i} at t={grid.time + dt!r}: rho={new[i, 0]!r}, q={new[i, 1]!r}"
        )
    report = StepReport(dt, float(dt * (f1[0] - f1[-1])), float(dt * (f2[0] - f2[-1])), float(deficit), event)
    return Grid1D(grid.x_min, grid.x_max, new, grid.valve_interface, grid.time + dt), report


def step(grid: Grid1D, cfg: SimConfig) -> Grid1D:
    """Advance by one CFL-limited step, clipped so as not to pass ``t_end``."""
    dt = min(stable_dt(grid, cfg), cfg.t_end - grid.time)
    if dt <= 0.0:
        return grid
    return advance(grid, cfg, dt)[0]


@dataclass
class RunResult:
    grid: Grid1D
    events: list[ValveEvent]
    steps: int
    mass_initial: float
    mass_final: float
    boundary_mass_inflow: float
    momentum_initial: float
    momentum_final: float
    boundary_momentum_inflow: float
    momentum_deficit: float

    @property
    def mass_drift(self) -> float:
        """Mass change not explained by boundary fluxes."""
        return self.mass_final - self.mass_initial - self.boundary_mass_inflow

    @property
    def momentum_residual(self) -> float:
        """Momentum change not explained by boundary inflow and the valve jump; zero up to rounding.

        Across an active valve the scheme gains ``dt * (F2_plus - F2_minus)``
        per step, which is exactly the accumulated ``momentum_deficit``.
        """
        return self.momentum_final - self.momentum_initial - self.boundary_momentum_inflow - self.momentum_deficit

    def mass_report(self) -> dict[str, float | int]:
        return {
            "t": self.grid.time,
            "steps": self.steps,
            "mass_initial": self.mass_initial,
            "mass_final": self.mass_final,
            "boundary_mass_inflow": self.boundary_mass_inflow,
            "mass_drift": self.mass_drift,
            "relative_mass_drift": self.mass_drift / self.mass_initial,
            "momentum_deficit": self.momentum_deficit,
            "momentum_residual": self.momentum_residual,
            "valve_flips": decision_flips(self.events),
        }


def run(
    grid: Grid1D,
    cfg: SimConfig,
    sink: Callable[[Grid1D], None] | None = None,
    max_steps: int | None = None,
) -> RunResult:
    """Advance to ``cfg.t_end`` (or ``max_steps``), emitting snapshots to ``sink``.

    Snapshots are emitted at the start, whenever a multiple of
    ``output_every`` is passed, and at the end.
    """
    mass0, mom0 = grid.mass(), grid.momentum()
    events: list[ValveEvent] = []
    inflow = 0.0
    mom_inflow = 0.0
    deficit = 0.0
    steps = 0
    if sink is not None:
        sink(grid)
    next_out = None if cfg.output_every is None else grid.time + cfg.output_every
    last_emitted = grid.time
    while grid.time < cfg.t_end and (max_steps is None or steps < max_steps):
        dt = stable_dt(grid, cfg)
        if next_out is not None:
            dt = min(dt, next_out - grid.time)
        dt = min(dt, cfg.t_end - grid.time)
        grid, rep = advance(grid, cfg, dt)
        steps += 1
        inflow += rep.boundary_mass_inflow
        mom_inflow += rep.boundary_momentum_inflow
        deficit += rep.momentum_deficit
        if rep.event is not None:
            events.append(rep.event)
        if next_out is not None and grid.time >= next_out:
            if sink is not None:
                sink(grid)
            last_emitted = grid.time
            next_out += cfg.output_every
    if sink is not None and last_emitted != grid.time:
        sink(grid)
    return RunResult(grid, events, steps, mass0, grid.mass(), inflow, mom0, grid.momentum(), mom_inflow, deficit)


def decision_flips(events: list[ValveEvent]) -> int:
    return sum(1 for e0, e1 in zip(events[:-1], events[1:]) if e0.mode != e1.mode)


def eventually_constant(events: list[ValveEvent], start: int = 10, window: int = 100) -> bool:
    """At most one change of valve mode in every ``window`` consecutive steps after ``start``."""
    changes = [
        k for k, (e0, e1) in enumerate(zip(events[start:-1], events[start + 1 :])) if e0.mode != e1.mode
    ]
    return all(k1 - k0 >= window for k0, k1 in zip(changes[:-1], changes[1:]))
