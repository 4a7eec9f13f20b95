"""Valve models and the coupling Riemann solver.

A valve at ``x = 0`` is described by a decision rule: given the two
Riemann data it is either *open* (the pipe behaves as if the valve were
absent) or *active* with a prescribed interface mass flux ``q_m``. In the
active case the solution consists of a 1-wave into ``hat_state(q_m, u_l)``,
a stationary under-compressive jump, and a 2-wave out of
``check_state(q_m, u_r)``.
"""

from __future__ import annotations

import abc
import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .lax_curves import check_state, flux_window_minus, flux_window_plus, hat_state
from .riemann_classic import WaveFan, chain_waves, one_wave, solve_rp, stationary_jump, traces, two_wave
from .state_space import DomainError, GasParams, State


class ValveMode(enum.Enum):
    OPEN = "Open"
    ACTIVE = "Active"


class NoValveSolution(DomainError):
    """The valve law has no admissible flux for the given data."""


@dataclass(frozen=True)
class ValveDecision:
    """Outcome of a valve model. ``gap`` is a diagnostic pressure difference."""

    mode: ValveMode
    q_m: float | None = None
    gap: float = math.nan

    def __post_init__(self) -> None:
        if (self.mode is ValveMode.ACTIVE) != (self.q_m is not None):
            raise ValueError("q_m must be given exactly when the valve is active")

    @property
    def active(self) -> bool:
        return self.mode is ValveMode.ACTIVE

    @classmethod
    def open(cls, gap: float = math.nan) -> ValveDecision:
        return cls(ValveMode.OPEN, None, gap)

    @classmethod
    def closed(cls, q_m: float = 0.0, gap: float = math.nan) -> ValveDecision:
        return cls(ValveMode.ACTIVE, q_m, gap)


def rest_pressure_gap(u_l: State, u_r: State, g: GasParams) -> float:
    """``p(check_state(0, u_r)) - p(hat_state(0, u_l))``."""
    return g.pressure(check_state(0.0, u_r, g).rho) - g.pressure(hat_state(0.0, u_l, g).rho)


class ValveModel(abc.ABC):
    """Deterministic, stateless decision rule."""

    @abc.abstractmethod
    def decide(self, u_l: State, u_r: State, g: GasParams) -> ValveDecision: ...


def _positive(name: str, value: float) -> None:
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class ElectronicValve(ValveModel):
    """Closes when the rest-state pressures on the two sides differ by at most ``M``."""

    M: float

    def __post_init__(self) -> None:
        _positive("M", self.M)

    def decide(self, u_l: State, u_r: State, g: GasParams) -> ValveDecision:
        gap = rest_pressure_gap(u_l, u_r, g)
        if abs(gap) <= self.M:
            return ValveDecision.closed(0.0, gap)
        return ValveDecision.open(gap)


@dataclass(frozen=True)
class SpringValve(ValveModel):
    """Closes when the data pressures themselves differ by at most ``M``."""

    M: float

    def __post_init__(self) -> None:
        _positive("M", self.M)

    def decide(self, u_l: State, u_r: State, g: GasParams) -> ValveDecision:
        gap = g.pressure(u_r.rho) - g.pressure(u_l.rho)
        if abs(gap) <= self.M:
            return ValveDecision.closed(0.0, gap)
        return ValveDecision.open(gap)


@dataclass(frozen=True)
class OneWayValve(ValveModel):
    """Wraps another model and forbids flow from right to left."""

    inner: ValveModel

    def decide(self, u_l: State, u_r: State, g: GasParams) -> ValveDecision:
        d = self.inner.decide(u_l, u_r, g)
        if d.active:
            if d.q_m < 0.0:
                return ValveDecision.closed(0.0, d.gap)
            return d
        u_minus, _ = traces(solve_rp(u_l, u_r, g), g)
        if u_minus.q < 0.0:
            return ValveDecision.closed(0.0, d.gap)
        return d


@dataclass(frozen=True)
class PressureDropValve(ValveModel):
    """Always active; the flux obeys ``p_check = p_hat - k a^2 q_m^2 / p_hat``.

    When the downstream rest pressure already exceeds the upstream one the
    valve shuts (``q_m = 0``).
    """

    k: float
    rtol: float = 1e-12

    def __post_init__(self) -> None:
        _positive("k", self.k)

    def residual(self, q_m: float, u_l: State, u_r: State, g: GasParams) -> float:
        p_hat = g.pressure(hat_state(q_m, u_l, g).rho)
        p_check = g.pressure(check_state(q_m, u_r, g).rho)
        return p_check - p_hat + self.k * g.a * g.a * q_m * q_m / p_hat

    def decide(self, u_l: State, u_r: State, g: GasParams) -> ValveDecision:
        window = flux_window_minus(u_l, g).intersect(flux_window_plus(u_r, g))
        r0 = self.residual(0.0, u_l, u_r, g)
        if r0 >= 0.0:
            return ValveDecision.closed(0.0, r0)
        lo, hi = 0.0, window.hi
        r_hi = self.residual(hi, u_l, u_r, g)
        if r_hi < 0.0:
            raise NoValveSolution(
                f"pressure-drop law has no root in [0, {hi!r}]: residual at the window edge is {r_hi!r}"
            )
        # residual is increasing in q_m on the window, so plain bisection is safe
        r_lo = r0
        for _ in range(200):
            if hi - lo <= self.rtol * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            r_mid = self.residual(mid, u_l, u_r, g)
            if r_mid == 0.0:
                lo = hi = mid
                r_lo = r_hi = 0.0
                break
            if r_mid < 0.0:
                lo, r_lo = mid, r_mid
            else:
                hi, r_hi = mid, r_mid
        q_m = lo if abs(r_lo) <= abs(r_hi) else hi
        return ValveDecision.closed(q_m, r0)


def valve_from_config(spec: Mapping[str, Any] | None) -> ValveModel | None:
    """Build a model from ``{"type": ..., "M": ..., "k": ..., "inner": {...}}``.

    ``None`` (or ``{"type": "none"}``) means no valve.
    """
    if spec is None:
        return None
    if not isinstance(spec, Mapping):
        raise ValueError(f"valve spec must be an object, got {type(spec).__name__}")
    kind = spec.get("type")
    try:
        if kind == "none":
            return None
        if kind == "electronic":
            return ElectronicValve(float(spec["M"]))
        if kind == "spring":
            return SpringValve(float(spec["M"]))
        if kind == "pressure_drop":
            return PressureDropValve(float(spec["k"]))
        if kind == "one_way":
            inner = valve_from_config(spec["inner"])
            if inner is None:
                raise ValueError("one_way valve requires a nested 'inner' model")
            return OneWayValve(inner)
    except KeyError as exc:
        raise ValueError(f"valve type {kind!r} requires key {exc.args[0]!r}") from None
    raise ValueError(f"unknown valve type {kind!r}")


def valve_to_config(model: ValveModel | None) -> dict[str, Any] | None:
    if model is None:
        return None
    if isinstance(model, ElectronicValve):
        return {"type": "electronic", "M": model.M}
    if isinstance(model, SpringValve):
        return {"type": "spring", "M": model.M}
    if isinstance(model, PressureDropValve):
        return {"type": "pressure_drop", "k": model.k}
    if isinstance(model, OneWayValve):
        return {"type": "one_way", "inner": valve_to_config(model.inner)}
    raise TypeError(f"cannot serialize {model!r}")


def active_states(q_m: float, u_l: State, u_r: State, g: GasParams) -> tuple[State, State]:
    """Traces on either side of an active valve carrying flux ``q_m``."""
    return hat_state(q_m, u_l, g), check_state(q_m, u_r, g)


def solve_coupled(u_l: State, u_r: State, model: ValveModel | None, g: GasParams) -> WaveFan:
    """Coupling Riemann solver; ``model=None`` reduces to the classical solver."""
    if model is None:
        return solve_rp(u_l, u_r, g)
    decision = model.decide(u_l, u_r, g)
    if not decision.active:
        return dataclasses.replace(solve_rp(u_l, u_r, g), decision=decision)
    u_hat, u_check = active_states(decision.q_m, u_l, u_r, g)
    waves = chain_waves(
        u_l,
        u_r,
        [(one_wave, u_l, u_hat), (stationary_jump, u_hat, u_check), (two_wave, u_check, u_r)],
        g,
    )
    return WaveFan(waves, u_l, u_r, decision)
