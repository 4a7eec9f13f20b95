"""Exact Lax Riemann solver for the isothermal p-system.

The solution of a Riemann problem is self-similar, ``u(t, x) = U(x / t)``,
and is represented by a :class:`WaveFan`: an ordered list of elementary
waves. Sampling ``U`` at a ray ``xi`` is exact, including inside
rarefactions where the fan is inverted in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .lax_curves import Family, intermediate_state
from .state_space import GasParams, State

ZERO_STRENGTH = 1e-13


class WaveKind(enum.Enum):
    SHOCK = "shock"
    RAREFACTION = "rarefaction"
    UNDERCOMPRESSIVE = "undercompressive"
    CONSTANT = "constant"


@dataclass(frozen=True)
class Wave:
    """One elementary wave; ``fam`` is ``None`` for the stationary valve jump."""

    fam: Family | None
    kind: WaveKind
    left: State
    right: State
    speed_lo: float
    speed_hi: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": None if self.fam is None else int(self.fam),
            "kind": self.kind.value,
            "left": list(self.left.as_tuple()),
            "right": list(self.right.as_tuple()),
            "speed_lo": self.speed_lo,
            "speed_hi": self.speed_hi,
        }


@dataclass(frozen=True)
class WaveFan:
    """Self-similar solution ``xi -> U(xi)`` built from ordered waves.

    ``decision`` carries the valve decision when the fan comes from a
    coupling solver; it is ``None`` for the classical solver.
    """

    waves: tuple[Wave, ...]
    left_datum: State
    right_datum: State
    decision: Any = field(default=None, compare=False)

    def speeds(self) -> list[float]:
        return breakpoints(self)

    def has_kind(self, kind: WaveKind) -> bool:
        return any(w.kind is kind for w in self.waves)


def negligible(u: State, w: State, g: GasParams) -> bool:
    """Zero-strength test used to omit waves produced by root-finder noise."""
    drho = abs(u.rho - w.rho)
    dq = abs(u.q - w.q)
    rho_scale = max(u.rho, w.rho)
    q_scale = max(abs(u.q), abs(w.q), g.a * rho_scale)
    return drho <= ZERO_STRENGTH * rho_scale and dq <= ZERO_STRENGTH * q_scale


def one_wave(u_l: State, u_m: State, g: GasParams) -> Wave:
    """1-wave from ``u_l`` to a state ``u_m`` on its forward 1-curve."""
    if u_m.rho > u_l.rho:
        s = u_l.q / u_l.rho - g.a * math.sqrt(u_m.rho / u_l.rho)
        return Wave(Family.ONE, WaveKind.SHOCK, u_l, u_m, s, s)
    lo = u_l.q / u_l.rho - g.a
    hi = u_m.q / u_m.rho - g.a
    return Wave(Family.ONE, WaveKind.RAREFACTION, u_l, u_m, lo, max(lo, hi))


def two_wave(u_m: State, u_r: State, g: GasParams) -> Wave:
    """2-wave from ``u_m`` (on the backward 2-curve of ``u_r``) to ``u_r``."""
    if u_r.rho < u_m.rho:
        s = u_r.q / u_r.rho + g.a * math.sqrt(u_m.rho / u_r.rho)
        return Wave(Family.TWO, WaveKind.SHOCK, u_m, u_r, s, s)
    lo = u_m.q / u_m.rho + g.a
    hi = u_r.q / u_r.rho + g.a
    return Wave(Family.TWO, WaveKind.RAREFACTION, u_m, u_r, min(lo, hi), hi)


def stationary_jump(u_minus: State, u_plus: State, g: GasParams) -> Wave:
    return Wave(None, WaveKind.UNDERCOMPRESSIVE, u_minus, u_plus, 0.0, 0.0)


Builder = Callable[[State, State, GasParams], Wave]


def chain_waves(
    u_l: State, u_r: State, segments: Sequence[tuple[Builder, State, State]], g: GasParams
) -> tuple[Wave, ...]:
    """Assemble consecutive waves, dropping zero-strength ones.

    Each segment is ``(builder, from_state, to_state)``. A dropped segment
    merges its end states so that the remaining waves still chain from
    ``u_l`` to ``u_r``; if every segment is negligible but the data differ,
    the strongest one is kept.
    """
    kept = [s for s in segments if not negligible(s[1], s[2], g)]
    if not kept:
        if negligible(u_l, u_r, g):
            return ()
        kept = [max(segments, key=lambda s: abs(s[1].rho - s[2].rho) + abs(s[1].q - s[2].q))]
    waves = []
    current = u_l
    for i, (build, _, end) in enumerate(kept):
        target = u_r if i == len(kept) - 1 else end
        waves.append(build(current, target, g))
        current = target
    return tuple(waves)


def solve_rp(u_l: State, u_r: State, g: GasParams) -> WaveFan:
    """Classical Riemann solver: a 1-wave to the intermediate state, then a 2-wave."""
    if u_l == u_r:
        return WaveFan((), u_l, u_r)
    u_m = intermediate_state(u_l, u_r, g)
    waves = chain_waves(u_l, u_r, [(one_wave, u_l, u_m), (two_wave, u_m, u_r)], g)
    return WaveFan(waves, u_l, u_r)


def _rarefaction_state(w: Wave, xi: float, g: GasParams) -> State:
    a = g.a
    if w.fam is Family.ONE:
        base = w.left
        rho = base.rho * math.exp((base.q / base.rho - a - xi) / a)
        return State(rho, rho * (xi + a))
    base = w.right
    rho = base.rho * math.exp((xi - a - base.q / base.rho) / a)
    return State(rho, rho * (xi - a))


def sample(fan: WaveFan, xi: float, g: GasParams, side: str = "right") -> State:
    """Evaluate the fan at the ray ``x / t = xi``.

    The default is right-continuous at discontinuities; ``side="left"``
    returns the left limit instead.
    """
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    right = side == "right"
    for w in fan.waves:
        before = xi < w.speed_lo if right else xi <= w.speed_lo
        if before:
            return w.left
        if w.kind is WaveKind.RAREFACTION:
            inside = xi < w.speed_hi if right else xi <= w.speed_hi
            if inside:
                return _rarefaction_state(w, xi, g)
    return fan.right_datum


def traces(fan: WaveFan, g: GasParams) -> tuple[State, State]:
    """Left and right limits of the fan at ``xi = 0``."""
    return sample(fan, 0.0, g, side="left"), sample(fan, 0.0, g, side="right")


def breakpoints(fan: WaveFan) -> list[float]:
    """Sorted distinct wave speeds (rarefaction edges and discontinuities)."""
    pts = set()
    for w in fan.waves:
        pts.add(w.speed_lo)
        pts.add(w.speed_hi)
    return sorted(pts)


def sample_profile(fan: WaveFan, xi: np.ndarray, g: GasParams) -> np.ndarray:
    """Sample ``(rho, q)`` at each ray; returns an array of shape ``(len(xi), 2)``."""
    out = np.empty((len(xi), 2))
    for i, s in enumerate(np.asarray(xi, dtype=float)):
        u = sample(fan, float(s), g)
        out[i] = u.rho, u.q
    return out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def l1_distance(fan_a: WaveFan, fan_b: WaveFan, g: GasParams, lo: float = -5.0, hi: float = 5.0) -> float:
    """``int_lo^hi |U_a - U_b|_1 dxi`` with ``|(rho, q)|_1 = |rho| + |q|``.

    Both fans are piecewise smooth; the integral is split at the union of
    their breakpoints and each piece is integrated by Gauss-Legendre.
    """
    cuts = {lo, hi}
    cuts.update(x for x in breakpoints(fan_a) + breakpoints(fan_b) if lo < x < hi)
    edges = sorted(cuts)
    total = 0.0
    for x0, x1 in zip(edges[:-1], edges[1:]):
        if x1 <= x0:
            continue
        half, mid = 0.5 * (x1 - x0), 0.5 * (x1 + x0)
        for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
            x = mid + half * node
            ua, ub = sample(fan_a, x, g), sample(fan_b, x, g)
            total += weight * half * (abs(ua.rho - ub.rho) + abs(ua.q - ub.q))
    return total
