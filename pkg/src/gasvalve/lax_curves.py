"""Lax-curve geometry of the isothermal p-system.

Curves are evaluated either in conservative form (``q`` as a function of
``rho``) or in ``(mu, nu) = (log rho, q / (a rho))`` coordinates, where the
rarefaction branches are straight lines of slope -1 / +1 and the shock
branches are translates of ``xi(zeta) = -2 sinh(zeta / 2)``.

The special states follow the usual notation:

* ``bar_state(u)``: the point of the forward 1-curve through ``u`` with the
  largest admissible momentum (the sonic point for subsonic ``u``);
* ``underline_state(u)``: its mirror image on the backward 2-curve;
* ``hat_state(q_m, u)`` / ``check_state(q_m, u)``: the densest intersection of
  the forward 1-curve / backward 2-curve through ``u`` with ``q = q_m``;
* ``intermediate_state(u_l, u_r)``: the middle state of the classical
  Riemann problem.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ._roots import expand_bracket, newton_bisect
from .state_space import DomainError, GasParams, State


class Family(enum.IntEnum):
    ONE = 1
    TWO = 2


class CurveKind(enum.Enum):
    SHOCK = "shock"
    RAREFACTION = "rarefaction"
    FORWARD = "forward"
    BACKWARD = "backward"


def xi(zeta: float) -> float:
    return -2.0 * math.sinh(0.5 * zeta)


def xi_inv(x: float) -> float:
    # equal to 2 log(2 / (sqrt(x^2 + 4) + x)) but free of cancellation for x << 0
    return -2.0 * math.asinh(0.5 * x)


def xi_prime(zeta: float) -> float:
    return -math.cosh(0.5 * zeta)


# ---------------------------------------------------------------------------
# conservative-variable curves


def _branch_value(kind: CurveKind, fam: Family, rho: float, base: State, a: float) -> float:
    v = base.q / base.rho
    sign = -1.0 if fam is Family.ONE else 1.0
    r = rho / base.rho
    if kind is CurveKind.SHOCK:
        return rho * (v + sign * a * (math.sqrt(r) - math.sqrt(1.0 / r)))
    return rho * (v + sign * a * math.log(r))


def curve_value(kind: CurveKind, fam: Family, rho: float, base: State, g: GasParams) -> float:
    """Momentum on the requested curve through ``base`` at density ``rho``."""
    if not rho > 0.0:
        raise DomainError(f"density must be positive, got rho={rho!r}")
    if kind in (CurveKind.SHOCK, CurveKind.RAREFACTION):
        return _branch_value(kind, fam, rho, base, g.a)
    rho_s = base.rho
    if kind is CurveKind.FORWARD:
        if fam is Family.ONE:
            branch = CurveKind.RAREFACTION if rho <= rho_s else CurveKind.SHOCK
        else:
            branch = CurveKind.SHOCK if rho < rho_s else CurveKind.RAREFACTION
    else:
        if fam is Family.ONE:
            branch = CurveKind.SHOCK if rho < rho_s else CurveKind.RAREFACTION
        else:
            branch = CurveKind.RAREFACTION if rho <= rho_s else CurveKind.SHOCK
    return _branch_value(branch, fam, rho, base, g.a)


def shock_speed(fam: Family, rho: float, base: State, g: GasParams) -> float:
    """Speed of the ``fam``-shock joining ``base`` to the density ``rho``."""
    if not rho > 0.0:
        raise DomainError(f"density must be positive, got rho={rho!r}")
    c = g.a * math.sqrt(rho / base.rho)
    v = base.q / base.rho
    return v - c if fam is Family.ONE else v + c


def rh_speed(u1: State, u2: State) -> float:
    """Slope of the chord joining two states in the (rho, q) plane."""
    return (u1.q - u2.q) / (u1.rho - u2.rho)


# ---------------------------------------------------------------------------
# (mu, nu) coordinates


def forward1_nu(mu: float, mu_s: float, nu_s: float) -> tuple[float, float]:
    """Forward 1-curve through ``(mu_s, nu_s)``: value and slope at ``mu``."""
    if mu <= mu_s:
        return nu_s + mu_s - mu, -1.0
    d = mu - mu_s
    return nu_s + xi(d), xi_prime(d)


def backward2_nu(mu: float, mu_s: float, nu_s: float) -> tuple[float, float]:
    """Backward 2-curve through ``(mu_s, nu_s)``: value and slope at ``mu``."""
    if mu <= mu_s:
        return nu_s - mu_s + mu, 1.0
    d = mu_s - mu
    return nu_s + xi(d), -xi_prime(d)


def _sonic_or_peak_mu(mu: float, nu: float) -> float:
    """Density (log) at which momentum is maximal along the forward 1-curve."""
    if nu <= 1.0:
        return mu + nu - 1.0
    # peak of the shock branch: 3 s^2 - 2 nu s - 1 = 0 with s = sqrt(rho / rho_s)
    s = (nu + math.sqrt(nu * nu + 3.0)) / 3.0
    return mu + 2.0 * math.log(s)


# ---------------------------------------------------------------------------
# special states


@dataclass(frozen=True)
class FluxWindow:
    """Closed interval of admissible valve fluxes; infinite ends allowed."""

    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise DomainError(f"empty flux window [{self.lo!r}, {self.hi!r}]")

    def __contains__(self, q: float) -> bool:
        return self.lo <= q <= self.hi

    def intersect(self, other: FluxWindow) -> FluxWindow:
        return FluxWindow(max(self.lo, other.lo), min(self.hi, other.hi))


def bar_state(u: State, g: GasParams) -> State:
    """Sonic point of the forward 1-rarefaction through a subsonic-or-sonic ``u``.

    For ``v > a`` the state itself is returned, matching the supersonic branch
    of the admissible window ``(-inf, q_l]``.
    """
    mu, nu = math.log(u.rho), u.q / (g.a * u.rho)
    if nu >= 1.0:
        return u
    return State.from_mu_nu(mu + nu - 1.0, 1.0, g)


def underline_state(u: State, g: GasParams) -> State:
    return bar_state(u.mirror(), g).mirror()


def flux_window_minus(u: State, g: GasParams) -> FluxWindow:
    return FluxWindow(-math.inf, bar_state(u, g).q)


def flux_window_plus(u: State, g: GasParams) -> FluxWindow:
    return FluxWindow(underline_state(u, g).q, math.inf)


def _hat_rho_at_rest(u: State, a: float) -> float:
    v = u.q / u.rho
    if v > 0.0:
        s = math.sqrt(v * v + 4.0 * a * a) + v
        return u.rho * s * s / (4.0 * a * a)
    return u.rho * math.exp(v / a)


def hat_state(q_m: float, u: State, g: GasParams) -> State:
    """Densest state on the forward 1-curve through ``u`` carrying momentum ``q_m``."""
    window = flux_window_minus(u, g)
    if not q_m <= window.hi:
        raise DomainError(
            f"q_m={q_m!r} exceeds the upper bound {window.hi!r} of the admissible window (-inf, q_bar]"
        )
    if q_m == 0.0:
        return State(_hat_rho_at_rest(u, g.a), 0.0)

    mu_s, nu_s = math.log(u.rho), u.q / (g.a * u.rho)
    target = q_m / g.a

    # sign of q(mu) - q_m, divided by a*exp(mu); q(mu) decreases past mu_peak
    def fdf(mu: float) -> tuple[float, float]:
        nu, dnu = forward1_nu(mu, mu_s, nu_s)
        e = target * math.exp(-mu)
        return nu - e, dnu + e

    mu_peak = _sonic_or_peak_mu(mu_s, nu_s)
    if fdf(mu_peak)[0] <= 0.0:
        # q_m sits on the window edge up to rounding
        return State(math.exp(mu_peak), q_m)
    mu_hi = expand_bracket(lambda m: fdf(m)[0], mu_peak, 1.0, decreasing=True)
    mu_hat = newton_bisect(fdf, mu_peak, mu_hi)
    return State(math.exp(mu_hat), q_m)


def check_state(q_m: float, u: State, g: GasParams) -> State:
    """Densest state on the backward 2-curve through ``u`` carrying momentum ``q_m``."""
    window = flux_window_plus(u, g)
    if not q_m >= window.lo:
        raise DomainError(
            f"q_m={q_m!r} is below the lower bound {window.lo!r} of the admissible window [q_underline, inf)"
        )
    w = hat_state(-q_m, u.mirror(), g)
    return State(w.rho, q_m)


def intermediate_state(u_l: State, u_r: State, g: GasParams) -> State:
    """Intersection of the forward 1-curve through ``u_l`` with the backward 2-curve through ``u_r``."""
    if u_l == u_r:
        return u_l
    a = g.a
    mu_l, nu_l = math.log(u_l.rho), u_l.q / (a * u_l.rho)
    mu_r, nu_r = math.log(u_r.rho), u_r.q / (a * u_r.rho)

    def fdf(mu: float) -> tuple[float, float]:
        n1, d1 = forward1_nu(mu, mu_l, nu_l)
        n2, d2 = backward2_nu(mu, mu_r, nu_r)
        return n1 - n2, d1 - d2

    lo = min(mu_l, mu_r)
    if fdf(lo)[0] <= 0.0:
        # both rarefaction branches: two straight lines
        mu_t = 0.5 * (nu_l - nu_r + mu_l + mu_r)
    else:
        hi = max(mu_l, mu_r)
        if fdf(hi)[0] > 0.0:
            hi = expand_bracket(lambda m: fdf(m)[0], hi, 1.0, decreasing=True)
        mu_t = newton_bisect(fdf, lo, hi)
    nu_t = 0.5 * (forward1_nu(mu_t, mu_l, nu_l)[0] + backward2_nu(mu_t, mu_r, nu_r)[0])
    return State.from_mu_nu(mu_t, nu_t, g)
