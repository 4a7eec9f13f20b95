"""Regime classification for the electronic pressure valve.

Two families of predicates live here:

* closed-form membership tests (``classify``, ``ch_prime``) built from the
  pressure gap, the intermediate state and the function :func:`phi`;
* definition-based checks (``coherent_by_definition``,
  ``consistent_by_definition``) that re-solve Riemann problems at traces or
  cut points of the computed fan.

Agreement between the two is the main property exercised by the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from scipy.optimize import minimize_scalar

from .lax_curves import check_state, hat_state, intermediate_state, xi_inv
from .riemann_classic import WaveFan, WaveKind, breakpoints, sample, solve_rp, traces
from .state_space import GasParams, State, riemann_invariants, states_close
from .valve_coupling import ElectronicValve, ValveModel, solve_coupled

NEUTRAL_RTOL = 1e-11
STATE_TOL = 1e-10


def phi(nu: float, g: GasParams) -> float:
    """``a^2 e^nu (e^{xi_inv(nu)} - e^nu)``: rest-pressure gap of a state with ``mu = 0``."""
    return g.a * g.a * math.exp(nu) * (math.exp(xi_inv(nu)) - math.exp(nu))


def _argmax_phi() -> float:
    # the maximizer does not depend on a, since phi scales with a^2
    unit = GasParams(1.0)
    res = minimize_scalar(lambda n: -phi(n, unit), bracket=(-3.0, -1.3, -0.5), method="golden", tol=1e-12)
    return float(res.x)


NU_C = _argmax_phi()


@dataclass(frozen=True)
class RegimeReport:
    open_active: str
    influence: str
    o_sub: str
    coherent: bool
    consistent: bool
    l1_continuous: bool
    gap: float
    q_tilde: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "open_active": self.open_active,
            "influence": self.influence,
            "o_sub": self.o_sub,
            "coherent": self.coherent,
            "consistent": self.consistent,
            "l1_continuous": self.l1_continuous,
            "gap": self.gap,
            "q_tilde": self.q_tilde,
        }


def _p_hat(u: State, g: GasParams) -> float:
    return g.pressure(hat_state(0.0, u, g).rho)


def _p_check(u: State, g: GasParams) -> float:
    return g.pressure(check_state(0.0, u, g).rho)


def _neutral(u_mid: State, g: GasParams) -> bool:
    return abs(u_mid.q) <= NEUTRAL_RTOL * g.a * u_mid.rho


def pressure_gap(u_l: State, u_r: State, g: GasParams) -> float:
    return _p_check(u_r, g) - _p_hat(u_l, g)


def not_influential(u_l: State, u_r: State, M: float, g: GasParams, u_mid: State | None = None) -> bool:
    """Pair lies outside the active-influential set: open, or zero intermediate flux."""
    if abs(pressure_gap(u_l, u_r, g)) > M:
        return True
    if u_mid is None:
        u_mid = intermediate_state(u_l, u_r, g)
    return _neutral(u_mid, g)


def open_subset(u_l: State, u_r: State, u_mid: State, M: float, g: GasParams) -> str:
    """Which of the six disjoint open subsets the pair belongs to."""
    a = g.a
    mu_l, nu_l = math.log(u_l.rho), u_l.q / (a * u_l.rho)
    mu_r, nu_r = math.log(u_r.rho), u_r.q / (a * u_r.rho)
    nu_t = u_mid.q / (a * u_mid.rho)
    if nu_t > max(0.0, nu_l):
        val = math.exp(mu_l + nu_l) * phi(-max(1.0, nu_l) * min(1.0, nu_t), g)
        return "O_O^1" if val > M else "O_A^1"
    if nu_t < min(0.0, nu_r):
        val = math.exp(mu_r - nu_r) * phi(-min(-1.0, nu_r) * max(-1.0, nu_t), g)
        return "O_O^2" if val > M else "O_A^2"
    if 0.0 < nu_t <= nu_l:
        return "O_O^3"
    if nu_r <= nu_t < 0.0:
        return "O_O^4"
    # nu_t == 0 forces a zero gap, which is never open for M > 0
    return "n/a"


def _rarefaction_hits_zero_flux(fan: WaveFan) -> bool:
    for w in fan.waves:
        if w.kind is WaveKind.RAREFACTION and min(w.left.q, w.right.q) <= 0.0 <= max(w.left.q, w.right.q):
            return True
    return False


def classify(u_l: State, u_r: State, M: float, g: GasParams) -> RegimeReport:
    """Closed-form regime membership for the electronic valve with threshold ``M``."""
    gap = pressure_gap(u_l, u_r, g)
    u_mid = intermediate_state(u_l, u_r, g)
    l1 = abs(gap) != M
    if abs(gap) <= M:
        influence = "A_N" if _neutral(u_mid, g) else "A_I"
        consistent = (
            u_l.q >= 0.0 >= u_r.q
            and not_influential(u_l, u_l, M, g, u_l)
            and not_influential(u_r, u_r, M, g, u_r)
        )
        return RegimeReport("Active", influence, "n/a", True, consistent, l1, gap, u_mid.q)

    o_sub = open_subset(u_l, u_r, u_mid, M, g)
    consistent = (
        not_influential(u_l, u_l, M, g, u_l)
        and not_influential(u_r, u_r, M, g, u_r)
        and not_influential(u_l, u_mid, M, g, u_mid)
        and not_influential(u_mid, u_r, M, g, u_mid)
        and not _rarefaction_hits_zero_flux(solve_rp(u_l, u_r, g))
    )
    return RegimeReport("Open", "n/a", o_sub, o_sub.startswith("O_O"), consistent, l1, gap, u_mid.q)


def ch_prime(u_l: State, u_r: State, M: float, g: GasParams) -> bool:
    """Explicit sufficient condition for coherence."""
    a = g.a
    mu_l, nu_l = math.log(u_l.rho), u_l.q / (a * u_l.rho)
    mu_r, nu_r = math.log(u_r.rho), u_r.q / (a * u_r.rho)
    if not nu_r < 0.0 < nu_l:
        return False
    return min(math.exp(mu_l + nu_l) * phi(-nu_l, g), math.exp(mu_r - nu_r) * phi(nu_r, g)) > M


def boundary_distance(u_l: State, u_r: State, M: float, g: GasParams) -> float:
    """Smallest distance of any quantity tested by :func:`classify` to its threshold.

    Randomized cross-checks skip pairs where this is tiny, since the
    closed-form and re-solve evaluations may legitimately disagree there.
    """
    a = g.a
    u_mid = intermediate_state(u_l, u_r, g)
    nu_l, nu_t, nu_r = (u.q / (a * u.rho) for u in (u_l, u_mid, u_r))
    mu_l, mu_r = math.log(u_l.rho), math.log(u_r.rho)
    gaps = [
        pressure_gap(u_l, u_r, g),
        pressure_gap(u_l, u_l, g),
        pressure_gap(u_r, u_r, g),
        pressure_gap(u_l, u_mid, g),
        pressure_gap(u_mid, u_r, g),
    ]
    d = [abs(abs(x) - M) for x in gaps]
    d += [abs(nu_t), abs(nu_t - nu_l), abs(nu_t - nu_r), abs(u_l.q), abs(u_r.q)]
    d.append(abs(math.exp(mu_l + nu_l) * phi(-max(1.0, nu_l) * min(1.0, nu_t), g) - M))
    d.append(abs(math.exp(mu_r - nu_r) * phi(-min(-1.0, nu_r) * max(-1.0, nu_t), g) - M))
    for w in solve_rp(u_l, u_r, g).waves:
        if w.kind is WaveKind.RAREFACTION:
            d += [abs(w.left.q), abs(w.right.q)]
    return min(d)


# ---------------------------------------------------------------------------
# definition-based checks


def _speed_scale(fan: WaveFan, g: GasParams) -> float:
    return g.a + max((abs(s) for s in breakpoints(fan)), default=0.0)


def is_two_state(fan: WaveFan, g: GasParams, tol: float = STATE_TOL) -> bool:
    """Whether the fan equals ``left_datum`` for ``xi < 0`` and ``right_datum`` for ``xi >= 0``.

    Every non-stationary wave must be of negligible strength; stationary
    discontinuities are what the two-state profile is made of.
    """
    tau = 1e-12 * _speed_scale(fan, g)
    for w in fan.waves:
        stationary = w.kind is not WaveKind.RAREFACTION and abs(w.speed_lo) <= tau
        if not stationary and not states_close(w.left, w.right, tol):
            return False
    return True


def coherent_by_definition(u_l: State, u_r: State, model: ValveModel | None, g: GasParams) -> bool:
    """Re-solve at the traces ``(u(0-), u(0+))`` and check the solver reproduces them."""
    u_minus, u_plus = traces(solve_coupled(u_l, u_r, model, g), g)
    return is_two_state(solve_coupled(u_minus, u_plus, model, g), g)


def consistency_grid(fan: WaveFan, g: GasParams, dense: int = 12) -> list[float]:
    """Cut points exercising every distinct cut topology of ``fan``.

    Wave speeds, midpoints between them, interior rarefaction points
    (including points just inside each edge and around a zero-flux ray),
    a point on either side of the fan, and ``0``.
    """
    speeds = breakpoints(fan)
    reach = max((abs(s) for s in speeds), default=0.0) + 1.0
    pts = {0.0, -reach, reach}
    pts.update(speeds)
    pts.update(0.5 * (x + y) for x, y in zip(speeds[:-1], speeds[1:]))
    for w in fan.waves:
        if w.kind is not WaveKind.RAREFACTION:
            continue
        lo, hi = w.speed_lo, w.speed_hi
        width = hi - lo
        pts.update(lo + width * k / (dense + 1) for k in range(1, dense + 1))
        pts.update((lo + 1e-6 * width, hi - 1e-6 * width))
        zero_ray = -g.a if w.fam == 1 else g.a
        if lo < zero_ray < hi:
            pts.update(zero_ray + s * 1e-6 * width for s in (-1.0, 0.0, 1.0))
    return sorted(pts)


def _function_points(fans: Iterable[WaveFan], extra: Sequence[float]) -> list[float]:
    """Probe rays strictly between breakpoints (and outside), away from jumps."""
    cuts = set(extra)
    for f in fans:
        cuts.update(breakpoints(f))
    edges = sorted(cuts)
    if not edges:
        return [0.0]
    merged = [edges[0]]
    for x in edges[1:]:
        if x - merged[-1] > 1e-9 * (1.0 + abs(x)):
            merged.append(x)
    pts = [merged[0] - 1.0, merged[-1] + 1.0]
    for x0, x1 in zip(merged[:-1], merged[1:]):
        pts += [x0 + f * (x1 - x0) for f in (0.25, 0.5, 0.75)]
    return pts


def _cut_ok(
    fan: WaveFan, xi0: float, model: ValveModel | None, g: GasParams, tol: float
) -> bool:
    u_l, u_r = fan.left_datum, fan.right_datum
    u0 = sample(fan, xi0, g)
    left_fan = solve_coupled(u_l, u0, model, g)
    right_fan = solve_coupled(u0, u_r, model, g)
    for xi in _function_points((fan, left_fan, right_fan), [xi0]):
        expected_left = sample(fan, xi, g) if xi < xi0 else u0
        expected_right = u0 if xi < xi0 else sample(fan, xi, g)
        if not states_close(sample(left_fan, xi, g), expected_left, tol):
            return False
        if not states_close(sample(right_fan, xi, g), expected_right, tol):
            return False
    return True


def consistent_by_definition(
    u_l: State,
    u_r: State,
    model: ValveModel | None,
    g: GasParams,
    xi_grid: Sequence[float] | None = None,
    tol: float = STATE_TOL,
) -> bool:
    """Check the cut-and-paste properties at every cut point of ``xi_grid``.

    With the cut problems solved, pasting their left and right parts
    reproduces the original fan exactly when both cut properties hold, so
    checking those suffices.
    """
    fan = solve_coupled(u_l, u_r, model, g)
    grid = consistency_grid(fan, g) if xi_grid is None else xi_grid
    return all(_cut_ok(fan, float(x), model, g, tol) for x in grid)


def invariant_domain_slack(u: State, u0: State, g: GasParams) -> float:
    """Non-negative exactly when ``u`` lies between the two rarefaction curves through ``u0``."""
    w, z = riemann_invariants(u, g)
    w0, z0 = riemann_invariants(u0, g)
    return min(z - z0, w0 - w)


def in_invariant_domain(u: State, u0: State, g: GasParams, tol: float = 0.0) -> bool:
    return invariant_domain_slack(u, u0, g) >= -tol


def electronic_report(u_l: State, u_r: State, M: float, g: GasParams) -> dict[str, Any]:
    """Classification plus definition-based verdicts, for diagnostics."""
    model = ElectronicValve(M)
    out = classify(u_l, u_r, M, g).to_dict()
    out["coherent_by_definition"] = coherent_by_definition(u_l, u_r, model, g)
    out["consistent_by_definition"] = consistent_by_definition(u_l, u_r, model, g)
    return out
