"""States of the isothermal p-system and their coordinate views.

A state is stored in conservative variables ``(rho, q)``; the log-density /
Mach-number coordinates ``(mu, nu)`` and the Riemann invariants ``(w, z)``
are derived on demand.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

RHO_MIN = 1e-12


class DomainError(ValueError):
    """Raised when an input lies outside the admissible set of an operation."""


@dataclass(frozen=True)
class GasParams:
    """Isothermal gas with pressure law ``p = a**2 * rho``."""

    a: float = 1.0

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise DomainError(f"sound speed must be positive and finite, got a={self.a!r}")

    def pressure(self, rho: float) -> float:
        return self.a * self.a * rho


class SonicClass(enum.Enum):
    SUBSONIC = "subsonic"
    SONIC = "sonic"
    SUPERSONIC = "supersonic"


@dataclass(frozen=True)
class State:
    """A point of Omega = {rho > 0}: mass density ``rho`` and momentum ``q``."""

    rho: float
    q: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "q", float(self.q))
        if not math.isfinite(self.q):
            raise DomainError(f"momentum must be finite, got q={self.q!r}")
        if not (self.rho >= RHO_MIN and math.isfinite(self.rho)):
            raise DomainError(f"density must be >= {RHO_MIN:g} and finite, got rho={self.rho!r}")

    @classmethod
    def from_mu_nu(cls, mu: float, nu: float, g: GasParams) -> State:
        rho = math.exp(mu)
        return cls(rho, g.a * nu * rho)

    @property
    def v(self) -> float:
        return self.q / self.rho

    @property
    def mu(self) -> float:
        return math.log(self.rho)

    def nu(self, g: GasParams) -> float:
        return self.q / (g.a * self.rho)

    def p(self, g: GasParams) -> float:
        return g.pressure(self.rho)

    def mirror(self) -> State:
        """Reflection ``q -> -q``; maps backward 2-curves onto forward 1-curves."""
        return State(self.rho, -self.q)

    def as_tuple(self) -> tuple[float, float]:
        return (self.rho, self.q)


def to_mu_nu(u: State, g: GasParams) -> tuple[float, float]:
    return math.log(u.rho), u.q / (g.a * u.rho)


def riemann_invariants(u: State, g: GasParams) -> tuple[float, float]:
    """Return ``(w, z) = (nu + mu, nu - mu)``."""
    mu, nu = to_mu_nu(u, g)
    return nu + mu, nu - mu


def eigenvalues(u: State, g: GasParams) -> tuple[float, float]:
    v = u.q / u.rho
    return v - g.a, v + g.a


def flux(u: State, g: GasParams) -> tuple[float, float]:
    return u.q, u.q * u.q / u.rho + g.a * g.a * u.rho


def sonic_class(u: State, g: GasParams) -> SonicClass:
    nu = abs(u.q / (g.a * u.rho))
    if nu < 1.0:
        return SonicClass.SUBSONIC
    if nu == 1.0:
        return SonicClass.SONIC
    return SonicClass.SUPERSONIC


def states_close(u: State, w: State, tol: float = 1e-10) -> bool:
    """Componentwise comparison, relative to the state magnitude (floored at 1)."""
    scale = max(1.0, u.rho, w.rho)
    qscale = max(1.0, abs(u.q), abs(w.q))
    return abs(u.rho - w.rho) <= tol * scale and abs(u.q - w.q) <= tol * qscale
