import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gasvalve.state_space import (
    RHO_MIN,
    DomainError,
    GasParams,
    SonicClass,
    State,
    eigenvalues,
    flux,
    riemann_invariants,
    sonic_class,
    to_mu_nu,
)

rhos = st.floats(1e-3, 1e3)
qs = st.floats(-1e3, 1e3)
speeds = st.floats(0.1, 10.0)


def test_flux_examples(g):
    assert flux(State(1, 0), g) == (0.0, 1.0)
    assert flux(State(1, 1), g) == (1.0, 2.0)
    assert flux(State(4, 2), g) == (2.0, 5.0)


def test_rejects_bad_states():
    with pytest.raises(DomainError):
        State(0.0, 1.0)
    with pytest.raises(DomainError):
        State(RHO_MIN / 2, 0.0)
    with pytest.raises(DomainError):
        State(1.0, math.inf)
    with pytest.raises(DomainError):
        GasParams(-1.0)


@given(rhos, qs, speeds)
def test_eigenvalue_gap(rho, q, a):
    g = GasParams(a)
    u = State(rho, q)
    l1, l2 = eigenvalues(u, g)
    # exact up to the rounding of v -/+ a
    assert abs((l2 - l1) - 2 * a) <= 4e-16 * (abs(u.v) + a)


@given(rhos, qs, speeds)
def test_invariants_roundtrip(rho, q, a):
    g = GasParams(a)
    u = State(rho, q)
    mu, nu = to_mu_nu(u, g)
    w, z = riemann_invariants(u, g)
    # relative to the size of the invariants, which may dwarf mu or nu
    scale = abs(mu) + abs(nu)
    assert abs((w - z) / 2 - mu) <= 1e-14 * scale
    assert abs((w + z) / 2 - nu) <= 1e-14 * scale
    back = State.from_mu_nu(mu, nu, g)
    assert back.rho == pytest.approx(rho, rel=1e-14)
    assert back.q == pytest.approx(q, rel=1e-13, abs=1e-13)


@given(rhos, qs)
def test_sonic_class_matches_sign(rho, q):
    g = GasParams(1.0)
    c = sonic_class(State(rho, q), g)
    d = abs(q) - rho
    if d < 0:
        assert c is SonicClass.SUBSONIC
    elif d > 0:
        assert c is SonicClass.SUPERSONIC


def test_sonic_exact(g):
    assert sonic_class(State(2.0, 2.0), g) is SonicClass.SONIC
    assert sonic_class(State(2.0, -2.0), g) is SonicClass.SONIC


def test_mirror_is_involution():
    u = State(1.5, -0.3)
    assert u.mirror().mirror() == u
    assert u.mirror().q == 0.3
