import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import CONE3_JET_AT_17, TORUS_JET_AT_1, TORUS_JET_AT_125, TORUS_TAYLOR_AT_1
from revdecoupling.errors import CapabilityError, DomainError, ProfileError
from revdecoupling.profile import eval_jet, make_profile, taylor_at
from revdecoupling.series import Series, horner

PROFILES = [
    make_profile("cone", slope=1.0),
    make_profile("torus"),
    make_profile("quasi_torus", n=3, tail=[0.5]),
    make_profile("perturbed_cone", n=3),
    make_profile("power_series", center=1.0, coeffs=[0, 0, 1], radius=5),
]


def test_make_profile_cone_is_identity():
    p = make_profile("cone", slope=1.0, domain=(0.5, 2.0))
    assert np.allclose(p(np.array([0.5, 1.0, 2.0])), [0.5, 1.0, 2.0])


def test_torus_delta_bound_error():
    with pytest.raises(ProfileError, match="Delta<0.5 required"):
        make_profile("torus", minor=0.5, Delta=0.6)


def test_power_series_round_trip():
    p = make_profile("power_series", center=1.0, coeffs=[1, 0, 1], radius=1.0)
    assert p(1.3) == pytest.approx(1.09)
    assert taylor_at(p, 1.0, 2) == pytest.approx([1, 0, 1])


def test_jets_match_oracles():
    assert eval_jet(make_profile("cone", slope=3.0), 1.7, 4).values == pytest.approx(CONE3_JET_AT_17)
    assert eval_jet(make_profile("torus"), 1.0, 4).values == pytest.approx(TORUS_JET_AT_1, abs=1e-12)
    assert eval_jet(make_profile("torus"), 1.25, 2).values == pytest.approx(TORUS_JET_AT_125, rel=1e-12)


def test_taylor_oracles():
    assert taylor_at(make_profile("torus"), 1.0, 4) == pytest.approx(TORUS_TAYLOR_AT_1, abs=1e-12)
    assert taylor_at(make_profile("cone", slope=1.0), 1.5, 3) == pytest.approx([1.5, 1, 0, 0], abs=1e-15)


def test_jet_errors():
    p = make_profile("torus")
    with pytest.raises(DomainError):
        eval_jet(p, 1.6, 2)
    with pytest.raises(CapabilityError):
        eval_jet(p, 1.0, 9)


def test_torus_case_two_pattern():
    d = eval_jet(make_profile("torus"), 1.0, 2).values
    assert d[1] == 0 and d[2] != 0


@pytest.mark.parametrize("p", PROFILES, ids=lambda p: p.kind)
def test_jet_matches_finite_differences(p):
    lo, hi = p.domain
    h = 1e-5
    for r in np.linspace(lo + 0.01, hi - 0.01, 7):
        d = eval_jet(p, r, 2).values
        f = lambda x: float(p(x))
        d1 = (f(r + h) - f(r - h)) / (2 * h)
        d2 = (f(r + h) - 2 * f(r) + f(r - h)) / h**2
        assert d1 == pytest.approx(d[1], rel=1e-6, abs=1e-7)
        assert d2 == pytest.approx(d[2], rel=1e-4, abs=1e-4)


@pytest.mark.parametrize("p", PROFILES, ids=lambda p: p.kind)
def test_taylor_jet_coherence(p):
    r = 0.5 * sum(p.domain) + 0.013
    coeffs = taylor_at(p, r, 6)
    values = eval_jet(p, r, 6).values
    for m, (c, v) in enumerate(zip(coeffs, values)):
        assert math.factorial(m) * c == pytest.approx(v, rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(-0.9, 0.9))
def test_series_sqrt_and_reciprocal_round_trip(a, t):
    assume(a + t > 0.05)  # sqrt and 1/x need a positive leading term
    x = Series.variable(np.float64(a), 6) + t
    y = x.sqrt() * x.sqrt()
    assert np.allclose(y.c, x.c, atol=1e-10)
    inv = x.reciprocal()
    z = x * inv
    scale = float(np.abs(inv.c).max())  # cancellation error grows with the coefficients
    assert np.allclose(z.c[0], 1.0) and np.allclose(z.c[1:], 0.0, atol=1e-14 * scale)


def test_horner_polynomial_derivatives():
    s = horner([1.0, 2.0, 3.0], Series.variable(np.float64(2.0), 3))
    assert s.derivatives() == pytest.approx([17.0, 14.0, 6.0, 0.0])
