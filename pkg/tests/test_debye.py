import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdebye import debye as db
from sdebye.debye import DebyeParams
from sdebye.grid import ComplexField, GridSpec, RealField

import oracles as o

SPEC = GridSpec.radial(3, 4.0, 16)


def cfield(vals):
    return ComplexField(SPEC, np.broadcast_to(vals, SPEC.shape).astype(complex))


def rfield(vals):
    return RealField(SPEC, np.broadcast_to(vals, SPEC.shape).astype(float))


def test_params_validation():
    with pytest.raises(ValueError):
        DebyeParams(-0.1, 1)
    with pytest.raises(ValueError):
        DebyeParams(0.1, 0)
    assert DebyeParams(0.0, -1).nls_limit


def test_step_errors():
    p = DebyeParams(0.5, 1)
    v, u = rfield(1.0), cfield(0.0)
    with pytest.raises(ValueError):
        db.debye_step(v, u, u, 0.0, p)
    with pytest.raises(ValueError):
        db.debye_step(v, u, u, 0.1, DebyeParams(0.0, 1))
    other = ComplexField(GridSpec.radial(3, 4.0, 17), np.zeros(17))
    with pytest.raises(ValueError):
        db.debye_step(v, u, other, 0.1, p)


def test_homogeneous_decay():
    p = DebyeParams(0.3, -1)
    v0 = np.linspace(-1, 2, 16)
    out = db.debye_step(RealField(SPEC, v0), cfield(0), cfield(0), 0.3, p).values
    assert np.allclose(out, v0 * math.exp(-1), rtol=1e-15, atol=0)


@pytest.mark.parametrize("dt_over_mu", [1e-6, 0.01, 1.0, 50.0])
def test_constant_forcing_exact(dt_over_mu):
    mu, c, v0 = 0.2, 1.7, -0.4
    p = DebyeParams(mu, 1)
    dt = dt_over_mu * mu
    u = cfield(math.sqrt(c))
    v = rfield(v0)
    for k in range(1, 41):
        v = db.debye_step(v, u, u, dt, p)
        exact = math.exp(-k * dt / mu) * v0 + c * (1 - math.exp(-k * dt / mu))
        assert np.max(np.abs(v.values - exact)) < 1e-12


def test_steady_state():
    p = DebyeParams(0.1, 1)
    u = cfield(math.sqrt(2.0))
    v = rfield(5.0)
    for _ in range(200):
        v = db.debye_step(v, u, u, 0.1, p)
    assert np.max(np.abs(v.values - 2.0)) < 1e-12


@pytest.mark.parametrize("mu", [0.05, 0.5, 3.0])
@pytest.mark.parametrize("dt", [1e-3, 0.1, 0.7])
def test_linear_ramp_exact(mu, dt):
    p = DebyeParams(mu, 1)
    v = rfield(0.0)
    t = 0.0
    for _ in range(25):
        v = db.debye_step(v, cfield(math.sqrt(t)), cfield(math.sqrt(t + dt)), dt, p)
        t += dt
        assert np.max(np.abs(v.values - o.ramp_response(t, mu))) < 1e-12


def _w_start_series(h):
    # (1 - e^{-h}(1+h))/h = sum_{k>=2} (-1)^k (k-1)/k! h^{k-1}
    return math.fsum((-1) ** k * (k - 1) / math.factorial(k) * h ** (k - 1) for k in range(2, 80))


@pytest.mark.parametrize("h", [1e-300, 1e-9, 1e-4, 0.01, 0.3, 0.4999, 0.5, 0.9, 2.0, 5.0])
def test_weights_accurate_across_branches(h):
    d, w0, w1 = db.relaxation_weights(h, 1.0)
    assert w0 == pytest.approx(_w_start_series(h), rel=1e-14)
    assert w0 + w1 == pytest.approx(-math.expm1(-h), rel=1e-14)
    assert w0 >= 0 and w1 >= 0


def test_weights_stiff_limit_favors_endpoint():
    d, w0, w1 = db.relaxation_weights(1e3, 1.0)
    assert d == 0.0 and w0 == pytest.approx(1e-3) and w1 == pytest.approx(1 - 1e-3)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(1e-3, 10.0), st.floats(1e-3, 1.0),
    st.floats(0, 3), st.floats(0, 3), st.floats(0, 3), st.floats(-2, 2),
)
def test_semigroup_linear_forcing(mu, dt, a, b_slope, _, v0):
    # |u|^2 linear across both sub-steps
    p = DebyeParams(mu, -1)
    r = lambda t: a + b_slope * t
    two = db.debye_step(
        db.debye_step(rfield(v0), cfield(math.sqrt(r(0))), cfield(math.sqrt(r(dt))), dt, p),
        cfield(math.sqrt(r(dt))), cfield(math.sqrt(r(2 * dt))), dt, p,
    ).values
    one = db.debye_step(rfield(v0), cfield(math.sqrt(r(0))), cfield(math.sqrt(r(2 * dt))), 2 * dt, p).values
    assert np.allclose(two, one, rtol=1e-12, atol=1e-12 * (abs(v0) + a + b_slope))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(1e-3, 10.0), st.floats(1e-4, 5.0))
def test_positivity_transfer(seed, mu, dt):
    rng = np.random.default_rng(seed)
    v = RealField(SPEC, rng.uniform(0, 3, 16))
    u0 = ComplexField(SPEC, rng.normal(size=16) + 1j * rng.normal(size=16))
    u1 = ComplexField(SPEC, rng.normal(size=16) + 1j * rng.normal(size=16))
    assert np.all(db.debye_step(v, u0, u1, dt, DebyeParams(mu, 1)).values >= 0)


def test_mu_continuity():
    rng = np.random.default_rng(7)
    v = RealField(SPEC, rng.normal(size=16))
    u0 = ComplexField(SPEC, rng.normal(size=16) + 0j)
    u1 = ComplexField(SPEC, rng.normal(size=16) + 0j)
    mu, dt = 0.4, 0.3
    a = db.debye_step(v, u0, u1, dt, DebyeParams(mu, -1)).values
    b = db.debye_step(v, u0, u1, dt, DebyeParams(mu * (1 + 1e-6), -1)).values
    rel = np.max(np.abs(a - b)) / np.max(np.abs(a))
    assert 1e-9 < rel < 1e-5


def test_mean_v_matches_quadrature():
    from scipy.integrate import quad

    p = DebyeParams(0.3, -1)
    v0, rho, dt = 0.8, 1.3, 0.45
    vt = lambda s: -rho + (v0 + rho) * math.exp(-s / p.mu)
    ref = quad(vt, 0, dt)[0] / dt
    got = db.mean_v_constant_forcing(np.array([v0]), np.array([rho]), dt, p)[0]
    assert got == pytest.approx(ref, rel=1e-13)


def test_nls_limit_v():
    p = DebyeParams(0.0, -1)
    spec = GridSpec.cartesian(1, 1.0, 8)
    assert np.all(db.nls_limit_v(ComplexField(spec, np.zeros(8)), p).values == 0)
    u = np.zeros(8, complex)
    u[3] = 2.0 * np.exp(0.4j)
    assert db.nls_limit_v(ComplexField(spec, u), p).values[3] == pytest.approx(-4.0, rel=1e-15)
    with pytest.raises(ValueError):
        db.nls_limit_v(ComplexField(spec, u), DebyeParams(0.1, -1))


def test_l1_bound_endpoints():
    p = DebyeParams(0.2, 1)
    assert db.l1_bound(3.0, 1.25, 0.0, p.mu) == 1.25
    assert db.l1_bound(3.0, 1.25, 50.0, p.mu) == pytest.approx(3.0, abs=1e-12)
    assert db.l1_bound(3.0, 1.25, 0.0, 0.0) == 3.0


def test_l1_limit_approached_monotonically():
    # |u|^2 = c constant in time, v0 >= 0, lambda = +1
    spec = GridSpec.radial(3, 4.0, 64)
    r = spec.radius
    rho = np.exp(-r * r)
    u = ComplexField(spec, np.sqrt(rho))
    v = RealField(spec, 2.0 * np.exp(-2 * r * r))
    p = DebyeParams(0.1, 1)
    from sdebye.grid import integrate

    mass = integrate(RealField(spec, rho))
    v0_l1 = integrate(RealField(spec, np.abs(v.values)))
    gaps, t = [], 0.0
    for _ in range(400):
        v = db.debye_step(v, u, u, 0.01, p)
        t += 0.01
        rep = db.v_l1_bound_check(v, mass, v0_l1, t, p)
        # v stays nonnegative, so the bound is attained
        assert abs(rep.margin) < 1e-12
        gaps.append(abs(rep.v_l1 - mass))
    assert all(b <= a + 1e-14 for a, b in zip(gaps, gaps[1:]))
    assert gaps[0] > gaps[100] > gaps[200]
    assert gaps[-1] < 1e-12
