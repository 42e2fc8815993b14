import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdebye import grid as g
from sdebye.grid import ComplexField, GridSpec, RealField

import oracles as o


# -- spec validation ---------------------------------------------------------

@pytest.mark.parametrize(
    "args",
    [
        ("cartesian", 3, 1.0, 64),
        ("radial", 1, 1.0, 64),
        ("radial", 5, 1.0, 64),
        ("cartesian", 1, 1.0, 100),
        ("cartesian", 1, 1.0, 4),
        ("radial", 3, 0.0, 64),
        ("radial", 3, -1.0, 64),
        ("radial", 3, 1.0, 7),
        ("spherical", 3, 1.0, 64),
    ],
)
def test_gridspec_rejects_invalid(args):
    with pytest.raises(ValueError):
        GridSpec(*args)


def test_radial_points_need_not_be_power_of_two():
    assert GridSpec.radial(3, 1.0, 100).shape == (100,)


def test_field_shape_and_finiteness():
    spec = GridSpec.cartesian(2, 1.0, 8)
    with pytest.raises(ValueError):
        ComplexField(spec, np.zeros(8))
    bad = np.zeros((8, 8))
    bad[1, 1] = np.nan
    with pytest.raises(FloatingPointError):
        RealField(spec, bad)
    f = RealField(spec, np.zeros((8, 8)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_cartesian_coordinates_centered():
    spec = GridSpec.cartesian(1, 4.0, 8)
    assert spec.axis[4] == 0.0
    assert spec.axis[0] == -4.0
    assert spec.step == 1.0


# -- integrate -----------------------------------------------------------------

def test_unit_ball_volume_4d():
    spec = GridSpec.radial(4, 1.0, 400)
    vol = g.integrate(RealField(spec, np.ones(400)))
    # shell volumes tile the ball of radius R - dr/2 exactly
    assert vol == pytest.approx(math.pi ** 2 / 2 * (1 - 0.5 / 400) ** 4, rel=1e-13)
    assert vol == pytest.approx(math.pi ** 2 / 2, rel=2.0 / 400)


def test_integrate_zero():
    for spec in (GridSpec.radial(3, 2.0, 32), GridSpec.cartesian(2, 2.0, 16)):
        assert g.integrate(RealField(spec, np.zeros(spec.shape))) == 0.0


def test_gaussian_integral_3d_against_fine_trapezoid():
    ref = o.radial_trapezoid(lambda r: np.exp(-r * r), 3, 8.0, nodes=1_000_000)
    spec = GridSpec.radial(3, 8.0, 4096)
    val = g.integrate(RealField(spec, np.exp(-spec.radius ** 2)))
    assert abs(val - ref) / ref < 1e-6


def test_quadrature_refinement_second_order():
    f = lambda r: np.exp(-r * r) * (1 + r * r)
    ref = o.radial_quad(f, 3, 0.0, 8.0)
    errs = []
    for m in (256, 512, 1024):
        spec = GridSpec.radial(3, 8.0, m)
        errs.append(abs(g.integrate(RealField(spec, f(spec.radius))) - ref))
    assert 3.5 < errs[0] / errs[1] < 4.5
    assert 3.5 < errs[1] / errs[2] < 4.5


# -- laplacian -----------------------------------------------------------------

def test_plane_wave_eigenfunction():
    spec = GridSpec.cartesian(2, math.pi, 32)
    x, y = spec.coords
    u = np.exp(1j * (3 * x - 2 * y))
    lap = g.laplacian(ComplexField(spec, u)).values
    assert np.max(np.abs(lap + 13 * u)) < 1e-11


def test_radial_constant_interior_zero():
    spec = GridSpec.radial(3, 5.0, 100)
    lap = g.laplacian(ComplexField(spec, np.ones(100))).values
    assert np.max(np.abs(lap[:-1])) < 1e-12  # last node feels the Dirichlet wall


@pytest.mark.parametrize("n", [2, 3, 4])
def test_radial_laplacian_gaussian_second_order(n):
    errs = []
    for m in (400, 800, 1600):
        spec = GridSpec.radial(n, 8.0, m)
        r = spec.radius
        lap = g.laplacian(ComplexField(spec, np.exp(-r * r))).values.real
        exact = (4 * r * r - 2 * n) * np.exp(-r * r)
        errs.append(np.max(np.abs(lap - exact)[: m - 1]))
    assert 3.6 < errs[0] / errs[1] < 4.4
    assert 3.6 < errs[1] / errs[2] < 4.4


def test_radial_origin_is_n_times_urr():
    spec = GridSpec.radial(3, 8.0, 4000)
    lap0 = g.laplacian(ComplexField(spec, np.exp(-spec.radius ** 2))).values[0].real
    assert lap0 == pytest.approx(-6.0, rel=1e-5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(["c1", "c2", "r2", "r3", "r4"]))
def test_self_adjointness(seed, kind):
    rng = np.random.default_rng(seed)
    spec = {
        "c1": GridSpec.cartesian(1, 3.0, 32),
        "c2": GridSpec.cartesian(2, 3.0, 16),
        "r2": GridSpec.radial(2, 3.0, 40),
        "r3": GridSpec.radial(3, 3.0, 40),
        "r4": GridSpec.radial(4, 3.0, 40),
    }[kind]
    u = rng.normal(size=spec.shape) + 1j * rng.normal(size=spec.shape)
    w = rng.normal(size=spec.shape) + 1j * rng.normal(size=spec.shape)
    U, W = ComplexField(spec, u), ComplexField(spec, w)
    lhs = g.inner(g.laplacian(U), W)
    rhs = g.inner(U, g.laplacian(W))
    assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([1, 2]))
def test_parseval(seed, dim):
    rng = np.random.default_rng(seed)
    spec = GridSpec.cartesian(dim, 2.5, 32)
    u = rng.normal(size=spec.shape) + 1j * rng.normal(size=spec.shape)
    lhs = g.integrate(RealField(spec, np.abs(u) ** 2))
    rhs = spec.step ** dim * np.sum(np.abs(g.fft(spec, u)) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-12)


# -- gradient and Sobolev norms --------------------------------------------------

def test_gradient_of_constant():
    spec = GridSpec.cartesian(2, 3.0, 16)
    assert g.gradient_norm_sq(ComplexField(spec, np.full(spec.shape, 2.0))) == pytest.approx(0, abs=1e-20)


def test_gaussian_gradient_2d_closed_form():
    spec = GridSpec.cartesian(2, 12.0, 256)
    u = np.exp(-spec.radius ** 2)
    val = g.gradient_norm_sq(ComplexField(spec, u))
    assert abs(val / o.gaussian_grad_sq(1, 1, 2) - 1) < 1e-6


@pytest.mark.parametrize("spec", [GridSpec.cartesian(2, 10.0, 128), GridSpec.radial(3, 10.0, 800)])
def test_integration_by_parts(spec):
    r = spec.radius
    u = ComplexField(spec, np.exp(-r * r) * (1 + 0.3j * r * r))
    ibp = -g.inner(g.laplacian(u), u).real
    assert g.gradient_norm_sq(u) == pytest.approx(ibp, rel=1e-10)


def test_sobolev_s0_and_s1_cartesian():
    spec = GridSpec.cartesian(2, 10.0, 128)
    u = ComplexField(spec, np.exp(-spec.radius ** 2 + 0.2j * spec.coords[0]))
    assert g.sobolev_norm(u, 0) == pytest.approx(g.l2_norm(u), rel=1e-13)
    assert g.sobolev_norm(u, 1) == pytest.approx(
        math.sqrt(g.l2_norm(u) ** 2 + g.gradient_norm_sq(u)), rel=1e-13
    )


def test_sobolev_s2_gaussian_closed_form():
    spec = GridSpec.cartesian(2, 12.0, 256)
    u = ComplexField(spec, np.exp(-spec.radius ** 2))
    assert g.sobolev_norm(u, 2) ** 2 == pytest.approx(o.gaussian_h2_sq(1, 1, 2), rel=1e-5)


def test_radial_sobolev_limits():
    spec = GridSpec.radial(3, 6.0, 200)
    u = ComplexField(spec, np.exp(-spec.radius ** 2))
    with pytest.raises(ValueError):
        g.sobolev_norm(u, 5)
    with pytest.raises(ValueError):
        g.sobolev_norm(u, -1)
    assert g.sobolev_norm(u, 0) == pytest.approx(g.l2_norm(u), rel=1e-13)
    assert g.sobolev_norm(u, 1) ** 2 == pytest.approx(
        g.l2_norm(u) ** 2 + g.gradient_norm_sq(u), rel=1e-13
    )


def test_radial_sobolev_proxy_converges():
    # ||u||^2 + ||u'||^2 + ||u''||^2 for exp(-r^2) in 3-D, by quadrature
    f0 = lambda r: np.exp(-2 * r * r)
    f1 = lambda r: (2 * r) ** 2 * np.exp(-2 * r * r)
    f2 = lambda r: (4 * r * r - 2) ** 2 * np.exp(-2 * r * r)
    ref = sum(o.radial_quad(f, 3, 0, 10) for f in (f0, f1, f2))
    spec = GridSpec.radial(3, 10.0, 4000)
    val = g.sobolev_norm(ComplexField(spec, np.exp(-spec.radius ** 2)), 2) ** 2
    assert val == pytest.approx(ref, rel=1e-4)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_sobolev_monotone_in_s(seed):
    rng = np.random.default_rng(seed)
    for spec in (GridSpec.cartesian(1, 3.0, 32), GridSpec.radial(4, 3.0, 30)):
        u = ComplexField(spec, rng.normal(size=spec.shape) + 1j * rng.normal(size=spec.shape))
        norms = [g.sobolev_norm(u, s) for s in range(5)]
        assert all(a <= b * (1 + 1e-14) for a, b in zip(norms, norms[1:]))


def test_lp_and_x_dot_grad():
    spec = GridSpec.radial(2, 10.0, 2000)
    r = spec.radius
    f = RealField(spec, np.exp(-r * r))
    assert g.lp_norm(f, 2) == pytest.approx(g.l2_norm(f), rel=1e-13)
    xg = g.x_dot_grad(f).values
    assert np.max(np.abs(xg - (-2 * r * r * np.exp(-r * r)))) < 1e-4
    spec2 = GridSpec.cartesian(2, 10.0, 128)
    u = ComplexField(spec2, np.exp(-spec2.radius ** 2))
    exact = -2 * spec2.radius ** 2 * np.exp(-spec2.radius ** 2)
    assert np.max(np.abs(g.x_dot_grad(u).values - exact)) < 1e-10
