"""Closed-form calculators: bootstrap thresholds, local well-posedness
region, the relaxation-time rescaling and the negative-energy blow-up window.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy import integrate as sint
from scipy import optimize

from . import grid as g
from .grid import ComplexField, GridSpec, RealField


@dataclass(frozen=True)
class TheoryConstants:
    """Gagliardo-Nirenberg (n = 2, 3) and Sobolev (n = 4) constants.

    n = 2: ||f||_4^4 <= c2^4 ||f||^2 ||grad f||^2
    n = 3: ||f||_4^4 <= c3^4 ||f||   ||grad f||^3
    n = 4: ||f||_4   <= c4   ||grad f||
    """

    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0

    def __post_init__(self):
        for name in ("c2", "c3", "c4"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    return x


class _Report:
    def to_dict(self) -> dict:
        return {f.name: _json_value(getattr(self, f.name)) for f in fields(self)}


@dataclass
class BootstrapReport(_Report):
    dimension: int
    beta: float
    nu0: float | None
    gamma0: float | None
    gamma0_tilde: float | None
    x0: float | None
    conditions_met: dict = field(default_factory=dict)
    note: str = ""

    @property
    def ok(self) -> bool:
        return bool(self.conditions_met) and all(self.conditions_met.values())


def _bisect(f, a: float, b: float) -> float:
    """Bisection to adjacent floats; ``f(a) > 0 >= f(b)``."""
    for _ in range(2000):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if f(m) > 0:
            a = m
        else:
            b = m
    return a if abs(f(a)) <= abs(f(b)) else b


def bootstrap_3d(u0_mass: float, E0: float, grad_u0_sq: float,
                 c: TheoryConstants = TheoryConstants()) -> BootstrapReport:
    """Trapping interval for x = ||grad u||^2 under x <= E0 + nu0 x^{3/2}."""
    if u0_mass < 0:
        raise ValueError("u0_mass must be non-negative")
    beta = 4.0 / (27.0 * c.c3 ** 8)
    nu0 = c.c3 ** 4 * math.sqrt(u0_mass)
    x0 = 4.0 / (9.0 * nu0 ** 2) if nu0 > 0 else math.inf
    if E0 < 0:
        return BootstrapReport(
            3, beta, nu0, None, None, x0,
            {"energy_nonnegative": False, "mass_energy_below_beta": False, "gradient_within_gamma0": False},
            "negative energy is incompatible with the smallness condition",
        )
    small = u0_mass * E0 < beta
    conds = {"energy_nonnegative": True, "mass_energy_below_beta": small}
    if not small:
        conds["gradient_within_gamma0"] = False
        return BootstrapReport(3, beta, nu0, None, None, x0, conds, "f(x0) >= x0: no fixed point")
    F = lambda x: E0 + nu0 * x ** 1.5 - x
    if nu0 == 0:
        gamma0, gamma_t = E0, math.inf
    elif E0 == 0:
        gamma0, gamma_t = 0.0, 1.0 / nu0 ** 2
    else:
        gamma0 = _bisect(F, 0.0, x0)
        hi = 2.0 * x0
        while F(hi) <= 0:
            hi *= 2.0
        gamma_t = optimize.brentq(F, x0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    conds["gradient_within_gamma0"] = grad_u0_sq <= gamma0
    return BootstrapReport(3, beta, nu0, gamma0, gamma_t, x0, conds)


def bootstrap_3d_residual(r: BootstrapReport, E0: float) -> float:
    return abs(E0 + r.nu0 * r.gamma0 ** 1.5 - r.gamma0)


def bootstrap_4d(E0: float, grad_u0_sq: float,
                 c: TheoryConstants = TheoryConstants()) -> BootstrapReport:
    """Trapping level for x = ||grad u||^2 under x - c4^4 x^2 <= E0."""
    c4 = c.c4 ** 4
    beta = 1.0 / (4.0 * c4)
    conds = {"energy_nonnegative": E0 >= 0, "energy_below_beta": E0 < beta}
    if not (0 <= E0 < beta):
        conds["gradient_within_gamma0"] = False
        return BootstrapReport(4, beta, None, None, None, None, conds, "E0 outside [0, beta)")
    gamma0 = (1.0 - math.sqrt(1.0 - 4.0 * c4 * E0)) / (2.0 * c4)
    conds["gradient_within_gamma0"] = grad_u0_sq <= gamma0
    return BootstrapReport(4, beta, None, gamma0, None, None, conds)


# ---------------------------------------------------------------------------
# local well-posedness region


def lwp_region(n: int, s: float, kappa: float) -> bool:
    """Whether data in H^s x H^kappa fall in the proven local theory."""
    if n == 1:
        return abs(s) - 0.5 <= kappa < min(s + 0.5, 2 * s + 0.5) and s > -0.25
    if n in (2, 3):
        return max(0.0, s - 1) <= kappa <= min(2 * s, s + 1)
    if n == 4:
        return s == 1 and kappa == 1
    raise ValueError("n must be in 1..4")


# ---------------------------------------------------------------------------
# rescaling to mu = 1


def rescaled_spec(spec: GridSpec, mu: float, points: int | None = None) -> GridSpec:
    if not mu > 0:
        raise ValueError("mu must be positive")
    pts = spec.points if points is None else int(points)
    if pts < spec.points:
        raise ValueError(
            f"resampling onto {pts} < {spec.points} nodes would under-resolve the data"
        )
    return GridSpec(spec.kind, spec.dimension, spec.extent / math.sqrt(mu), pts)


def rescale_state(spec: GridSpec, u: np.ndarray, v: np.ndarray, mu: float,
                  t: float = 0.0, points: int | None = None):
    """(u, v)(x, t) -> (mu^1/2 u, mu v)(mu^1/2 x, mu t~); returns (spec~, u~, v~, t / mu).

    With the default node count, node j of the new grid sits at the image of
    node j of the old one, so no interpolation is involved.
    """
    new = rescaled_spec(spec, mu, points)
    su, sv = math.sqrt(mu) * u, mu * v
    if new.points != spec.points:
        su = _resample(spec, new, su, math.sqrt(mu))
        sv = _resample(spec, new, sv, math.sqrt(mu)).real
    return new, su, sv, t / mu


def _resample(old: GridSpec, new: GridSpec, f: np.ndarray, scale: float) -> np.ndarray:
    if not (old.is_radial or old.dimension == 1):
        raise ValueError("node-count changes are supported on radial and 1-D grids only")
    x_src = old.axis / scale
    re = np.interp(new.axis, x_src, np.real(f), left=0.0, right=0.0)
    im = np.interp(new.axis, x_src, np.imag(f), left=0.0, right=0.0)
    return re + 1j * im


def rescale_to_mu1(data, mu: float, points: int | None = None):
    """Initial data of the mu = 1 problem equivalent to ``data`` at relaxation time mu."""
    from .initial_data import InitialData

    if mu == 1 and points is None:
        return data
    spec, u, v, _ = rescale_state(data.spec, data.u0.values, data.v0.values, mu, 0.0, points)
    return InitialData(ComplexField(spec, u), RealField(spec, v), data.provenance)


def unscale_state(spec: GridSpec, u: np.ndarray, v: np.ndarray, mu: float, t: float = 0.0):
    """Inverse of :func:`rescale_state` (same node count)."""
    return rescale_state(spec, u, v, 1.0 / mu, t)


# ---------------------------------------------------------------------------
# blow-up window


@dataclass
class BlowupWindowReport(_Report):
    t0: float
    T0: float
    A: float
    B: float
    E0: float
    K: float
    mu_bound: float = 1.0  # t0 relies on e^{-t/mu} <= e^{-t} for t >= t0, i.e. mu < 1

    def g(self, t):
        """Bounding parabola (E0/8)(t-t0)^2 + B(t-t0) + A."""
        tau = np.asarray(t, dtype=float) - self.t0
        return self.E0 / 8.0 * tau ** 2 + self.B * tau + self.A


def transient_constant(data) -> float:
    """K = ||2 v0 + x . grad v0||_inf * ||u0||^2."""
    spec = data.spec
    v0 = data.v0.values
    w = 2.0 * v0 + np.real(g.x_dot_grad_array(spec, v0))
    return float(np.abs(w).max()) * data.mass


def window_start(K: float, E0: float) -> float:
    """Smallest t0 >= 0 with e^{-t0} K <= |E0|/2."""
    if not E0 < 0:
        raise ValueError("blow-up window requires E0 < 0")
    if K <= 0:
        return 0.0
    return max(0.0, math.log(2.0 * K / abs(E0)))


def parabola_root(E0: float, A: float, B: float) -> float:
    """Positive root of (E0/8) tau^2 + B tau + A, E0 < 0 < A."""
    a = E0 / 8.0
    disc = math.sqrt(B * B - 4.0 * a * A)
    if B >= 0:
        return (B + disc) / (-2.0 * a)
    return 2.0 * A / (disc - B)


def blowup_window(data, E0: float, A: float, B: float, K: float | None = None) -> BlowupWindowReport:
    if not E0 < 0:
        raise ValueError("no blow-up window: E0 must be negative")
    if not A > 0:
        raise ValueError("degenerate window: A must be positive")
    if K is None:
        K = transient_constant(data)
    t0 = window_start(K, E0)
    return BlowupWindowReport(t0, t0 + parabola_root(E0, A, B), A, B, E0, K)


# ---------------------------------------------------------------------------
# lower bounds on the interpolation constants


@dataclass
class GNEstimate(_Report):
    dimension: int
    constant: float
    exponent: float  # p of the maximizing profile exp(-r^p)


def _radial_moments(n: int, p: float) -> tuple[float, float, float]:
    """(||f||^2, ||grad f||^2, ||f||_4^4) for f = exp(-r^p) in R^n."""
    w = g.sphere_area(n)
    f2 = lambda r: r ** (n - 1) * math.exp(-2 * r ** p)
    d2 = lambda r: r ** (n - 1) * (p * r ** (p - 1)) ** 2 * math.exp(-2 * r ** p)
    f4 = lambda r: r ** (n - 1) * math.exp(-4 * r ** p)
    q = lambda h: sint.quad(h, 0, np.inf, limit=200)[0]
    return w * q(f2), w * q(d2), w * q(f4)


def gn_ratio(n: int, p: float) -> float:
    """The constant c_n forced by the profile exp(-r^p)."""
    m, d, l4 = _radial_moments(n, p)
    if n == 2:
        return (l4 / (m * d)) ** 0.25
    if n == 3:
        return (l4 / (math.sqrt(m) * d ** 1.5)) ** 0.25
    if n == 4:
        return l4 ** 0.25 / math.sqrt(d)
    raise ValueError("n must be 2, 3 or 4")


def estimate_gn_constant(n: int, p_range=(0.6, 8.0)) -> GNEstimate:
    """Best lower bound for c_n over the Gaussian / super-Gaussian family."""
    res = optimize.minimize_scalar(lambda p: -gn_ratio(n, p), bounds=p_range, method="bounded",
                                   options={"xatol": 1e-8})
    return GNEstimate(n, -float(res.fun), float(res.x))


def report_dict(r) -> dict:
    return r.to_dict() if hasattr(r, "to_dict") else _json_value(asdict(r))
