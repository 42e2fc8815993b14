"""Exact-in-the-linear-part update of the relaxation variable v.

``mu v_t + v = lam |u|^2`` is integrated in closed form with ``|u|^2``
interpolated linearly in time (exponential trapezoidal rule), so constant and
linear forcing histories are reproduced exactly. ``mu = 0`` is a separate
branch (:func:`nls_limit_v`), never a limit of the exponential formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import ComplexField, RealField, integrate_array


@dataclass(frozen=True)
class DebyeParams:
    mu: float
    lam: int

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError("mu must be >= 0")
        if self.lam not in (-1, 1):
            raise ValueError("lambda must be -1 or +1")

    @property
    def nls_limit(self) -> bool:
        return self.mu == 0


def relaxation_weights(dt: float, mu: float) -> tuple[float, float, float]:
    """Weights (decay, w_start, w_end) of the exponential trapezoidal rule.

    ``v(t+dt) = decay*v(t) + lam*(w_start*|u_start|^2 + w_end*|u_end|^2)``.
    Both forcing weights are non-negative and sum to ``1 - decay``.
    """
    h = dt / mu
    decay = math.exp(-h)
    phi1 = -math.expm1(-h)  # 1 - e^{-h}
    if h < 0.5:
        # w_start = (1 - e^{-h}(1+h))/h = e^{-h} (e^h - 1 - h)/h, series avoids cancellation
        term, acc = 1.0, 0.0
        for k in range(2, 24):
            term *= h / k  # h^{k-1} / k!
            acc += term
        w_start = decay * acc
    else:
        w_start = (phi1 - h * decay) / h
    return decay, w_start, phi1 - w_start


def debye_step_array(v, rho_start, rho_end, dt: float, p: DebyeParams) -> np.ndarray:
    """Array kernel of :func:`debye_step`; ``rho`` are ``|u|^2`` samples."""
    decay, w0, w1 = relaxation_weights(dt, p.mu)
    return decay * v + p.lam * (w0 * rho_start + w1 * rho_end)


def debye_step(
    v: RealField, u_start: ComplexField, u_end: ComplexField, dt: float, p: DebyeParams
) -> RealField:
    """Advance v over ``dt`` given the endpoint values of u."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if p.nls_limit:
        raise ValueError("debye_step requires mu > 0; use nls_limit_v for mu = 0")
    if not (v.spec == u_start.spec == u_end.spec):
        raise ValueError("fields must share one grid")
    out = debye_step_array(
        v.values, np.abs(u_start.values) ** 2, np.abs(u_end.values) ** 2, dt, p
    )
    return RealField(v.spec, out)


def mean_v_constant_forcing(v, rho, dt: float, p: DebyeParams) -> np.ndarray:
    """Time average of v over a step with ``|u|^2 = rho`` frozen.

    This is the phase that the potential sub-step must apply for the
    ``(u, v)`` sub-flow to be solved exactly.
    """
    h = dt / p.mu
    target = p.lam * rho
    frac = -math.expm1(-h) / h if h > 1e-12 else 1.0 - h / 2.0
    return target + (v - target) * frac


def nls_limit_v(u: ComplexField, p: DebyeParams) -> RealField:
    """v = lam |u|^2, the instantaneous-response (cubic NLS) closure."""
    if not p.nls_limit:
        raise ValueError("nls_limit_v requires mu = 0")
    return RealField(u.spec, p.lam * np.abs(u.values) ** 2)


@dataclass(frozen=True)
class L1BoundReport:
    t: float
    v_l1: float
    bound: float
    margin: float
    passed: bool


def l1_bound(u0_mass: float, v0_l1: float, t: float, mu: float) -> float:
    """||u0||^2 + e^{-t/mu} (||v0||_{L^1} - ||u0||^2)."""
    if mu == 0:
        return u0_mass
    return u0_mass + math.exp(-t / mu) * (v0_l1 - u0_mass)


def v_l1_bound_check(
    v: RealField, u0_mass: float, v0_l1: float, t: float, p: DebyeParams, tol: float = 1e-6
) -> L1BoundReport:
    """Compare ``||v(t)||_{L^1}`` against the a-priori L^1 bound.

    ``margin = bound - ||v||_{L^1}``; the check passes when ``margin >= -tol``.
    """
    v_l1 = integrate_array(v.spec, np.abs(v.values))
    bound = l1_bound(u0_mass, v0_l1, t, p.mu)
    margin = bound - v_l1
    return L1BoundReport(t, v_l1, bound, margin, margin >= -tol)
