"""Strang-split time integration of the Schrodinger-Debye system.

One step is ``L(dt/2) N(dt) L(dt/2)``. ``L`` is the free Schrodinger flow
(exact Fourier multiplier, or Crank-Nicolson on radial grids). ``N`` is the
local sub-flow ``i u_t = v u``, ``mu v_t + v = lam |u|^2``. Along ``N``, |u|
is frozen, so v follows the relaxation ODE with constant forcing and the phase is
the time average of v. Both are applied in closed form, so ``N`` is exact and
the composition is symmetric (time-reversible), hence second order.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import lapack

from . import grid as g
from .debye import DebyeParams, debye_step_array, mean_v_constant_forcing
from .diagnostics import DEFAULT_HS_ORDERS, DiagnosticsRecord, snapshot_arrays
from .grid import ComplexField, GridSpec, RealField

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    grid: GridSpec
    debye: DebyeParams
    dt_init: float
    t_end: float
    dt_min: float = 1e-12
    blowup_grad_threshold: float | None = None  # default: 1e3 * initial ||grad u||
    blowup_sup_threshold: float | None = None  # default: 1e3 * initial ||u||_inf
    diag_every: int = 1
    boundary_leak_tol: float = 1e-6
    hs_orders: tuple = DEFAULT_HS_ORDERS
    growth_limit: float = 0.25
    max_halvings: int = 40
    blowup_factor: float = 1e3

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init):
            raise ValueError("need 0 < dt_min <= dt_init")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        for thr in (self.blowup_grad_threshold, self.blowup_sup_threshold):
            if thr is not None and not thr > 0:
                raise ValueError("blow-up thresholds must be positive")
        if self.diag_every < 1:
            raise ValueError("diag_every must be >= 1")
        if self.grid.is_radial:
            object.__setattr__(
                self,
                "hs_orders",
                tuple(s for s in self.hs_orders if s <= g.MAX_RADIAL_SOBOLEV_ORDER),
            )


@dataclass(frozen=True)
class StepState:
    t: float
    u: ComplexField
    v: RealField
    dt: float
    step_index: int = 0


class Outcome(str, enum.Enum):
    COMPLETED = "Completed"
    BLOWUP = "BlowupDetected"
    BOUNDARY_LEAK = "BoundaryLeak"


@dataclass
class RunResult:
    outcome: Outcome
    records: list[DiagnosticsRecord]
    final: StepState
    event_time: float | None = None
    reason: str = ""
    steps: int = 0
    halvings: int = 0

    @property
    def blowup_time(self) -> float | None:
        return self.event_time if self.outcome is Outcome.BLOWUP else None


class Propagator:
    """Cached linear operators for one step size."""

    def __init__(self, spec: GridSpec, dt: float):
        self.spec = spec
        self.dt = dt
        if spec.is_radial:
            # (W - i a S) u' = (W + i a S) u with a = dt/8: CN over dt/2 for u_t = (i/2) Lap u
            a = dt / 8.0
            diag, off = spec.stiffness_bands
            self._diag, self._off, self._a = diag, off, a
            d = spec.weights - 1j * a * diag
            o = -1j * a * off
            dl, dd, du, du2, ipiv, info = lapack.zgttrf(o.copy(), d, o.copy())
            assert info == 0, "singular Crank-Nicolson matrix"
            self._lu = (dl, dd, du, du2, ipiv)
        else:
            self.multiplier = np.exp(-0.25j * dt * spec.k_squared)

    def half(self, u: np.ndarray) -> np.ndarray:
        if self.spec.is_radial:
            return self._cn(u)
        return g.ifft(self.spec, self.multiplier * g.fft(self.spec, u))

    def _cn(self, u: np.ndarray) -> np.ndarray:
        s = self._diag * u
        s[:-1] += self._off * u[1:]
        s[1:] += self._off * u[:-1]
        rhs = self.spec.weights * u + 1j * self._a * s
        x, info = lapack.zgttrs(*self._lu, rhs)
        assert info == 0
        return x

    def step(self, u: np.ndarray, v: np.ndarray, p: DebyeParams):
        """One Strang step; returns ``(u, v, grad_sq)`` at ``t + dt``."""
        dt = self.dt
        u1 = self.half(u)
        rho = np.abs(u1) ** 2
        if p.nls_limit:
            u2 = potential_step_array(u1, p.lam * rho, dt)
        else:
            vbar = mean_v_constant_forcing(v, rho, dt, p)
            # |u| is invariant under the phase step, so the corrector pass of the
            # Debye update sees the same endpoint forcing as the predictor
            v = debye_step_array(v, rho, rho, dt, p)
            u2 = potential_step_array(u1, vbar, dt)
        spec = self.spec
        if spec.is_radial:
            u3 = self._cn(u2)
            grad_sq = g.gradient_norm_sq_array(spec, u3)
        else:
            uh = self.multiplier * g.fft(spec, u2)
            u3 = g.ifft(spec, uh)
            grad_sq = float(spec.step ** spec.dimension * np.sum(spec.k_squared * np.abs(uh) ** 2))
        if p.nls_limit:
            v = p.lam * np.abs(u3) ** 2
        return u3, v, grad_sq


def potential_step_array(u: np.ndarray, v: np.ndarray, dt: float) -> np.ndarray:
    return u * np.exp(-1j * v * dt)


def linear_half_step(u: ComplexField, dt: float) -> ComplexField:
    """exp(i (dt/2) Lap/2) applied to u."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return ComplexField(u.spec, Propagator(u.spec, dt).half(u.values))


def potential_step(u: ComplexField, v: RealField, dt: float) -> ComplexField:
    """u * exp(-i v dt), exact for v frozen over the step."""
    if u.spec != v.spec:
        raise ValueError("fields must share one grid")
    return ComplexField(u.spec, potential_step_array(u.values, v.values, dt))


def strang_step(s: StepState, cfg: SimConfig, prop: Propagator | None = None) -> StepState:
    if prop is None or prop.dt != s.dt:
        prop = Propagator(s.u.spec, s.dt)
    u, v, _ = prop.step(s.u.values, s.v.values, cfg.debye)
    return StepState(
        s.t + s.dt,
        ComplexField(s.u.spec, u),
        RealField(s.u.spec, v),
        s.dt,
        s.step_index + 1,
    )


def initial_state(cfg: SimConfig, data, t_start: float = 0.0) -> StepState:
    if data.u0.spec != cfg.grid:
        raise ValueError("initial data grid does not match the configured grid")
    v0 = data.v0
    if cfg.debye.nls_limit:
        v0 = RealField(cfg.grid, cfg.debye.lam * np.abs(data.u0.values) ** 2)
    return StepState(float(t_start), data.u0, v0, cfg.dt_init, 0)


def run(cfg: SimConfig, data, observer=None, t_start: float = 0.0) -> RunResult:
    """Integrate to ``t_end`` or to detected blow-up / boundary leakage.

    ``observer(t, u, v)`` is called with the raw arrays at every record.
    ``t_start`` offsets the clock, for resuming from a saved state.
    """
    spec, p = cfg.grid, cfg.debye
    if t_start > cfg.t_end:
        raise ValueError("t_start lies beyond t_end")
    st = initial_state(cfg, data, t_start)
    u, v = st.u.values, st.v.values

    def record(t, u, v):
        if observer is not None:
            observer(t, u, v)
        return snapshot_arrays(spec, t, u, v, p, cfg.hs_orders)

    records = [record(st.t, u, v)]
    r0 = records[0]
    grad_thr = cfg.blowup_grad_threshold
    if grad_thr is None:
        grad_thr = cfg.blowup_factor * r0.grad_u_l2 if r0.grad_u_l2 > 0 else math.inf
    sup_thr = cfg.blowup_sup_threshold
    if sup_thr is None:
        sup_thr = cfg.blowup_factor * r0.u_linf if r0.u_linf > 0 else math.inf

    t, dt, k = st.t, cfg.dt_init, 0
    halvings = 0
    grad_old, sup_old = r0.grad_u_l2, r0.u_linf
    props: dict[float, Propagator] = {}

    def finish(outcome, event=None, reason=""):
        final = StepState(t, ComplexField(spec, u), RealField(spec, v), dt, k)
        return RunResult(outcome, records, final, event, reason, k, halvings)

    if r0.boundary_leak > cfg.boundary_leak_tol:
        return finish(Outcome.BOUNDARY_LEAK, t, "initial data touches the boundary")

    snap = 1e-6  # relative: remainders within snap * dt are absorbed, not stepped
    # t = t_base + n_at_dt * dt, so records sit on an exact lattice between halvings
    t_base, n_at_dt = t, 0
    while cfg.t_end - t > snap * dt:
        step = dt
        partial = cfg.t_end - t < dt * (1 + snap)
        if partial:
            step = cfg.t_end - t
        tries = 0
        while True:
            prop = props.get(step)
            if prop is None:
                prop = props.setdefault(step, Propagator(spec, step))
            with np.errstate(all="ignore"):
                u_new, v_new, grad_sq = prop.step(u, v, p)
            ok = math.isfinite(grad_sq) and np.all(np.isfinite(u_new))
            if ok:
                grad_new = math.sqrt(grad_sq)
                sup_new = float(np.abs(u_new).max())
                grew = (grad_old > 0 and grad_new > (1 + cfg.growth_limit) * grad_old) or (
                    sup_old > 0 and sup_new > (1 + cfg.growth_limit) * sup_old
                )
                if not grew:
                    break
            tries += 1
            halvings += 1
            dt = step = step / 2.0
            partial = False
            t_base, n_at_dt = t, 0
            if tries > cfg.max_halvings or dt < cfg.dt_min:
                return finish(Outcome.BLOWUP, t, "step size underflow")
        if len(props) > 8:
            props = {step: prop}
        if partial:
            t = cfg.t_end
        else:
            n_at_dt += 1
            t = t_base + n_at_dt * dt
            if abs(cfg.t_end - t) <= snap * step:
                t = cfg.t_end
        k += 1
        u, v = u_new, v_new
        grad_old, sup_old = grad_new, sup_new
        if grad_new > grad_thr or sup_new > sup_thr:
            records.append(record(t, u, v))
            which = "gradient" if grad_new > grad_thr else "sup"
            log.info("blow-up detected at t=%.6g (%s threshold)", t, which)
            return finish(Outcome.BLOWUP, t, f"{which} threshold crossed")
        at_end = t >= cfg.t_end
        if k % cfg.diag_every == 0 or at_end:
            rec = record(t, u, v)
            records.append(rec)
            if rec.boundary_leak > cfg.boundary_leak_tol:
                return finish(Outcome.BOUNDARY_LEAK, t, "boundary values exceed tolerance")
    return finish(Outcome.COMPLETED)


def with_dt(cfg: SimConfig, dt: float) -> SimConfig:
    return replace(cfg, dt_init=dt, dt_min=min(cfg.dt_min, dt))
