"""Conserved, monotone and identity-bound quantities of a (u, v) state.

Everything here is a pure function of a state. The time derivative ``v_t``
entering the first energy form is taken from the relaxation equation,
``v_t = (lam |u|^2 - v) / mu``, never from differencing records.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import grid as g
from .debye import DebyeParams
from .grid import GridSpec

DEFAULT_HS_ORDERS = (0, 1, 2, 3, 4)


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    energy_formA: float
    energy_formB: float
    dE_dt_rhs: float
    h: float
    h_prime: float
    virial_rhs: float
    grad_u_l2: float
    u_linf: float
    u_l4: float
    v_l2: float
    v_l1: float
    v_grad_l2: float
    hs_norms: dict = field(default_factory=dict)
    boundary_leak: float = 0.0

    @property
    def energy(self) -> float:
        return self.energy_formB


RECORD_FIELDS = tuple(f.name for f in fields(DiagnosticsRecord))


def _boundary_width(points: int, fraction: float) -> int:
    return max(1, int(points * fraction))


def boundary_leak(spec: GridSpec, u: np.ndarray, fraction: float = 0.02) -> float:
    """max |u| over the outer frame (cartesian) or outer annulus (radial)."""
    a = np.abs(u)
    w = _boundary_width(spec.points, fraction)
    if spec.is_radial:
        return float(a[-w:].max())
    if spec.dimension == 1:
        return float(max(a[:w].max(), a[-w:].max()))
    return float(max(a[:w, :].max(), a[-w:, :].max(), a[:, :w].max(), a[:, -w:].max()))


def _hs_norms(spec: GridSpec, u: np.ndarray, orders, uh=None) -> dict:
    orders = sorted(set(int(s) for s in orders))
    if not orders:
        return {}
    if spec.is_radial:
        top = min(max(orders), g.MAX_RADIAL_SOBOLEV_ORDER)
        parts = np.cumsum(g.radial_derivative_norms_sq(spec, u, top))
        return {s: math.sqrt(parts[s]) for s in orders if s <= top}
    if uh is None:
        uh = g.fft(spec, u)
    p = np.abs(uh) ** 2
    vol = spec.step ** spec.dimension
    return {s: math.sqrt(vol * float(np.sum((1.0 + spec.k_squared) ** s * p))) for s in orders}


def virial_rhs_arrays(spec: GridSpec, u, v, p: DebyeParams, energy=None) -> float:
    """Second time derivative of the half-variance predicted by the virial identity.

    ``E + (n-2) int v|u|^2 + lam int v^2 + int (x . grad |u|^2) v``; with the
    focusing sign ``lam = -1`` the third term is ``-int v^2``.
    """
    rho = np.abs(u) ** 2
    if energy is None:
        energy = energy_formB_arrays(spec, u, v, p)
    n = spec.dimension
    return (
        energy
        + (n - 2) * g.integrate_array(spec, v * rho)
        + p.lam * g.integrate_array(spec, v * v)
        + g.integrate_array(spec, g.x_dot_grad_array(spec, rho) * v)
    )


def energy_formB_arrays(spec: GridSpec, u, v, p: DebyeParams, grad_sq=None) -> float:
    if grad_sq is None:
        grad_sq = g.gradient_norm_sq_array(spec, u)
    rho = np.abs(u) ** 2
    return grad_sq + g.integrate_array(spec, 2.0 * v * rho - p.lam * v * v)


def v_time_derivative(u, v, p: DebyeParams) -> np.ndarray:
    if p.nls_limit:
        return np.zeros_like(v)
    return (p.lam * np.abs(u) ** 2 - v) / p.mu


def variance_arrays(spec: GridSpec, u) -> tuple[float, float]:
    """(h, h') = (1/2 int |x|^2 |u|^2, Im int (x . grad u) conj(u))."""
    h = 0.5 * g.integrate_array(spec, spec.radius ** 2 * np.abs(u) ** 2)
    hp = g.integrate_array(spec, np.imag(g.x_dot_grad_array(spec, u) * np.conj(u)))
    return h, hp


def snapshot_arrays(
    spec: GridSpec, t: float, u, v, p: DebyeParams, hs_orders=DEFAULT_HS_ORDERS
) -> DiagnosticsRecord:
    rho = np.abs(u) ** 2
    uh = None if spec.is_radial else g.fft(spec, u)
    if uh is None:
        grad_sq = g.gradient_norm_sq_array(spec, u)
    else:
        grad_sq = float(spec.step ** spec.dimension * np.sum(spec.k_squared * np.abs(uh) ** 2))
    vt = v_time_derivative(u, v, p)
    int_vt2 = g.integrate_array(spec, vt * vt)
    int_rho2 = g.integrate_array(spec, rho * rho)
    form_a = grad_sq + p.lam * int_rho2 - p.lam * p.mu ** 2 * int_vt2
    form_b = energy_formB_arrays(spec, u, v, p, grad_sq=grad_sq)
    h, hp = variance_arrays(spec, u)
    return DiagnosticsRecord(
        t=float(t),
        mass=g.integrate_array(spec, rho),
        energy_formA=form_a,
        energy_formB=form_b,
        dE_dt_rhs=2.0 * p.lam * p.mu * int_vt2,
        h=h,
        h_prime=hp,
        virial_rhs=virial_rhs_arrays(spec, u, v, p, energy=form_b),
        grad_u_l2=math.sqrt(grad_sq),
        u_linf=float(np.sqrt(rho.max())),
        u_l4=int_rho2 ** 0.25,
        v_l2=math.sqrt(g.integrate_array(spec, v * v)),
        v_l1=g.integrate_array(spec, np.abs(v)),
        v_grad_l2=math.sqrt(g.gradient_norm_sq_array(spec, v)),
        hs_norms=_hs_norms(spec, u, hs_orders, uh),
        boundary_leak=boundary_leak(spec, u),
    )


def snapshot(state, cfg) -> DiagnosticsRecord:
    """Diagnostics of a :class:`~sdebye.stepper.StepState` under a run config."""
    return snapshot_arrays(
        state.u.spec, state.t, state.u.values, state.v.values, cfg.debye, cfg.hs_orders
    )


def virial_rhs(state, p: DebyeParams) -> float:
    return virial_rhs_arrays(state.u.spec, state.u.values, state.v.values, p)


# ---------------------------------------------------------------------------
# record-series checks


def _uniform_cadence(records, rtol=1e-8) -> float:
    if len(records) < 3:
        raise ValueError("at least 3 records are required")
    t = np.array([r.t for r in records])
    d = np.diff(t)
    if np.any(d <= 0) or np.ptp(d) > rtol * d.mean():
        raise ValueError("records must have a uniform time cadence")
    return float(d.mean())


@dataclass
class EnergyLawReport:
    cadence: float
    max_residual: float
    tolerance: float
    passed: bool
    residuals: np.ndarray

    def to_dict(self) -> dict:
        return {
            "cadence": self.cadence,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def energy_derivative_check(records, rel_tol: float = 1e-3, c_dt2: float = 1.0) -> EnergyLawReport:
    """Centered difference of E against ``2 lam mu int v_t^2`` at interior records.

    Tolerance is ``rel_tol * max|E| + c_dt2 * cadence^2``.
    """
    tau = _uniform_cadence(records)
    e = np.array([r.energy_formB for r in records])
    rhs = np.array([r.dE_dt_rhs for r in records])
    dedt = (e[2:] - e[:-2]) / (2.0 * tau)
    res = np.abs(dedt - rhs[1:-1])
    tol = rel_tol * float(np.abs(e).max()) + c_dt2 * tau ** 2
    mx = float(res.max())
    return EnergyLawReport(tau, mx, tol, mx <= tol, res)


def energy_monotone(records, lam: int, rel_tol: float = 1e-4) -> bool:
    """E non-increasing (lam = -1) or non-decreasing (lam = +1) up to ``rel_tol*|E0|``."""
    e = np.array([r.energy_formB for r in records])
    if len(e) < 2:
        return True
    slack = rel_tol * abs(e[0])
    steps = np.diff(e) * lam  # must be >= 0 up to slack
    return bool(np.all(steps >= -slack))


@dataclass
class VirialReport:
    cadence: float
    max_residual: float
    max_abs_rhs: float
    residuals: np.ndarray

    @property
    def relative(self) -> float:
        return self.max_residual / self.max_abs_rhs if self.max_abs_rhs else math.inf


def virial_residual(records) -> VirialReport:
    """Second difference of h across consecutive records against the virial RHS."""
    tau = _uniform_cadence(records)
    h = np.array([r.h for r in records])
    rhs = np.array([r.virial_rhs for r in records])
    d2h = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / tau ** 2
    res = np.abs(d2h - rhs[1:-1])
    return VirialReport(tau, float(res.max()), float(np.abs(rhs).max()), res)


@dataclass
class HeisenbergReport:
    mass: float
    bound: float
    ratio: float
    grad_lower_bound: float
    passed: bool


def heisenberg_check(record: DiagnosticsRecord, dimension: int, tol: float = 1e-6) -> HeisenbergReport:
    """``||u||^2 <= (2/n) || |x| u || ||grad u||``, the constant being 1/2 for n = 4.

    ``grad_lower_bound`` is the smallest ``||grad u||`` compatible with the
    inequality at the current mass and variance; it grows like ``h^{-1/2}``.
    """
    x_norm = math.sqrt(2.0 * record.h)
    c = 2.0 / dimension
    bound = c * x_norm * record.grad_u_l2
    ratio = record.mass / bound if bound > 0 else (math.inf if record.mass > 0 else 0.0)
    lower = record.mass / (c * x_norm) if x_norm > 0 else math.inf
    return HeisenbergReport(record.mass, bound, ratio, lower, record.mass <= bound * (1 + tol))


def record_row(rec: DiagnosticsRecord, hs_orders) -> list:
    row = []
    for name in RECORD_FIELDS:
        if name == "hs_norms":
            row.extend(rec.hs_norms.get(s, math.nan) for s in hs_orders)
        else:
            row.append(getattr(rec, name))
    return row


def csv_header(hs_orders) -> list[str]:
    cols = []
    for name in RECORD_FIELDS:
        if name == "hs_norms":
            cols.extend(f"hs_{s}" for s in hs_orders)
        else:
            cols.append(name)
    return cols


def _fmt(x) -> str:
    return format(float(x), ".17g")


def records_to_csv(records, hs_orders=None) -> str:
    """RFC-4180 CSV, one row per record, 17 significant digits."""
    if hs_orders is None:
        hs_orders = sorted({s for r in records for s in r.hs_norms})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(csv_header(hs_orders))
    for r in records:
        w.writerow([_fmt(x) for x in record_row(r, hs_orders)])
    return buf.getvalue()


def records_from_csv(text: str) -> list[DiagnosticsRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    out = []
    for row in body:
        vals = dict(zip(header, row))
        hs = {int(k[3:]): float(v) for k, v in vals.items() if k.startswith("hs_")}
        kw = {k: float(vals[k]) for k in RECORD_FIELDS if k != "hs_norms"}
        out.append(DiagnosticsRecord(hs_norms=hs, **kw))
    return out
