"""Config-driven scenarios and their on-disk outputs.

A scenario maps one JSON config to a summary dict plus a set of named text
files (record CSVs, tables). :func:`emit` writes them together with
``summary.json`` and ``provenance.txt``. Nothing here depends on wall-clock
time or randomness, so equal configs give byte-identical outputs.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import platform
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import diagnostics as dg
from . import grid as g
from . import initial_data as idata
from . import theory as th
from .debye import DebyeParams, l1_bound
from .grid import GridSpec
from .stepper import Outcome, RunResult, SimConfig, run

SCHEMA = 1


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class EmitError(OSError):
    """Output could not be written."""


class Scenario(str, enum.Enum):
    RUN = "Run"
    MU_SWEEP = "MuSweep"
    VIRIAL_CHECK = "VirialCheck"
    RESCALE_CHECK = "RescaleCheck"
    GWP_TRAP_3D = "GwpTrap3D"
    GWP_TRAP_4D = "GwpTrap4D"
    BLOWUP_WINDOW = "BlowupWindow"
    REGIONS = "Regions"
    NEG_DATA = "NegData"


COMMANDS = {
    "run": (Scenario.RUN,),
    "sweep": (Scenario.MU_SWEEP,),
    "virial-check": (Scenario.VIRIAL_CHECK,),
    "rescale-check": (Scenario.RESCALE_CHECK,),
    "gwp-trap": (Scenario.GWP_TRAP_3D, Scenario.GWP_TRAP_4D),
    "blowup-window": (Scenario.BLOWUP_WINDOW,),
    "regions": (Scenario.REGIONS,),
    "negdata": (Scenario.NEG_DATA,),
}

_NEEDS_SIM = {
    Scenario.RUN, Scenario.MU_SWEEP, Scenario.VIRIAL_CHECK, Scenario.RESCALE_CHECK,
    Scenario.GWP_TRAP_3D, Scenario.GWP_TRAP_4D, Scenario.BLOWUP_WINDOW,
}


@dataclass
class ExperimentConfig:
    scenario: Scenario
    sim: SimConfig | None
    data: dict
    sweep: list = field(default_factory=list)
    output_dir: str | None = None
    constants: th.TheoryConstants = th.TheoryConstants()
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    base_dir: Path = Path(".")


# ---------------------------------------------------------------------------
# parsing


def _get(d: dict, key: str, kind, default=None, required=False):
    if key not in d or d[key] is None:
        if required:
            raise ConfigError(f"missing required key '{key}'")
        return default
    val = d[key]
    try:
        if kind is int:
            if isinstance(val, bool) or float(val) != int(val):
                raise ValueError
            return int(val)
        if kind is float:
            if isinstance(val, bool):
                raise ValueError
            return float(val)
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"key '{key}' has invalid value {val!r}") from None


def _grid(d: dict) -> GridSpec:
    if not isinstance(d, dict):
        raise ConfigError("'grid' must be an object")
    kind = str(d.get("kind", "cartesian")).lower()
    kinds = {"cartesian": g.CARTESIAN, "cartesianperiodic": g.CARTESIAN, "radial": g.RADIAL}
    if kind not in kinds:
        raise ConfigError(f"unknown grid kind {d.get('kind')!r}")
    try:
        return GridSpec(
            kinds[kind],
            _get(d, "dimension", int, required=True),
            _get(d, "extent", float, required=True),
            _get(d, "points", int, required=True),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"grid: {e}") from None


def _debye(d: dict) -> DebyeParams:
    try:
        return DebyeParams(_get(d, "mu", float, required=True), _get(d, "lambda", int, -1))
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"debye: {e}") from None


def _sim(raw: dict) -> SimConfig:
    spec = _grid(raw.get("grid"))
    p = _debye(raw.get("debye") or {})
    tm = raw.get("time") or {}
    bl = raw.get("blowup") or {}
    kw = {}
    if "hs_orders" in raw:
        try:
            kw["hs_orders"] = tuple(int(s) for s in raw["hs_orders"])
        except (TypeError, ValueError):
            raise ConfigError("hs_orders must be a list of integers") from None
        if any(s < 0 for s in kw["hs_orders"]):
            raise ConfigError("hs_orders must be non-negative")
    dt = _get(tm, "dt", float, required=True)
    try:
        return SimConfig(
            grid=spec,
            debye=p,
            dt_init=dt,
            t_end=_get(tm, "t_end", float, required=True),
            dt_min=_get(tm, "dt_min", float, min(1e-12, dt)),
            diag_every=_get(tm, "diag_every", int, 1),
            blowup_grad_threshold=_get(bl, "grad_threshold", float),
            blowup_sup_threshold=_get(bl, "sup_threshold", float),
            blowup_factor=_get(bl, "factor", float, 1e3),
            max_halvings=_get(bl, "max_halvings", int, 40),
            boundary_leak_tol=_get(raw, "boundary_leak_tol", float, 1e-6),
            **kw,
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"sim: {e}") from None


def _scenario_name(s) -> Scenario:
    s = str(s)
    for sc in Scenario:
        if s == sc.value or s.lower() == sc.value.lower():
            return sc
    if s in COMMANDS and len(COMMANDS[s]) == 1:
        return COMMANDS[s][0]
    raise ConfigError(f"unknown scenario {s!r}")


def parse_config(raw: dict, command: str | None = None, base_dir: Path | str = ".") -> ExperimentConfig:
    """Validate a config document; ``command`` is the CLI subcommand, if any."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    sc = _scenario_name(raw["scenario"]) if raw.get("scenario") is not None else None
    if command is not None:
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        allowed = COMMANDS[command]
        if sc is None:
            sc = allowed[0]
            if command == "gwp-trap":
                dim = (raw.get("grid") or {}).get("dimension")
                sc = Scenario.GWP_TRAP_4D if dim == 4 else Scenario.GWP_TRAP_3D
        elif sc not in allowed:
            raise ConfigError(f"config scenario {sc.value} does not match command '{command}'")
    if sc is None:
        raise ConfigError("config has no 'scenario' and no command was given")

    sim = _sim(raw) if sc in _NEEDS_SIM else None
    data = raw.get("data") or {}
    if sc in _NEEDS_SIM and not data:
        raise ConfigError("missing 'data' descriptor")
    sweep = []
    if sc is Scenario.MU_SWEEP:
        sweep = raw.get("sweep")
        if not isinstance(sweep, list) or not sweep:
            raise ConfigError("'sweep' must be a nonempty list of mu values")
        try:
            sweep = [float(m) for m in sweep]
        except (TypeError, ValueError):
            raise ConfigError("sweep entries must be numbers") from None
        if any(m < 0 for m in sweep):
            raise ConfigError("sweep mu values must be >= 0")
    cst = raw.get("constants") or {}
    try:
        constants = th.TheoryConstants(**{k: float(cst[k]) for k in ("c2", "c3", "c4") if k in cst})
    except ValueError as e:
        raise ConfigError(f"constants: {e}") from None
    if sc in (Scenario.GWP_TRAP_3D, Scenario.GWP_TRAP_4D):
        want = 3 if sc is Scenario.GWP_TRAP_3D else 4
        if sim.grid.dimension != want:
            raise ConfigError(f"{sc.value} needs a {want}-D grid")
    if sc is Scenario.VIRIAL_CHECK and sim.debye.lam != -1:
        raise ConfigError("virial-check requires lambda = -1")
    if sc is Scenario.RESCALE_CHECK and not sim.debye.mu > 0:
        raise ConfigError("rescale-check requires mu > 0")
    return ExperimentConfig(
        scenario=sc,
        sim=sim,
        data=dict(data),
        sweep=sweep,
        output_dir=raw.get("output_dir"),
        constants=constants,
        options=dict(raw.get("options") or {}),
        raw=raw,
        base_dir=Path(base_dir),
    )


def load_config(path, command: str | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise EmitError(f"cannot read config {path}: {e.strerror or e}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    return parse_config(raw, command, path.parent)


def build_data(desc: dict, spec: GridSpec, base_dir: Path | str = ".") -> idata.InitialData:
    fam = str(desc.get("family", "gaussian")).lower()
    try:
        if fam == "gaussian":
            return idata.gaussian(
                spec,
                _get(desc, "amplitude", float, 1.0),
                _get(desc, "width", float, 1.0),
                idata.V0Mode(desc.get("v0_mode", "zero")),
            )
        if fam in ("besse_bidegaray", "bessebidegaray"):
            return idata.besse_bidegaray(spec)
        if fam in ("negative_energy_bump", "negativeenergybump"):
            return idata.negative_energy_bump(spec, _get(desc, "N", float, required=True))
        if fam in ("csv", "custom"):
            path = Path(base_dir) / str(desc.get("path", ""))
            try:
                text = path.read_text()
            except OSError as e:
                raise EmitError(f"cannot read data file {path}: {e.strerror or e}") from None
            return idata.data_from_csv(text, spec)
    except (ConfigError, EmitError):
        raise
    except ValueError as e:
        raise ConfigError(f"data: {e}") from None
    raise ConfigError(f"unknown data family {desc.get('family')!r}")


# ---------------------------------------------------------------------------
# run analysis


def _fin(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def hs_maxima(records) -> dict:
    orders = sorted({s for r in records for s in r.hs_norms})
    return {str(s): _fin(max(r.hs_norms.get(s, -math.inf) for r in records)) for s in orders}


def form_agreement(records) -> float:
    worst = 0.0
    for r in records:
        diff = abs(r.energy_formA - r.energy_formB)
        scale = abs(r.energy_formB)
        worst = max(worst, diff / scale if scale > 0 else diff)
    return worst


def l1_margins(records, p: DebyeParams) -> np.ndarray:
    r0 = records[0]
    t0 = r0.t
    return np.array(
        [l1_bound(r0.mass, r0.v_l1, r.t - t0, p.mu) - r.v_l1 for r in records]
    )


def heisenberg_tol(spec: GridSpec) -> float:
    """1e-6, plus dr^2 on radial grids where Gaussians (the equality case) sit at 1 + O(dr^2)."""
    return 1e-6 + (spec.step ** 2 if spec.is_radial else 0.0)


def analyze(result: RunResult, p: DebyeParams, spec: GridSpec) -> dict:
    """Identity and bound checks over one run's record series."""
    rec = result.records
    dimension = spec.dimension
    m0 = rec[0].mass
    drift = max(abs(r.mass - m0) for r in rec) / m0 if m0 > 0 else 0.0
    out = {
        "outcome": result.outcome.value,
        "event_time": _fin(result.event_time),
        "reason": result.reason,
        "steps": result.steps,
        "halvings": result.halvings,
        "records": len(rec),
        "t_final": rec[-1].t,
        "mass_initial": m0,
        "mass_max_rel_drift": drift,
        "energy_initial": rec[0].energy_formB,
        "energy_final": rec[-1].energy_formB,
        "energy_monotone": dg.energy_monotone(rec, p.lam),
        "energy_form_max_rel_diff": form_agreement(rec),
    }
    try:
        law = dg.energy_derivative_check(rec)
        out["energy_law"] = law.to_dict()
    except ValueError:
        out["energy_law"] = None
    try:
        vr = dg.virial_residual(rec)
        out["virial"] = {"cadence": vr.cadence, "max_residual": vr.max_residual,
                         "max_abs_rhs": vr.max_abs_rhs, "relative": _fin(vr.relative)}
    except ValueError:
        out["virial"] = None
    margins = l1_margins(rec, p)
    out["l1_bound_min_margin"] = float(margins.min())
    out["l1_bound_passed"] = bool(margins.min() >= -1e-6)
    hz = [dg.heisenberg_check(r, dimension, heisenberg_tol(spec)) for r in rec if r.mass > 0]
    out["heisenberg_min_bound_over_mass"] = _fin(min((1.0 / h.ratio for h in hz if h.ratio > 0), default=None))
    out["heisenberg_passed"] = all(h.passed for h in hz)
    out["boundary_leak_max"] = max(r.boundary_leak for r in rec)
    out["grad_growth"] = max(r.grad_u_l2 for r in rec) / rec[0].grad_u_l2 if rec[0].grad_u_l2 > 0 else None
    out["hs_max"] = hs_maxima(rec)
    return out


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class ScenarioResult:
    summary: dict
    files: dict = field(default_factory=dict)  # name -> text
    refused: bool = False


def _header(cfg: ExperimentConfig) -> dict:
    return {"schema": SCHEMA, "scenario": cfg.scenario.value}


def _data(cfg: ExperimentConfig, spec: GridSpec | None = None):
    return build_data(cfg.data, spec or cfg.sim.grid, cfg.base_dir)


def _csv(result: RunResult, cfg: SimConfig) -> str:
    return dg.records_to_csv(result.records, cfg.hs_orders)


def scenario_run(cfg: ExperimentConfig) -> ScenarioResult:
    d = _data(cfg)
    res = run(cfg.sim, d)
    s = _header(cfg)
    s["provenance"] = d.provenance.value
    s.update(analyze(res, cfg.sim.debye, cfg.sim.grid))
    return ScenarioResult(s, {"records.csv": _csv(res, cfg.sim)})


def _window_overlay(d, records, E0: float, slack: float = 0.1) -> dict | None:
    """t0/T0 for this run, with A, B read off the record nearest t0."""
    if not E0 < 0:
        return None
    K = th.transient_constant(d)
    t0 = th.window_start(K, E0)
    times = np.array([r.t for r in records])
    i = int(np.argmin(np.abs(times - t0)))
    A, B = records[i].h, records[i].h_prime
    if not A > 0:
        return None
    w = th.blowup_window(d, E0, A, B, K)
    return {**w.to_dict(), "t0_record": records[i].t, **h_vs_g(records, w, slack)}


def h_vs_g(records, w: th.BlowupWindowReport, slack: float = 0.1, t_stop: float | None = None) -> dict:
    stop = w.T0 if t_stop is None else min(w.T0, t_stop)
    sel = [r for r in records if w.t0 - 1e-12 <= r.t <= stop + 1e-12]
    ok = all(0 < r.h <= float(w.g(r.t)) * (1 + slack) for r in sel)
    return {"h_below_g": bool(ok), "h_vs_g_records": len(sel), "h_slack": slack}


def mu_sweep(cfg: ExperimentConfig) -> ScenarioResult:
    base = cfg.sim
    d = _data(cfg)
    files = {}
    max_samples = int(cfg.options.get("nls_samples", 64))
    order = sorted(range(len(cfg.sweep)), key=lambda i: cfg.sweep[i] != 0.0)
    nls_ref: dict[float, np.ndarray] = {}
    results = {}
    est = max(1, math.ceil(base.t_end / base.dt_init / base.diag_every))
    stride = max(1, math.ceil(est / max_samples))
    for i in order:
        mu = cfg.sweep[i]
        entry = {"mu": mu}
        dist = []

        def observer(t, u, v, _mu=mu, _count=[0]):
            k = _count[0]
            _count[0] += 1
            if k % stride:
                return
            if _mu == 0.0:
                nls_ref[t] = np.array(u)
            elif t in nls_ref:
                dist.append(g.l2_norm(g.ComplexField(base.grid, u - nls_ref[t])))

        try:
            sim = replace(base, debye=DebyeParams(mu, base.debye.lam))
            res = run(sim, d, observer=observer)
            a = analyze(res, sim.debye, sim.grid)
            entry.update(
                outcome=a["outcome"],
                blowup_time=_fin(res.blowup_time),
                event_time=a["event_time"],
                hs_max=a["hs_max"],
                grad_growth=a["grad_growth"],
                mass_max_rel_drift=a["mass_max_rel_drift"],
                energy_monotone=a["energy_monotone"],
                energy_initial=a["energy_initial"],
            )
            if nls_ref and mu != 0.0:
                entry["nls_sup_l2_distance"] = max(dist) if dist else None
                entry["nls_samples"] = len(dist)
            E0 = a["energy_initial"]
            entry["window"] = _window_overlay(d, res.records, E0) if mu < 1 else None
            files[f"mu_{i:02d}.csv"] = _csv(res, sim)
        except (ValueError, FloatingPointError, ArithmeticError) as e:
            entry["error"] = f"{type(e).__name__}: {e}"
        results[i] = entry
    s = _header(cfg)
    s["provenance"] = d.provenance.value
    s["entries"] = [results[i] for i in range(len(cfg.sweep))]
    return ScenarioResult(s, files)


def _convergence(values: list[float]) -> list:
    return [
        (math.log2(a / b) if a > 0 and b > 0 else None) for a, b in zip(values, values[1:])
    ]


def virial_check(cfg: ExperimentConfig) -> ScenarioResult:
    base = cfg.sim
    dts = cfg.options.get("dt_values") or [base.dt_init, base.dt_init / 2.0]
    d = _data(cfg)
    rows, files = [], {}
    for i, dt in enumerate(dts):
        sim = replace(base, dt_init=float(dt), dt_min=min(base.dt_min, float(dt)))
        res = run(sim, d)
        if res.outcome is not Outcome.COMPLETED:
            raise ConfigError(f"virial-check run at dt={dt:g} ended with {res.outcome.value}")
        try:
            vr = dg.virial_residual(res.records)
            law = dg.energy_derivative_check(res.records)
        except ValueError as e:
            raise ConfigError(f"virial-check: {e}") from None
        rows.append({
            "dt": float(dt),
            "virial_max_residual": vr.max_residual,
            "virial_max_abs_rhs": vr.max_abs_rhs,
            "virial_relative": vr.relative,
            "energy_law_max_residual": law.max_residual,
            "energy_law_tolerance": law.tolerance,
            "h_prime_initial": res.records[0].h_prime,
        })
        files[f"dt_{i:02d}.csv"] = _csv(res, sim)
    s = _header(cfg)
    s["runs"] = rows
    s["virial_order"] = _convergence([r["virial_max_residual"] for r in rows])
    s["energy_law_order"] = _convergence([r["energy_law_max_residual"] for r in rows])
    return ScenarioResult(s, files)


def _terminal(sim: SimConfig, d, t_end: float, dt: float):
    cfg = replace(sim, dt_init=dt, dt_min=min(sim.dt_min, dt), t_end=t_end,
                  diag_every=max(1, round(t_end / dt)))
    res = run(cfg, d)
    if res.outcome is not Outcome.COMPLETED:
        raise ConfigError(f"rescale-check run ended with {res.outcome.value}")
    return res.final.u.values, res.final.v.values


def rescale_check(cfg: ExperimentConfig) -> ScenarioResult:
    """Evolve at mu and, on rescaled data, at mu = 1; compare at matched time."""
    sim = cfg.sim
    mu, spec, dt = sim.debye.mu, sim.grid, sim.dt_init
    T = sim.t_end
    d = _data(cfg)
    dr = th.rescale_to_mu1(d, mu)
    sim1 = replace(sim, grid=dr.spec, debye=DebyeParams(1.0, sim.debye.lam))
    l2 = lambda a, b: g.l2_norm(g.ComplexField(spec, a - b))

    u_a, _ = _terminal(sim, d, T, dt)
    u_a2, _ = _terminal(sim, d, T, dt / 2)
    err_a = l2(u_a, u_a2) * 4.0 / 3.0

    # same step size in each run's own clock
    u_b, v_b = _terminal(sim1, dr, T / mu, dt)
    u_b2, v_b2 = _terminal(sim1, dr, T / mu, dt / 2)
    back = lambda u, v: th.unscale_state(dr.spec, u, v, mu)[1]
    ub, ub2 = back(u_b, v_b), back(u_b2, v_b2)
    err_b = l2(ub, ub2) * 4.0 / 3.0
    disc = l2(u_a, ub)

    # conjugate step dt/mu: the two discrete flows coincide up to roundoff
    u_c, v_c = _terminal(sim1, dr, T / mu, dt / mu)
    disc_conj = l2(u_a, back(u_c, v_c))

    err = max(err_a, err_b)
    s = _header(cfg)
    s.update({
        "mu": mu,
        "t_physical": T,
        "t_rescaled": T / mu,
        "dt": dt,
        "mass_original": d.mass,
        "mass_rescaled": dr.mass,
        "mass_ratio": dr.mass / d.mass,
        "mass_ratio_expected": mu ** (1 - spec.dimension / 2),
        "richardson_error_original": err_a,
        "richardson_error_rescaled": err_b,
        "terminal_l2_discrepancy": disc,
        "discrepancy_over_error": disc / err if err > 0 else None,
        "passed": bool(disc < 5.0 * err),
        "conjugate_dt_discrepancy": disc_conj,
        "conjugate_passed": bool(disc_conj < 5.0 * min(err_a, err_b)),
    })
    return ScenarioResult(s)


def gwp_trap(cfg: ExperimentConfig) -> ScenarioResult:
    sim, c = cfg.sim, cfg.constants
    n = sim.grid.dimension
    d = _data(cfg)
    E0 = idata.energy_functional(d, sim.debye)
    grad0 = g.gradient_norm_sq(d.u0)
    if n == 3:
        rep = th.bootstrap_3d(d.mass, E0, grad0, c)
    else:
        rep = th.bootstrap_4d(E0, grad0, c)
    s = _header(cfg)
    s.update({"E0": E0, "mass": d.mass, "grad_u0_sq": grad0, "bootstrap": rep.to_dict()})
    if sim.debye.lam != -1 or not rep.ok:
        failed = [k for k, v in rep.conditions_met.items() if not v]
        if sim.debye.lam != -1:
            failed.insert(0, "lambda_is_minus_one")
        s["refused"] = "bootstrap conditions not met: " + ", ".join(failed)
        return ScenarioResult(s, refused=True)
    tol = float(cfg.options.get("trap_tol", 1e-2))
    res = run(sim, d)
    phi = np.array([r.grad_u_l2 ** 2 for r in res.records])
    gamma0 = rep.gamma0
    ratio = float(phi.max() / gamma0) if gamma0 > 0 else (0.0 if phi.max() == 0 else math.inf)
    s["run"] = analyze(res, sim.debye, sim.grid)
    s["max_phi_over_gamma0"] = _fin(ratio)
    s["trap_tol"] = tol
    s["trap_held"] = bool(ratio <= 1 + tol) and res.outcome is Outcome.COMPLETED
    if n == 4:
        bound = g.l2_norm(d.v0) + c.c4 ** 2 * gamma0
        vmax = max(r.v_l2 for r in res.records)
        s["v_l2_max"] = vmax
        s["v_l2_bound"] = bound
        s["v_bound_held"] = bool(vmax <= bound * (1 + tol))
    return ScenarioResult(s, {"records.csv": _csv(res, sim)})


def blowup_window_scenario(cfg: ExperimentConfig) -> ScenarioResult:
    """Locate (t0, T0) for negative-energy data and compare h against g."""
    sim = cfg.sim
    d = _data(cfg)
    p = sim.debye
    E0 = idata.energy_functional(d, p)
    s = _header(cfg)
    s["E0"] = E0
    if not E0 < 0:
        s["refused"] = "no blow-up window: E0 must be negative"
        return ScenarioResult(s, refused=True)
    K = th.transient_constant(d)
    t0 = th.window_start(K, E0)
    factor = float(cfg.options.get("run_factor", 2.0))
    slack = float(cfg.options.get("h_slack", 0.1))
    r0 = dg.snapshot_arrays(sim.grid, 0.0, d.u0.values, d.v0.values, p, sim.hs_orders)
    thr = dict(
        blowup_grad_threshold=sim.blowup_grad_threshold or sim.blowup_factor * r0.grad_u_l2,
        blowup_sup_threshold=sim.blowup_sup_threshold or sim.blowup_factor * r0.u_linf,
    )
    base = replace(sim, **thr)
    records = [r0]
    res1 = None
    if t0 > 0:
        res1 = run(replace(base, t_end=t0), d)
        records = res1.records
        if res1.outcome is not Outcome.COMPLETED:
            s["refused"] = f"run ended before t0 with {res1.outcome.value}"
            s["t0"] = t0
            s["K"] = K
            return ScenarioResult(s, {"records.csv": dg.records_to_csv(records, sim.hs_orders)}, True)
    A, B = records[-1].h, records[-1].h_prime
    w = th.blowup_window(d, E0, A, B, K)
    t_end = factor * w.T0
    if "max_time" in cfg.options:
        t_end = min(t_end, float(cfg.options["max_time"]))
    start = d
    if res1 is not None:
        start = idata.InitialData(res1.final.u, res1.final.v, d.provenance)
    res2 = run(replace(base, t_end=max(t_end, t0)), start, t_start=t0)
    records = records + res2.records[1:]
    event = res2.event_time if res2.outcome is not Outcome.COMPLETED else None
    merged = RunResult(res2.outcome, records, res2.final, res2.event_time, res2.reason,
                       res2.steps + (res1.steps if res1 else 0),
                       res2.halvings + (res1.halvings if res1 else 0))
    a = analyze(merged, p, sim.grid)
    grad0 = records[0].grad_u_l2
    exceed = next((r.t for r in records if r.grad_u_l2 > 10 * grad0), None)
    upto = [r.grad_u_l2 for r in records if exceed is None or r.t <= exceed]
    top = g.MAX_RADIAL_SOBOLEV_ORDER if sim.grid.is_radial else max(sim.hs_orders, default=0)
    hs_top = [r.hs_norms.get(top) for r in records if top in r.hs_norms]
    s.update(w.to_dict())
    s.update({
        "mu": p.mu,
        "mu_within_validity": bool(p.mu < w.mu_bound),
        "t_end": t_end,
        "run": a,
        **h_vs_g(records, w, slack, event),
        "grad_exceeded_10x_at": exceed,
        "grad_monotone_before_exceed": bool(np.all(np.diff(upto) >= 0)),
        "blowup_before_T0": bool(event is not None and merged.outcome is Outcome.BLOWUP and event <= w.T0),
        "hs_top_order": top,
        "hs_top_growth": _fin(max(hs_top) / hs_top[0]) if hs_top and hs_top[0] else None,
    })
    return ScenarioResult(s, {"records.csv": dg.records_to_csv(records, sim.hs_orders)})


def _linspace(spec, name):
    try:
        a, b, k = spec
        return np.linspace(float(a), float(b), int(k))
    except (TypeError, ValueError):
        raise ConfigError(f"regions scan '{name}' must be [start, stop, count]") from None


def regions(cfg: ExperimentConfig) -> ScenarioResult:
    opts = cfg.raw.get("regions") or {}
    pts = [tuple(p) for p in opts.get("points", [])]
    scan = opts.get("scan")
    if scan:
        n = _get(scan, "n", int, required=True)
        for s_ in _linspace(scan.get("s"), "s"):
            for k_ in _linspace(scan.get("kappa"), "kappa"):
                pts.append((n, float(s_), float(k_)))
    if not pts:
        raise ConfigError("regions: give 'points', a 'scan', or --n --s --kappa")
    rows = []
    for p in pts:
        if len(p) != 3:
            raise ConfigError(f"regions point {p!r} must be [n, s, kappa]")
        try:
            n, s_, k_ = int(p[0]), float(p[1]), float(p[2])
            inside = th.lwp_region(n, s_, k_)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"regions point {p!r}: {e}") from None
        rows.append({"n": n, "s": s_, "kappa": k_, "inside": inside})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["n", "s", "kappa", "inside"])
    for r in rows:
        w.writerow([r["n"], format(r["s"], ".17g"), format(r["kappa"], ".17g"), int(r["inside"])])
    s = _header(cfg)
    s["points"] = rows
    return ScenarioResult(s, {"regions.csv": buf.getvalue()})


def bump_grid(N: float, nodes_per_N2: int, margin: float = 1.25) -> GridSpec:
    """Radial 4-D grid with dr = N^2 / m, so node values do not depend on N."""
    dr = N * N / nodes_per_N2
    M = int(math.ceil(2 * margin * nodes_per_N2))
    return GridSpec.radial(4, M * dr, M)


def grid_cutoff_integrals(nodes_per_N2: int, margin: float = 1.25) -> idata.CutoffIntegrals:
    """Discrete I1, I2: at fixed nodes per N^2 the grid energy is exactly N^2 a - N^4 b."""
    w = g.sphere_area(4)
    d = idata.negative_energy_bump(bump_grid(1.0, nodes_per_N2, margin), 1.0)
    grad = g.gradient_norm_sq(d.u0)
    quart = g.integrate_array(d.spec, np.abs(d.u0.values) ** 4)
    return idata.CutoffIntegrals(grad / w, quart / w)


def negdata(cfg: ExperimentConfig) -> ScenarioResult:
    opts = cfg.raw.get("negdata") or {}
    Ns = [float(x) for x in opts.get("N_values", [1.0, 2.0, 2.5, 3.0, 4.0])]
    refs = [int(m) for m in opts.get("nodes_per_N2", [32, 64, 128, 256])]
    margin = float(opts.get("margin", 1.25))
    if any(m < 32 for m in refs):
        raise ConfigError("nodes_per_N2 must be >= 32 (annulus resolution)")
    exact = idata.cutoff_integrals()
    p = DebyeParams(0.0, -1)
    energies = []
    for N in Ns:
        m = refs[-1]
        d = idata.negative_energy_bump(bump_grid(N, m, margin), N)
        e = idata.energy_functional(d, p)
        e_ref = exact.energy(N)
        energies.append({"N": N, "nodes_per_N2": m, "energy_grid": e, "energy_formula": e_ref,
                         "rel_error": abs(e - e_ref) / abs(e_ref), "negative": bool(e < 0)})
    thresholds = []
    for m in refs:
        ci = grid_cutoff_integrals(m, margin)
        thresholds.append({"nodes_per_N2": m, "I1": ci.I1, "I2": ci.I2, "N_star": ci.threshold,
                           "error": abs(ci.threshold - exact.threshold)})
    within = None
    if len(thresholds) >= 2:
        fine, coarse = thresholds[-1], thresholds[-2]
        within = bool(fine["error"] <= abs(fine["N_star"] - coarse["N_star"]))
    s = _header(cfg)
    s.update({
        "I1": exact.I1,
        "I2": exact.I2,
        "N_star": exact.threshold,
        "omega3": g.sphere_area(4),
        "energies": energies,
        "max_energy_rel_error": max(e["rel_error"] for e in energies),
        "thresholds": thresholds,
        "N_star_within_one_refinement": within,
    })
    return ScenarioResult(s)


RUNNERS = {
    Scenario.RUN: scenario_run,
    Scenario.MU_SWEEP: mu_sweep,
    Scenario.VIRIAL_CHECK: virial_check,
    Scenario.RESCALE_CHECK: rescale_check,
    Scenario.GWP_TRAP_3D: gwp_trap,
    Scenario.GWP_TRAP_4D: gwp_trap,
    Scenario.BLOWUP_WINDOW: blowup_window_scenario,
    Scenario.REGIONS: regions,
    Scenario.NEG_DATA: negdata,
}


def execute(cfg: ExperimentConfig) -> ScenarioResult:
    return RUNNERS[cfg.scenario](cfg)


# ---------------------------------------------------------------------------
# emission


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _fin(x)
    if isinstance(x, enum.Enum):
        return x.value
    return x


def summary_json(summary: dict) -> str:
    return json.dumps(_clean(summary), indent=2, allow_nan=False) + "\n"


def provenance_text(cfg: ExperimentConfig) -> str:
    lines = [
        f"sdebye {__version__}",
        f"scenario: {cfg.scenario.value}",
        f"python: {platform.python_version()}",
        f"numpy: {np.__version__}",
        f"scipy: {scipy.__version__}",
        "config:",
        json.dumps(cfg.raw, indent=2, sort_keys=True, default=str),
        "",
    ]
    return "\n".join(lines)


def _write(path: Path, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise EmitError(f"cannot write {path}: {e.strerror or e}") from None


def emit(result: ScenarioResult, cfg: ExperimentConfig, output_dir) -> list[Path]:
    """Write run CSVs, ``summary.json`` and ``provenance.txt`` under ``output_dir``."""
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise EmitError(f"cannot create output directory {out}: {e.strerror or e}") from None
    written = []
    for name, text in sorted(result.files.items()):
        _write(out / name, text)
        written.append(out / name)
    _write(out / "summary.json", summary_json(result.summary))
    _write(out / "provenance.txt", provenance_text(cfg))
    return written + [out / "summary.json", out / "provenance.txt"]
