"""Named initial-data families and their functionals."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as sint

from . import grid as g
from .debye import DebyeParams
from .diagnostics import energy_formB_arrays, variance_arrays
from .grid import ComplexField, GridSpec, RealField


class Provenance(str, enum.Enum):
    GAUSSIAN = "Gaussian"
    BESSE_BIDEGARAY = "BesseBidegaray"
    NEGATIVE_ENERGY_BUMP = "NegativeEnergyBump"
    CUSTOM = "Custom"


class V0Mode(str, enum.Enum):
    ZERO = "zero"
    MINUS_U_SQUARED = "minus_u_squared"


@dataclass(frozen=True)
class InitialData:
    u0: ComplexField
    v0: RealField
    provenance: Provenance = Provenance.CUSTOM

    def __post_init__(self):
        if self.u0.spec != self.v0.spec:
            raise ValueError("u0 and v0 must share one grid")

    @property
    def spec(self) -> GridSpec:
        return self.u0.spec

    @property
    def mass(self) -> float:
        return g.l2_norm(self.u0) ** 2


def _v0(u: np.ndarray, mode: V0Mode) -> np.ndarray:
    if V0Mode(mode) is V0Mode.ZERO:
        return np.zeros(u.shape)
    return -np.abs(u) ** 2


def gaussian(spec: GridSpec, amplitude: float = 1.0, width: float = 1.0,
             v0_mode: V0Mode = V0Mode.ZERO) -> InitialData:
    """u0 = A exp(-|x|^2 / w^2)."""
    if not (amplitude > 0 and width > 0):
        raise ValueError("amplitude and width must be positive")
    u = amplitude * np.exp(-(spec.radius ** 2) / width ** 2)
    mode = V0Mode(v0_mode)
    prov = Provenance.GAUSSIAN
    if amplitude == 1 and width == 1 and spec.dimension == 2 and mode is V0Mode.MINUS_U_SQUARED:
        prov = Provenance.BESSE_BIDEGARAY
    return InitialData(ComplexField(spec, u), RealField(spec, _v0(u, mode)), prov)


def besse_bidegaray(spec: GridSpec) -> InitialData:
    """u0 = exp(-(x^2 + y^2)), v0 = -|u0|^2."""
    return gaussian(spec, 1.0, 1.0, V0Mode.MINUS_U_SQUARED)


# ---------------------------------------------------------------------------
# compactly supported cutoff


def smoothstep_cutoff(s):
    """C^2 cutoff: 1 for s <= 1, 0 for s >= 2, quintic smoothstep between."""
    t = np.clip(np.asarray(s, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def smoothstep_cutoff_derivative(s):
    t = np.asarray(s, dtype=float) - 1.0
    inside = (t > 0) & (t < 1)
    return np.where(inside, -30.0 * t ** 2 * (1.0 - t) ** 2, 0.0)


@dataclass(frozen=True)
class CutoffIntegrals:
    I1: float  # int z^3 |phi'|^2
    I2: float  # int z^3 |phi|^4

    @property
    def threshold(self) -> float:
        """N* = sqrt(I1/I2); the bump energy is negative for N > N*."""
        return math.sqrt(self.I1 / self.I2)

    def energy(self, N: float) -> float:
        """omega_3 (N^2 I1 - N^4 I2)."""
        return g.sphere_area(4) * (N ** 2 * self.I1 - N ** 4 * self.I2)


def cutoff_integrals(phi=smoothstep_cutoff, dphi=smoothstep_cutoff_derivative) -> CutoffIntegrals:
    """I1, I2 by adaptive 1-D quadrature, split at the junctions s = 1, 2."""
    f1 = lambda z: z ** 3 * float(dphi(z)) ** 2
    f2 = lambda z: z ** 3 * float(phi(z)) ** 4
    i1 = sint.quad(f1, 1.0, 2.0, epsabs=0, epsrel=1e-13)[0]
    i2 = sum(sint.quad(f2, a, b, epsabs=0, epsrel=1e-13)[0] for a, b in ((0.0, 1.0), (1.0, 2.0)))
    return CutoffIntegrals(i1, i2)


def negative_energy_bump(spec: GridSpec, N: float,
                         profile: Callable = smoothstep_cutoff) -> InitialData:
    """u0 = phi(|x|/N^2)/N, v0 = -|u0|^2 on a 4-D radial grid."""
    if not (spec.is_radial and spec.dimension == 4):
        raise ValueError("negative_energy_bump needs a radial grid with n = 4")
    if spec.extent < 2 * N * N:
        raise ValueError(f"domain too small: need R >= 2 N^2 = {2 * N * N:g}")
    annulus_nodes = N * N / spec.step
    if annulus_nodes < 32:
        raise ValueError(
            f"transition annulus [N^2, 2N^2] resolved by {annulus_nodes:.1f} < 32 nodes"
        )
    u = profile(spec.radius / (N * N)) / N
    return InitialData(
        ComplexField(spec, u), RealField(spec, -np.abs(u) ** 2), Provenance.NEGATIVE_ENERGY_BUMP
    )


# ---------------------------------------------------------------------------
# functionals


def energy_functional(d: InitialData, p: DebyeParams) -> float:
    """E(0) = int |grad u0|^2 + 2 v0 |u0|^2 - lam v0^2."""
    return energy_formB_arrays(d.spec, d.u0.values, d.v0.values, p)


def variance(d) -> tuple[float, float]:
    """(h, h') for InitialData or a StepState."""
    u = d.u0 if isinstance(d, InitialData) else d.u
    return variance_arrays(u.spec, u.values)


# ---------------------------------------------------------------------------
# CSV interchange: header ``coord,re_u,im_u,v``, coordinate ascending

CSV_HEADER = ("coord", "re_u", "im_u", "v")


def data_to_csv(d: InitialData) -> str:
    spec = d.spec
    if not (spec.is_radial or spec.dimension == 1):
        raise ValueError("CSV interchange supports radial and 1-D grids only")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_HEADER)
    for x, u, v in zip(spec.axis, d.u0.values, d.v0.values):
        w.writerow([format(float(c), ".17g") for c in (x, u.real, u.imag, v)])
    return buf.getvalue()


def data_from_csv(text: str, spec: GridSpec) -> InitialData:
    """Read custom data and interpolate it linearly onto the grid nodes.

    Nodes outside the sampled coordinate range get zero.
    """
    if not (spec.is_radial or spec.dimension == 1):
        raise ValueError("CSV interchange supports radial and 1-D grids only")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != CSV_HEADER:
        raise ValueError(f"CSV header must be {','.join(CSV_HEADER)}")
    body = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    if body.size == 0:
        raise ValueError("CSV has no data rows")
    x = body[:, 0]
    if np.any(np.diff(x) <= 0):
        raise ValueError("CSV coordinates must be strictly ascending")
    nodes = spec.axis
    interp = lambda col: np.interp(nodes, x, body[:, col], left=0.0, right=0.0)
    if spec.is_radial and x[0] <= 0:
        interp = lambda col: np.interp(nodes, x, body[:, col], right=0.0)
    u = interp(1) + 1j * interp(2)
    return InitialData(ComplexField(spec, u), RealField(spec, interp(3)), Provenance.CUSTOM)
