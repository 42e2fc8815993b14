"""Relaxation time rescales away.

(u, v) at relaxation time mu maps to a mu = 1 solution on a grid stretched
by mu^{-1/2}, with time stretched by 1/mu. Stepping the mu = 1 problem with
dt/mu reproduces the original discrete flow to rounding.

    python3 demos/rescaling.py
"""

from sdebye import grid as g
from sdebye import initial_data as idata
from sdebye import stepper as sp
from sdebye import theory as th
from sdebye.debye import DebyeParams
from sdebye.grid import ComplexField, GridSpec

mu, T, dt = 0.25, 0.5, 4e-3
spec = GridSpec.cartesian(2, 12.0, 128)
data = idata.besse_bidegaray(spec)
a = sp.run(sp.SimConfig(spec, DebyeParams(mu, -1), dt_init=dt, t_end=T, diag_every=10 ** 6), data)

scaled = th.rescale_to_mu1(data, mu)
print(f"extent {spec.extent} -> {scaled.spec.extent}; mass ratio {scaled.mass / data.mass:.12f}")
b = sp.run(sp.SimConfig(scaled.spec, DebyeParams(1.0, -1), dt_init=dt / mu, t_end=T / mu,
                        diag_every=10 ** 6), scaled)
_, u_back, _, t_back = th.unscale_state(scaled.spec, b.final.u.values, b.final.v.values, mu, b.final.t)
gap = g.l2_norm(ComplexField(spec, a.final.u.values - u_back))
print(f"matched time {t_back}: L2 gap between the two runs = {gap:.3e}")
