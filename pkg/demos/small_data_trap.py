"""Small data stay trapped below the bootstrap level.

For a 3D Gaussian of small amplitude the bootstrap calculator returns the
threshold gamma0; a run then shows ||grad u||^2 never climbing above it.

    python3 demos/small_data_trap.py
"""

from sdebye import grid as g
from sdebye import initial_data as idata
from sdebye import stepper as sp
from sdebye import theory as th
from sdebye.debye import DebyeParams
from sdebye.grid import GridSpec

spec = GridSpec.radial(3, 40.0, 2048)
p = DebyeParams(0.1, -1)
data = idata.gaussian(spec, amplitude=0.3)

E0 = idata.energy_functional(data, p)
rep = th.bootstrap_3d(data.mass, E0, g.gradient_norm_sq(data.u0))
print(f"mass={data.mass:.4f}  E0={E0:.4f}  beta={rep.beta:.4f}")
print(f"gamma0={rep.gamma0:.4f}  x0={rep.x0:.4f}  gamma0~={rep.gamma0_tilde:.4f}")
print("conditions:", rep.conditions_met)

res = sp.run(sp.SimConfig(spec, p, dt_init=2e-3, t_end=5.0, diag_every=50, hs_orders=()), data)
peak = max(r.grad_u_l2 ** 2 for r in res.records)
print(f"run {res.outcome.value}: max ||grad u||^2 / gamma0 = {peak / rep.gamma0:.3f}")
