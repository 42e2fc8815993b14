"""Focusing run in 2D: watch the pseudo-energy decay and the variance bend.

The relaxing medium drains energy at the rate 2*lambda*mu*int v_t^2, and the
half-variance h obeys a second-order identity. Both are checked here from
the record series of one modest run.

    python3 demos/energy_and_virial.py
"""

from sdebye import diagnostics as dg
from sdebye import initial_data as idata
from sdebye import stepper as sp
from sdebye.debye import DebyeParams
from sdebye.grid import GridSpec

spec = GridSpec.cartesian(2, 12.0, 128)
data = idata.besse_bidegaray(spec)
cfg = sp.SimConfig(spec, DebyeParams(0.1, -1), dt_init=2e-3, t_end=1.0, hs_orders=())
res = sp.run(cfg, data)

print(f"outcome: {res.outcome.value} after {res.steps} steps")
for r in res.records[::100]:
    print(f"  t={r.t:5.2f}  mass={r.mass:.12f}  E={r.energy_formB: .6f}  h={r.h:.6f}")

law = dg.energy_derivative_check(res.records)
vir = dg.virial_residual(res.records)
print(f"energy law: max residual {law.max_residual:.2e} (tolerance {law.tolerance:.2e})")
print(f"virial:     max residual {vir.max_residual:.2e}, relative {vir.relative:.2e}")
print(f"energy non-increasing: {dg.energy_monotone(res.records, -1)}")
