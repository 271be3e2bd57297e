"""Heat and Poisson semigroups, the extension problem and its Neumann trace."""

from __future__ import annotations

import numpy as np

from discfrac.grid import Grid, indicator
from discfrac.semigroups import extension_residual, heat_apply, neumann_limit, poisson_apply, poisson_limit_errors

spike = indicator(Grid(1.0, -6, 6), 0)
print("heat T_1 of a spike (right side):", np.round(heat_apply(spike, 1.0).values, 4))
print("Poisson P_1 with gamma=0.5:      ", np.round(poisson_apply(spike, 0.5, 1.0).values, 4))

print("boundary errors at t=0.1, 0.01, 0.001:", poisson_limit_errors(spike, 0.5, [0.1, 0.01, 0.001]))

r1 = extension_residual(spike, 0.5, 1.0, 0.02)
r2 = extension_residual(spike, 0.5, 1.0, 0.01)
print(f"extension residual ratio on halving dz: {r2 / r1:.3f} (second order gives 0.25)")

lim = neumann_limit(indicator(Grid(1.0, -3, 3), 0), 0.3)
for rec in lim.records():
    print(rec)
