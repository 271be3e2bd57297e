"""The one-sided maximum principle and the triangular Dirichlet solver."""

from __future__ import annotations

import numpy as np

from discfrac.fracops import DirichletProblem, max_principle_check, solve_dirichlet
from discfrac.grid import Grid, GridFunction, geometric

# u vanishes at 0 and is non-negative to the right, so the operator is <= 0 there
u = GridFunction(Grid(1.0, -3, 6), [5.0, -2.0, 1.0, 0.0, 0.0, 2.0, 0.5, 0.0, 1.0, 0.0])
print(max_principle_check(u, 0, 0.5).to_json())

# prescribing (1-r)^alpha r^j on [0, 20) and r^j from 20 on recovers r^j
r, alpha = 0.5, 0.5
f = (1 - r) ** alpha * r ** np.arange(20)
sol = solve_dirichlet(DirichletProblem(alpha, 0, 20, f, geometric(Grid(1.0, 20, 20), r)))
print("max error against r^j:", float(np.max(np.abs(sol.u.take(0, 19) - r ** np.arange(20)))))

# a non-negative source with zero exterior data gives a non-negative solution
rng = np.random.default_rng(3)
f = rng.uniform(0, 1, size=12) * (rng.uniform(size=12) < 0.5)
sol = solve_dirichlet(DirichletProblem(0.7, 0, 12, f, GridFunction(Grid(1.0, 12, 12), [0.0])))
print("smallest solution value:", float(sol.u.values.min()), "slack:", sol.slack)
