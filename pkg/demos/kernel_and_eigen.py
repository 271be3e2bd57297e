"""The fractional-difference kernel and the exact action on geometric sequences.

Run with ``python demos/kernel_and_eigen.py``.
"""

from __future__ import annotations

import math

from discfrac.coefficients import lambda_coeffs, tail_mass_estimate
from discfrac.fracops import frac_right
from discfrac.grid import Grid, geometric

alpha = 0.3
table = lambda_coeffs(alpha, 10**5)
print(f"first kernel weights for alpha={alpha}:", [round(float(v), 6) for v in table.values[:5]])
print(f"partial sum up to M=1e5: {table.partial_sum:.3e}")
print(f"leading-order tail mass M^-a/Gamma(1-a): {tail_mass_estimate(alpha, 10**5):.3e}")

# r^n is an eigenfunction with eigenvalue (1 - r)^alpha
r = 0.5
u = geometric(Grid(1.0, 0, 5), r)
for n in range(4):
    res = frac_right(u, alpha, n, table)
    print(f"n={n}: computed {res.value:.15f}  expected {(1 - r) ** alpha * r**n:.15f}")
print(f"eigenvalue (1-r)^alpha = {math.pow(1 - r, alpha):.15f}")
