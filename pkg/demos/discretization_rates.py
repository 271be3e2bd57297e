"""How fast the lattice operator approaches the continuous Marchaud derivative.

For a Hölder function of order ``beta`` the error is bounded by ``h^(beta-alpha)``.
At the kink of ``|sin x|^0.8`` the fitted order sits near that bound. For the
smooth ``cos`` the fitted order is 1, the accuracy of a one-sided quotient,
which is better than the bound.
"""

from __future__ import annotations

from discfrac.continuous import discretization_sweep, gl_vs_marchaud

hs = [0.2, 0.1, 0.05, 0.025, 0.0125]

rough = discretization_sweep("abs_sin_0.8", 0.3, hs, window=(-1.0, 1.0), x_step=0.2)
print("abs_sin_0.8, alpha=0.3")
for h, e in zip(rough.h_list, rough.err_list):
    print(f"  h={h:<7} sup error={e:.4e}")
print(f"  fitted order {rough.slope:.3f} (bound beta - alpha = 0.5)")

gl = gl_vs_marchaud("abs_sin_0.8", 0.0, 0.3, hs)
print(f"Grünwald–Letnikov at the kink: fitted order {gl.slope:.3f}")

for alpha in (0.3, 0.5, 0.7):
    smooth = discretization_sweep("cos", alpha, hs, window=(-1.0, 1.0), x_step=0.2)
    print(f"cos, alpha={alpha}: fitted order {smooth.slope:.3f} (bound {1 - alpha:.1f})")
