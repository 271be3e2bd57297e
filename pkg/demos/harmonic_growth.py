"""Maximal and square functions: growth for heat, stability for Poisson.

The heat maximal function of a spike has an l^2 norm whose square grows like
log(N)/(2 pi) on the window [-N, N]. The Poisson maximal and g-functions stay
bounded.
"""

from __future__ import annotations

import math

from discfrac.harmonic import (
    TGrid,
    apply_operator,
    cz_kernel_size_check,
    distribution_function,
    empirical_lp_growth,
    family_inputs,
    heat_g_norm_fourier,
)

heat = empirical_lp_growth("heat_max", sizes=(256, 512, 1024))
print("heat maximal ratios:", [round(r, 4) for r in heat.ratios])
print(f"slope of ratio^2 against log N: {heat.log_slope:.4f}  (1/(2 pi) = {1 / (2 * math.pi):.4f})")

for op in ("poisson_max", "poisson_g"):
    rep = empirical_lp_growth(op, sizes=(256, 512, 1024))
    print(f"{op}: ratios {[round(r, 4) for r in rep.ratios]}, relative variation {rep.rel_variation:.1e}")

print("heat g-norm of f with f_hat = 1:", heat_g_norm_fourier(lambda th: 1.0).diverges, "(diverges)")
print("heat g-norm of f with f_hat = 1 - cos:", heat_g_norm_fourier(lambda th: 1 - math.cos(th)).value)

rep = cz_kernel_size_check(0.5, TGrid.log_spaced(), range(16, 1025, 16))
print(f"Poisson kernel decay: size {rep.size_exponent:.3f}, smoothness {rep.smoothness_exponent:.3f}")

# lambda * #{|Op delta_0| > lambda}: growing for heat, flat for Poisson
tg = TGrid.log_spaced()
for N in (256, 1024):
    (spike,) = family_inputs("indicator", N)
    for op in ("heat_max", "poisson_max"):
        d = distribution_function(apply_operator(op, spike, tg), [0.01])[0]
        print(f"N={N} {op}: lambda*count at lambda=0.01 is {d:.3f}")
