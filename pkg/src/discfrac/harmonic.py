"""Maximal functions and square functions of the heat and Poisson semigroups.

The supremum over ``t`` and the :math:`dt/t` integral are discretized on a
logarithmic grid of times. Unboundedness and boundedness are never asserted
as limits: they show up as fitted growth (or stability) of norms across window
sizes.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .grid import Grid, GridFunction, ZeroTail, indicator, lp_norm
from .semigroups import PoissonKernel, heat_apply, poisson_apply, poisson_log_values


@dataclass(frozen=True)
class TGrid:
    """Increasing positive times :math:`t_1 < \\dots < t_K`."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.unique(np.asarray(self.values, dtype=np.float64))
        if len(v) < 32 or v[0] <= 0:
            raise ValueError("a time grid needs at least 32 positive points")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def log_spaced(cls, t_min: float = 1e-3, t_max: float = 1e3, per_decade: int = 16) -> TGrid:
        k = max(32, int(round(per_decade * math.log10(t_max / t_min))) + 1)
        return cls(np.geomspace(t_min, t_max, k))

    def with_integers(self, n_max: int) -> TGrid:
        """Add the integers ``1..n_max``, where the heat profiles
        :math:`e^{-t} t^n/n!` peak (this may extend the range)."""
        extra = np.arange(1, int(n_max) + 1, dtype=np.float64)
        return TGrid(np.concatenate([self.values, extra]))

    @property
    def t_min(self) -> float:
        return float(self.values[0])

    @property
    def t_max(self) -> float:
        return float(self.values[-1])

    def __len__(self) -> int:
        return len(self.values)


# -- maximal functions -----------------------------------------------------------------


def _window(u: GridFunction, window):
    return window if window is not None else (u.n_lo, u.n_hi)


def heat_maximal(
    u: GridFunction,
    tgrid: TGrid,
    side: str = "right",
    window: tuple[int, int] | None = None,
) -> GridFunction:
    """:math:`\\max_{t \\in tgrid} |T_{t,\\pm} u|` on the window."""
    a, b = _window(u, window)
    out = np.zeros(b - a + 1)
    for t in tgrid.values:
        np.maximum(out, np.abs(heat_apply(u, float(t), side, window=(a, b)).values), out=out)
    return GridFunction(Grid(u.h, a, b), out)


def _poisson_kernels(u: GridFunction, gamma: float, tgrid: TGrid, side: str, a: int, b: int):
    """Kernels for every grid time, one vectorized recurrence (zero tails only)."""
    tail = u.tail_right if side == "right" else u.tail_left
    if not isinstance(tail, ZeroTail):
        return None
    J = max(1, u.n_hi - a) if side == "right" else max(1, b - u.n_lo)
    taus = tgrid.values / math.sqrt(u.h)
    logs = poisson_log_values(gamma, taus, J)
    out = []
    for tau, lv in zip(taus, logs):
        vals = np.exp(lv)
        vals.setflags(write=False)
        out.append(PoissonKernel(gamma, float(tau), J, vals, max(0.0, 1.0 - math.fsum(vals))))
    return out


def _poisson_stack(u, gamma, tgrid, side, window) -> np.ndarray:
    a, b = _window(u, window)
    kernels = _poisson_kernels(u, gamma, tgrid, side, a, b)
    rows = []
    for k, t in enumerate(tgrid.values):
        kern = None if kernels is None else kernels[k]
        rows.append(poisson_apply(u, gamma, float(t), side, window=(a, b), kernel=kern).values)
    return np.array(rows)


def poisson_maximal(
    u: GridFunction,
    gamma: float,
    tgrid: TGrid,
    side: str = "right",
    window: tuple[int, int] | None = None,
) -> GridFunction:
    """:math:`\\max_{t \\in tgrid} |P^\\gamma_{t,\\pm} u|` on the window."""
    a, b = _window(u, window)
    stack = _poisson_stack(u, gamma, tgrid, side, (a, b))
    return GridFunction(Grid(u.h, a, b), np.max(np.abs(stack), axis=0))


def _g_integral(stack: np.ndarray, ts: np.ndarray) -> np.ndarray:
    logt = np.log(ts)
    deriv = np.gradient(stack, logt, axis=0)
    return integrate.trapezoid(deriv**2, logt, axis=0)


def poisson_g_function(
    u: GridFunction,
    gamma: float,
    tgrid: TGrid,
    side: str = "right",
    window: tuple[int, int] | None = None,
    return_range_error: bool = False,
):
    """:math:`\\left(\\int |t\\partial_t P^\\gamma_{t,\\pm} u|^2 dt/t\\right)^{1/2}` on the window.

    :math:`t\\partial_t` is a central difference in :math:`\\log t` and the
    integral a trapezoid rule in :math:`\\log t`. With ``return_range_error``
    the grid is also widened by one decade at each end, and the sup-difference
    of the two results is returned as an estimate of the range truncation.
    """
    a, b = _window(u, window)
    stack = _poisson_stack(u, gamma, tgrid, side, (a, b))
    g = GridFunction(Grid(u.h, a, b), np.sqrt(_g_integral(stack, tgrid.values)))
    if not return_range_error:
        return g
    logt = np.log(tgrid.values)
    step = float(np.median(np.diff(logt)))
    n_dec = int(math.ceil(math.log(10.0) / step))
    lo = tgrid.t_min * np.exp(-step * np.arange(n_dec, 0, -1))
    hi = tgrid.t_max * np.exp(step * np.arange(1, n_dec + 1))
    wide = TGrid(np.concatenate([lo, tgrid.values, hi]))
    wide_stack = _poisson_stack(u, gamma, wide, side, (a, b))
    g_wide = np.sqrt(_g_integral(wide_stack, wide.values))
    return g, float(np.max(np.abs(g_wide - g.values)))


# -- heat g-function on the Fourier side ----------------------------------------------------


@dataclass(frozen=True)
class HeatGResult:
    eps: tuple[float, ...]
    values: tuple[float, ...]
    growth_exponent: float
    diverges: bool

    @property
    def value(self) -> float:
        """Value at the smallest cut-off (meaningful only when not divergent)."""
        return self.values[-1]


def heat_g_norm_fourier(
    f_hat: Callable[[np.ndarray], np.ndarray],
    eps_list=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
    growth_threshold: float = 0.5,
) -> HeatGResult:
    """:math:`\\frac{1}{4\\pi}\\int_\\varepsilon^{2\\pi-\\varepsilon} \\frac{|\\hat f(\\theta)|^2}{1-\\cos\\theta}d\\theta`
    for shrinking :math:`\\varepsilon`.

    ``growth_exponent`` is the log-log slope of the values against
    :math:`1/\\varepsilon` over the last three cut-offs; divergence is flagged
    when it exceeds ``growth_threshold`` (a non-vanishing :math:`\\hat f(0)` gives
    slope 1).
    """
    eps_list = tuple(float(e) for e in eps_list)
    if len(eps_list) < 3 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("need at least three decreasing cut-offs")

    def integrand(theta):
        # 1 - cos(theta) = 2 sin^2(theta/2) without cancellation
        return abs(complex(f_hat(theta))) ** 2 / (2.0 * math.sin(0.5 * theta) ** 2)

    values = []
    for e in eps_list:
        pts = [e, min(10 * e, math.pi), math.pi, max(2 * math.pi - 10 * e, math.pi), 2 * math.pi - e]
        pts = sorted(set(pts))
        total = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for lo, hi in zip(pts[:-1], pts[1:]):
                total += integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)[0]
        values.append(total / (4.0 * math.pi))
    v = np.array(values[-3:])
    if np.all(v > 0):
        slope = float(np.polyfit(np.log(1.0 / np.array(eps_list[-3:])), np.log(v), 1)[0])
    else:
        slope = 0.0
    return HeatGResult(eps_list, tuple(values), slope, slope > growth_threshold)


# -- Calderón–Zygmund kernel estimates ------------------------------------------------------


@dataclass(frozen=True)
class KernelSizeReport:
    gamma: float
    j: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    size_exponent: float
    smoothness_exponent: float

    def to_csv(self) -> str:
        rows = ["j,s,d"] + [f"{j},{s:.17g},{d:.17g}" for j, s, d in zip(self.j, self.s, self.d)]
        return "\n".join(rows) + "\n"


def cz_kernel_size_check(gamma: float, tgrid: TGrid, j_range) -> KernelSizeReport:
    """:math:`s(j) = \\max_t P_t^\\gamma(j)` and :math:`d(j) = \\max_t |P_t^\\gamma(j) - P_t^\\gamma(j+1)|`
    with their fitted log-log decay exponents.

    The difference is formed as :math:`P(j)\\,|1 - P(j+1)/P(j)|` from the log
    values, so it does not cancel.
    """
    j = np.asarray(sorted(set(int(x) for x in j_range)))
    if j[0] < 1:
        raise ValueError("j_range must be positive")
    logs = poisson_log_values(gamma, tgrid.values, int(j[-1]) + 1)
    s = np.exp(np.max(logs[:, j], axis=0))
    step = logs[:, j + 1] - logs[:, j]
    d = np.max(np.exp(logs[:, j]) * np.abs(np.expm1(step)), axis=0)
    lj = np.log(j)
    size = float(np.polyfit(lj, np.log(s), 1)[0])
    smooth = float(np.polyfit(lj, np.log(d), 1)[0])
    return KernelSizeReport(float(gamma), j, s, d, size, smooth)


def distribution_function(u: GridFunction, lambdas) -> np.ndarray:
    """:math:`\\lambda \\cdot \\#\\{n : |u(n)| > \\lambda\\}` on the stored window, per level.

    Applied to :math:`Op\\,\\delta_0` this is the weak-type quantity; it is
    reported for inspection only.
    """
    lam = np.asarray(lambdas, dtype=np.float64)
    if np.any(lam <= 0):
        raise ValueError("levels must be positive")
    mags = np.sort(np.abs(u.values))
    counts = mags.size - np.searchsorted(mags, lam, side="right")
    return lam * counts


# -- empirical norm growth ---------------------------------------------------------------------


@dataclass(frozen=True)
class NormGrowthReport:
    op: str
    family: str
    p: float
    sizes: tuple[int, ...]
    ratios: tuple[float, ...]
    log_slope: float

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly increasing")

    @property
    def rel_variation(self) -> float:
        r = np.array(self.ratios)
        return float((r.max() - r.min()) / r.min())

    def to_json(self) -> str:
        d = {
            "op": self.op,
            "family": self.family,
            "p": self.p,
            "sizes": list(self.sizes),
            "ratios": list(self.ratios),
            "log_slope": self.log_slope,
            "rel_variation": self.rel_variation,
        }
        return json.dumps(d, indent=2, sort_keys=True)


def family_inputs(family: str, N: int, trials: int = 1, seed: int = 0) -> list[GridFunction]:
    """Test inputs on the window ``[-N, N]``: ``indicator`` (spike at 0),
    ``comb`` (spikes at :math:`\\pm 2^k`) or ``random_signs``."""
    grid = Grid(1.0, -N, N)
    if family == "indicator":
        return [indicator(grid, 0)]
    if family == "comb":
        v = np.zeros(grid.size)
        k = 1
        while k <= N:
            v[N + k] = v[N - k] = 1.0
            k *= 2
        v[N] = 1.0
        return [GridFunction(grid, v)]
    if family == "random_signs":
        rng = np.random.default_rng(seed)
        return [GridFunction(grid, rng.choice([-1.0, 1.0], size=grid.size)) for _ in range(trials)]
    raise ValueError(f"unknown input family {family!r}")


OPERATORS = ("heat_max", "poisson_max", "poisson_g")


def apply_operator(op: str, u: GridFunction, tgrid: TGrid, gamma: float = 0.5, side: str | None = None):
    if op == "heat_max":
        # the left heat profile of a spike at 0 peaks at t = n
        return heat_maximal(u, tgrid.with_integers(u.n_hi), side or "left")
    if op == "poisson_max":
        return poisson_maximal(u, gamma, tgrid, side or "right")
    if op == "poisson_g":
        return poisson_g_function(u, gamma, tgrid, side or "right")
    raise ValueError(f"unknown operator {op!r}; expected one of {OPERATORS}")


def empirical_lp_growth(
    op: str,
    p: float = 2.0,
    sizes=(2**8, 2**9, 2**10, 2**11, 2**12),
    trials: int = 1,
    family: str = "indicator",
    gamma: float = 0.5,
    tgrid: TGrid | None = None,
    seed: int = 0,
) -> NormGrowthReport:
    """Largest ratio :math:`\\|Op\\,u\\|_{\\ell^p}/\\|u\\|_{\\ell^p}` over a family, per window size.

    ``log_slope`` is the least-squares slope of :math:`ratio^p` against
    :math:`\\log N`: a bounded operator gives a slope near zero, while the heat
    maximal operator on a spike gives about :math:`1/(2\\pi)` at ``p = 2``.
    """
    sizes = tuple(int(n) for n in sizes)
    if any(n & (n - 1) for n in sizes):
        raise ValueError("sizes must be powers of two")
    tgrid = tgrid or TGrid.log_spaced()
    ratios = []
    for N in sizes:
        best = 0.0
        for u in family_inputs(family, N, trials, seed):
            norm = lp_norm(u, p)
            if norm == 0:
                continue
            best = max(best, lp_norm(apply_operator(op, u, tgrid, gamma), p) / norm)
        ratios.append(best)
    slope = float(np.polyfit(np.log(sizes), np.array(ratios) ** p, 1)[0])
    return NormGrowthReport(op, family, float(p), sizes, tuple(ratios), slope)
