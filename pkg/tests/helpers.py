"""Random input generators and law residuals shared by the test modules."""

from __future__ import annotations

import math

import numpy as np

from discfrac.coefficients import heat_weights
from discfrac.grid import CallbackTail, ConstantTail, Grid, GridFunction, ZeroTail, lp_norm
from discfrac.semigroups import bessel_k, heat_apply, poisson_apply

EPS = np.finfo(np.float64).eps


def max_principle_input(rng: np.random.Generator) -> tuple[GridFunction, int]:
    """A function with ``u(j0) = 0`` and ``u >= 0`` on ``[j0, inf)``.

    Left of ``j0`` the values are arbitrary. The right tail is zero, a
    non-negative constant or a geometrically decaying callback, and some
    rays vanish identically so that the rigidity clause is exercised.
    """
    h = float(rng.choice([0.25, 1.0, 2.0]))
    j0 = int(rng.integers(-20, 20))
    left = int(rng.integers(0, 10))
    length = int(rng.integers(1, 60))
    grid = Grid(h, j0 - left, j0 + length)
    values = np.empty(grid.size)
    values[:left] = rng.normal(size=left) * 5
    kind = rng.choice(["sparse", "uniform", "zero", "tiny"])
    ray = np.zeros(length + 1)
    if kind == "sparse":
        idx = rng.integers(1, length + 1, size=max(1, length // 8))
        ray[idx] = rng.exponential(size=len(idx))
    elif kind == "uniform":
        ray[1:] = rng.uniform(0, 10, size=length)
    elif kind == "tiny":
        ray[1:] = rng.uniform(0, 1e-12, size=length)
    values[left:] = ray
    tail_kind = rng.choice(["zero", "constant", "decay"]) if kind != "zero" else "zero"
    if tail_kind == "zero":
        tail = ZeroTail()
    elif tail_kind == "constant":
        tail = ConstantTail(float(rng.uniform(0, 3)))
    else:
        q = float(rng.uniform(0.1, 0.95))
        amp = float(rng.uniform(0, 2))
        edge = grid.n_hi

        def func(x, q=q, amp=amp, edge=edge, h=h):
            return amp * q ** (np.rint(np.asarray(x) / h) - edge)

        tail = CallbackTail(func, bound=amp * q, decay=q)
    return GridFunction(grid, values, tail, ZeroTail()), j0


def finite_input(rng: np.random.Generator, nonnegative: bool = False, max_len: int = 24) -> GridFunction:
    """Random finitely supported function on a window starting at a random index."""
    length = int(rng.integers(1, max_len + 1))
    lo = int(rng.integers(-10, 10))
    vals = rng.uniform(0, 1, size=length) if nonnegative else rng.normal(size=length)
    return GridFunction(Grid(1.0, lo, lo + length - 1), vals)


def _padded(u: GridFunction, left: int, right: int) -> GridFunction:
    grid = Grid(u.h, u.n_lo - left, u.n_hi + right)
    return GridFunction(grid, u.take(grid.n_lo, grid.n_hi), ZeroTail(), ZeroTail())


def heat_composition_residual(u: GridFunction, t: float, s: float, tol: float = 1e-14):
    """``sup |T_s T_t u - T_{t+s} u|`` over a window holding the support,
    and the slack from the truncated weights plus summation rounding."""
    pad = _padded(u, 80, 0)
    once = heat_apply(pad, t, tolerance=tol)
    # the right-sided heat semigroup keeps a zero right tail
    once = GridFunction(once.grid, once.values, ZeroTail(), ZeroTail())
    twice = heat_apply(once, s, tolerance=tol)
    direct = heat_apply(pad, t + s, tolerance=tol)
    residual = float(np.max(np.abs(twice.values - direct.values)))
    deficits = sum(heat_weights(x, tol).mass_deficit for x in (t, s, t + s))
    sup = lp_norm(u, math.inf)
    slack = deficits * sup + 64 * EPS * lp_norm(u, 1)
    return residual, slack


def heat_contraction_excess(u: GridFunction, t: float, p: float, tol: float = 1e-14):
    """``||T_t u||_p - ||u||_p`` (the window holds the whole output mass up to
    the weight truncation) and the matching slack."""
    w = heat_weights(t, tol)
    pad = _padded(u, w.J + 1, 0)
    out = heat_apply(pad, t, tolerance=tol)
    out = GridFunction(out.grid, out.values, ZeroTail(), ZeroTail())
    excess = lp_norm(out, p) - lp_norm(u, p)
    slack = 64 * EPS * lp_norm(u, 1)
    return excess, slack


def heat_adjoint_residual(u: GridFunction, v: GridFunction, t: float, tol: float = 1e-14):
    """``<T_{t,+} u, v> - <u, T_{t,-} v>`` over the supports, and its slack."""
    right = heat_apply(u, t, "right", tol, window=(v.n_lo, v.n_hi)).values
    left = heat_apply(v, t, "left", tol, window=(u.n_lo, u.n_hi)).values
    residual = abs(float(np.dot(right, v.values)) - float(np.dot(u.values, left)))
    slack = 2 * heat_weights(t, tol).mass_deficit * lp_norm(u, 1) * lp_norm(v, math.inf)
    slack += 64 * EPS * lp_norm(u, 1) * lp_norm(v, 1)
    return residual, slack


def positivity_minimum(u: GridFunction, t: float, gamma: float | None = None, side: str = "right") -> float:
    """Smallest value of the heat (``gamma=None``) or Poisson image on a padded window."""
    pad = _padded(u, 40, 40)
    if gamma is None:
        return float(np.min(heat_apply(pad, t, side).values))
    return float(np.min(poisson_apply(pad, gamma, t, side).values))


def poisson_geometric_closed_form(gamma: float, t: float, r: float, n: np.ndarray) -> np.ndarray:
    """``P_t u(n)`` for ``u(n) = r^n`` on the right side with ``h = 1``."""
    a = t * math.sqrt(1 - r)
    return r ** np.asarray(n, dtype=np.float64) * (2 / math.gamma(gamma)) * (a / 2) ** gamma * bessel_k(gamma, a)

