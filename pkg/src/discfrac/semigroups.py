"""Heat and Poisson semigroups generated by the one-sided differences.

The heat semigroup of :math:`\\delta_{right}` on :math:`h\\mathbb{Z}` is

.. math::

    T_{t,+} u(nh) = \\sum_{j \\ge 0} G_{t/h}(j)\\, u((n+j)h),
    \\qquad G_s(j) = e^{-s} \\frac{s^j}{j!},

and the Poisson semigroup :math:`P^\\gamma_{t,+}` subordinated to it has the kernel

.. math::

    P_t^\\gamma(j) = \\frac{t^{j+\\gamma}}{2^{j+\\gamma-1}\\Gamma(\\gamma) j!} K_{j-\\gamma}(t)

(with ``t`` replaced by :math:`t/\\sqrt{h}` on a mesh of step ``h``). The
``left`` variants mirror the sums.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal, special

from .coefficients import as_order, heat_weights
from .fracops import frac_left, frac_right
from .grid import (
    CallbackTail,
    Grid,
    GridFunction,
    delta_left,
    delta_right,
    lazy_tail,
    tail_constant,
)


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""


class ExtrapolationError(RuntimeError):
    """Richardson extrapolation did not stabilize."""


def _check_side(side: str) -> str:
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left': got {side!r}")
    return side


# -- one-sided kernel application ------------------------------------------------------


def _kernel_apply(u: GridFunction, kern: np.ndarray, side: str, a: int, b: int) -> np.ndarray:
    """``sum_j kern[j] u(n +- j)`` for ``n = a..b``.

    Terms beyond the kernel are added exactly when the tail on that side is
    constant, using that every kernel here has total mass one.
    """
    J = len(kern) - 1
    if side == "right":
        ext = u.take(a, b + J)
        direct = lambda: np.correlate(ext, kern, mode="valid")  # noqa: E731
        fft = lambda: signal.fftconvolve(ext, kern[::-1], mode="valid")  # noqa: E731
        tail = u.tail_right
    else:
        ext = u.take(a - J, b)
        direct = lambda: np.convolve(ext, kern, mode="valid")  # noqa: E731
        fft = lambda: signal.fftconvolve(ext, kern, mode="valid")  # noqa: E731
        tail = u.tail_left
    out = direct() if len(ext) * (J + 1) <= 4 * 10**6 else fft()
    c = tail_constant(tail)
    if c is not None and c != 0.0:
        out = out + c * max(0.0, 1.0 - math.fsum(kern))
    return out


def _applied(u: GridFunction, kern: np.ndarray, side: str, window) -> GridFunction:
    a, b = window if window is not None else (u.n_lo, u.n_hi)
    values = _kernel_apply(u, kern, side, a, b)

    def block(idx):
        idx = np.asarray(idx)
        lo, hi = int(idx.min()), int(idx.max())
        return _kernel_apply(u, kern, side, lo, hi)[idx - lo]

    return GridFunction(Grid(u.h, a, b), values, lazy_tail(block, u.h), lazy_tail(block, u.h))


# -- heat semigroup --------------------------------------------------------------------


def heat_apply(
    u: GridFunction,
    t: float,
    side: str = "right",
    tolerance: float = 1e-14,
    window: tuple[int, int] | None = None,
) -> GridFunction:
    """:math:`T_{t,\\pm} u` on a window (default: the window of ``u``).

    The Poisson weights are truncated where their tail mass drops below
    ``tolerance``.
    """
    _check_side(side)
    if t < 0:
        raise ValueError("heat semigroup needs t >= 0")
    w = heat_weights(t / u.h, tolerance)
    return _applied(u, w.values, side, window)


def heat_point(u: GridFunction, t: float, n: int, side: str = "right", tolerance: float = 1e-14) -> float:
    """:math:`T_{t,\\pm} u(nh)` at a single point."""
    w = heat_weights(t / u.h, tolerance)
    return float(_kernel_apply(u, w.values, side, n, n)[0])


def heat_symbol(theta: float | np.ndarray, t: float) -> complex | np.ndarray:
    """Fourier multiplier :math:`e^{-t(1 - e^{i\\theta})}` of :math:`T_{t,+}` at ``h = 1``."""
    return np.exp(-t * (1.0 - np.exp(1j * np.asarray(theta))))


def generator_limit_check(u: GridFunction, n: int, ts) -> np.ndarray:
    """Residuals :math:`|(T_{t,+}u(n) - u(n))/t + \\delta_{right} u(n)|` for each ``t``."""
    u_n = u(n)
    d = delta_right(u, n)
    return np.array([abs((heat_point(u, float(t), n) - u_n) / t + d) for t in ts])


def gamma_formula_check(
    u: GridFunction, order, n: int, T_list, side: str = "right", tol: float = 1e-8
) -> np.ndarray:
    """Truncated Balakrishnan integrals

    .. math::

        \\frac{1}{\\Gamma(-\\alpha)} \\int_0^{T} \\left(T_{t,\\pm}u(n) - u(n)\\right) \\frac{dt}{t^{1+\\alpha}}

    for each ``T`` in ``T_list`` (increasing); they converge to
    :math:`(\\delta_{\\pm})^\\alpha u(n)` as ``T`` grows.
    """
    a = as_order(order).alpha
    u_n = u(n)
    diff = delta_right if side == "right" else delta_left
    d = diff(u, n)

    def g(t):
        if t == 0.0:
            return -d
        return (heat_point(u, t, n, side) - u_n) / t

    T_list = [float(T) for T in T_list]
    if sorted(T_list) != T_list or T_list[0] <= 0:
        raise ValueError("T_list must be positive and increasing")
    doublings = [2.0**k for k in range(int(math.log2(T_list[-1])) + 1)] if T_list[-1] >= 1 else []
    edges = sorted({0.0, *T_list, *(x for x in doublings if x < T_list[-1])})
    marks = set(T_list)
    total = 0.0
    out = []
    opts = dict(epsabs=1e-15, epsrel=tol, limit=200)
    for lo, hi in zip(edges[:-1], edges[1:]):
        if lo == 0.0:
            piece, _ = integrate.quad(g, 0.0, hi, weight="alg", wvar=(-a, 0.0), **opts)
        else:
            piece, _ = integrate.quad(lambda t: g(t) * t ** (-a), lo, hi, **opts)
        total += piece
        if hi in marks:
            out.append(total / special.gamma(-a))
    return np.array(out)


# -- Macdonald functions ---------------------------------------------------------------


def log_bessel_k(nu: float, t: float, rtol: float = 1e-10) -> float:
    """:math:`\\log K_\\nu(t)` from :math:`K_\\nu(t) = \\int_0^\\infty e^{-t\\cosh x}\\cosh(\\nu x)\\,dx`.

    The integrand is rescaled by its peak so that large ``t`` does not underflow.
    """
    if not t > 0:
        raise ValueError(f"Macdonald function needs t > 0: got {t!r}")
    nu = abs(float(nu))
    t = float(t)
    x_peak = math.asinh(nu / t)

    def g(x):
        # exponent of e^{nu x - t (cosh x - 1)}, with cosh x - 1 = 2 sinh^2(x/2)
        return nu * x - 2.0 * t * math.sinh(0.5 * x) ** 2

    peak = g(x_peak)
    x_end = x_peak + 1.0
    while g(x_end) - peak > -60.0:
        x_end = x_peak + 2.0 * (x_end - x_peak)

    def integrand(x):
        e = -2.0 * t * math.sinh(0.5 * x) ** 2 - peak
        return 0.5 * (math.exp(nu * x + e) + math.exp(-nu * x + e))

    points = [x_peak] if 0.0 < x_peak < x_end else None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                integrand, 0.0, x_end, points=points, epsabs=0.0, epsrel=0.1 * rtol, limit=200
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"K_{nu}({t}) quadrature failed: {exc}") from exc
    if not err <= rtol * abs(val):
        raise QuadratureError(f"K_{nu}({t}) quadrature error {err:.2e} above tolerance")
    return math.log(val) + peak - t


def bessel_k(nu: float, t: float, rtol: float = 1e-10) -> float:
    """Macdonald function :math:`K_\\nu(t)` for real ``nu`` and ``t > 0``, using
    :math:`K_{-\\nu} = K_\\nu`.

    >>> round(bessel_k(0.5, 1.0), 10)
    0.4610685044
    """
    return math.exp(log_bessel_k(nu, t, rtol))


# -- Poisson kernel --------------------------------------------------------------------


@dataclass(frozen=True)
class PoissonKernel:
    """Truncated kernel :math:`P_t^\\gamma(0..J)`.

    The kernel has a power tail :math:`P_t^\\gamma(j) \\sim (t^2/4)^\\gamma /
    (\\Gamma(\\gamma) j^{1+\\gamma})`, so ``mass_deficit`` decays only like
    :math:`J^{-\\gamma}`. Applications add the missing mass exactly on constant
    tails.
    """

    gamma: float
    t: float
    J: int
    values: np.ndarray = field(repr=False)
    mass_deficit: float


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1): got {gamma!r}")
    return gamma


def poisson_log_values(gamma: float, ts, J: int) -> np.ndarray:
    """:math:`\\log P_t^\\gamma(j)` for ``j = 0..J`` and every ``t`` in ``ts``.

    Seeds come from :func:`log_bessel_k` at orders :math:`\\gamma` and :math:`1-\\gamma`;
    the Macdonald recurrence then gives the positive three-term recurrence

    .. math::

        P(j+1) = \\frac{j-\\gamma}{j+1} P(j) + \\frac{t^2}{4j(j+1)} P(j-1),

    which is run on the ratios :math:`P(j)/P(j-1)` so nothing under- or overflows.
    Returns an array of shape ``(len(ts), J + 1)``.
    """
    gamma = _check_gamma(gamma)
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    if np.any(ts <= 0):
        raise ValueError("Poisson kernel needs t > 0")
    lt = np.log(ts)
    lg = special.gammaln(gamma)
    log_k0 = np.array([log_bessel_k(gamma, t) for t in ts])
    out = np.empty((len(ts), J + 1))
    out[:, 0] = gamma * lt - (gamma - 1.0) * math.log(2.0) - lg + log_k0
    if J == 0:
        return out
    log_k1 = np.array([log_bessel_k(1.0 - gamma, t) for t in ts])
    out[:, 1] = (1.0 + gamma) * lt - gamma * math.log(2.0) - lg + log_k1
    ratio = np.exp(out[:, 1] - out[:, 0])
    q = 0.25 * ts**2
    for j in range(1, J):
        ratio = (j - gamma) / (j + 1) + q / (j * (j + 1) * ratio)
        out[:, j + 1] = out[:, j] + np.log(ratio)
    return out


def _default_J(gamma: float, t: float, tolerance: float, J_max: int) -> int:
    # tail mass beyond J is about (t^2/4)^gamma / (Gamma(gamma) gamma J^gamma)
    scale = (0.25 * t * t) ** gamma / (math.gamma(gamma) * gamma)
    need = (scale / tolerance) ** (1.0 / gamma)
    bulk = 4.0 * (0.25 * t * t + t) + 64.0
    return int(min(J_max, max(bulk, need)))


def poisson_kernel(
    gamma: float, t: float, tolerance: float = 1e-12, J: int | None = None, J_max: int = 2**16
) -> PoissonKernel:
    """Kernel :math:`P_t^\\gamma(0..J)`.

    Without an explicit ``J`` the length is chosen from the power-tail estimate
    so that the deficit would reach ``tolerance``, capped at ``J_max``; the
    actual deficit is reported either way.
    """
    gamma = _check_gamma(gamma)
    if not t > 0:
        raise ValueError("Poisson kernel needs t > 0")
    if J is None:
        J = _default_J(gamma, t, tolerance, J_max)
    values = np.exp(poisson_log_values(gamma, [t], int(J))[0])
    values.setflags(write=False)
    deficit = max(0.0, 1.0 - math.fsum(values))
    return PoissonKernel(gamma, float(t), int(J), values, deficit)


def _poisson_J(u: GridFunction, gamma, t, side, a, b, tolerance) -> int:
    """Kernel length that makes the application exact up to ``tolerance``."""
    tail = u.tail_right if side == "right" else u.tail_left
    extent = max(1, u.n_hi - a) if side == "right" else max(1, b - u.n_lo)
    if tail_constant(tail) is not None:
        # zero or constant tails: the missing mass is handled exactly
        return extent
    if isinstance(tail, CallbackTail) and tail.decay is not None:
        return max(extent, int(math.ceil(math.log(tolerance) / math.log(tail.decay))) + 1)
    return max(extent, _default_J(gamma, t, tolerance, 2**16))


def poisson_apply(
    u: GridFunction,
    gamma: float,
    t: float,
    side: str = "right",
    tolerance: float = 1e-12,
    window: tuple[int, int] | None = None,
    kernel: PoissonKernel | None = None,
) -> GridFunction:
    """:math:`P^\\gamma_{t,\\pm} u` on a window (default: the window of ``u``)."""
    _check_side(side)
    a, b = window if window is not None else (u.n_lo, u.n_hi)
    tau = t / math.sqrt(u.h)
    if kernel is None:
        kernel = poisson_kernel(gamma, tau, J=_poisson_J(u, gamma, tau, side, a, b, tolerance))
    return _applied(u, kernel.values, side, (a, b))


def extension_residual(
    u: GridFunction,
    gamma: float,
    z: float,
    dz: float,
    window: tuple[int, int] | None = None,
) -> float:
    """Sup over the window of the residual of

    .. math::

        \\partial_{zz} U + \\frac{1 - 2\\gamma}{z} \\partial_z U - \\delta_{right} U = 0,
        \\qquad U(z, \\cdot) = P^\\gamma_{z,+} u,

    with central differences of step ``dz`` in ``z``.
    """
    if not z > dz > 0:
        raise ValueError("need z > dz > 0")
    a, b = window if window is not None else (u.n_lo, u.n_hi)
    Um, U0, Up = (poisson_apply(u, gamma, z + k * dz, window=(a, b + 1)).values for k in (-1, 0, 1))
    uzz = (Up - 2.0 * U0 + Um) / dz**2
    uz = (Up - Um) / (2.0 * dz)
    d = (U0[:-1] - U0[1:]) / u.h
    res = uzz[:-1] + (1.0 - 2.0 * gamma) / z * uz[:-1] - d
    return float(np.max(np.abs(res)))


# -- Neumann limit -----------------------------------------------------------------


@dataclass(frozen=True)
class NeumannLimit:
    gamma: float
    n: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    z_used: float

    @property
    def rel_err(self) -> np.ndarray:
        scale = np.maximum(np.abs(self.rhs), np.max(np.abs(self.rhs), initial=0.0) * 1e-12)
        with np.errstate(invalid="ignore", divide="ignore"):
            err = np.abs(self.lhs - self.rhs) / scale
        return np.where(scale > 0, err, np.abs(self.lhs - self.rhs))

    def records(self) -> list[dict]:
        return [
            {"n": int(n), "lhs": float(l), "rhs": float(r), "rel_err": float(e)}
            for n, l, r, e in zip(self.n, self.lhs, self.rhs, self.rel_err)
        ]


def neumann_constant(gamma: float) -> float:
    """:math:`\\Gamma(-\\gamma) / (4^\\gamma \\Gamma(\\gamma))`."""
    return special.gamma(-gamma) / (4.0**gamma * special.gamma(gamma))


def neumann_limit(
    u: GridFunction,
    gamma: float,
    window: tuple[int, int] | None = None,
    z0: float = 0.1,
    rel_step: float = 1e-4,
    refinements: int = 3,
    stability: float = 1e-5,
) -> NeumannLimit:
    """Extrapolate :math:`\\frac{1}{2\\gamma} z^{1-2\\gamma} \\partial_z U(z, n)` to ``z = 0``.

    The quotient expands in powers :math:`1, z^{2-2\\gamma}, z^2, \\dots`, so three
    values at ``z0, z0/2, z0/4`` determine the limit after removing the two
    leading corrections. The estimate is accepted once the triple shifted by one
    halving agrees to ``stability`` (relative); up to ``refinements`` further
    halvings are tried before :class:`ExtrapolationError` is raised. The right
    hand side is :math:`\\Gamma(-\\gamma)/(4^\\gamma \\Gamma(\\gamma)) (\\delta_{right})^\\gamma u`.
    """
    gamma = _check_gamma(gamma)
    a, b = window if window is not None else (u.n_lo, u.n_hi)
    exps = (0.0, 2.0 - 2.0 * gamma, 2.0)

    def quotient(z):
        dz = z * rel_step
        Up = poisson_apply(u, gamma, z + dz, window=(a, b)).values
        Um = poisson_apply(u, gamma, z - dz, window=(a, b)).values
        return z ** (1.0 - 2.0 * gamma) * (Up - Um) / (2.0 * dz) / (2.0 * gamma)

    def extrapolate(zs, qs):
        V = np.array([[z**p for p in exps] for z in zs])
        return np.linalg.solve(V, np.array(qs))[0]

    # quotients of data whose limit vanishes are pure rounding noise
    floor = 1e-8 * float(np.max(np.abs(u.values)))
    zs = [z0 / 2**k for k in range(3 + refinements + 1)]
    qs = [quotient(zs[0]), quotient(zs[1]), quotient(zs[2])]
    prev = extrapolate(zs[:3], qs)
    for k in range(1, refinements + 2):
        if k + 2 >= len(zs):
            break
        qs.append(quotient(zs[k + 2]))
        est = extrapolate(zs[k : k + 3], qs[k : k + 3])
        scale = float(np.max(np.abs(est), initial=0.0))
        if np.max(np.abs(est - prev), initial=0.0) <= stability * scale + floor:
            rhs = np.array([frac_right(u, gamma, int(n)).value for n in range(a, b + 1)])
            return NeumannLimit(gamma, np.arange(a, b + 1), est, neumann_constant(gamma) * rhs, zs[k + 2])
        prev = est
    raise ExtrapolationError("Neumann quotient did not stabilize")


def poisson_limit_errors(u: GridFunction, gamma: float, ts, side: str = "right") -> np.ndarray:
    """:math:`\\sup_{window} |P^\\gamma_{t,\\pm} u - u|` for each ``t``."""
    return np.array([float(np.max(np.abs(poisson_apply(u, gamma, t, side).values - u.values))) for t in ts])


def frac_side(u: GridFunction, order, n: int, side: str = "right") -> float:
    """:math:`(\\delta_{right})^\\alpha u(n)` or its left mirror, value only."""
    return (frac_right if side == "right" else frac_left)(u, order, n).value
