"""Continuous one-sided fractional derivatives and the discretization harness.

The Marchaud derivative

.. math::

    (D_{right/left})^\\alpha f(x) = \\frac{1}{\\Gamma(-\\alpha)}
        \\int_0^\\infty \\frac{f(x \\pm t) - f(x)}{t^{1+\\alpha}}\\, dt

is evaluated by adaptive quadrature, using the metadata of a small registry of
test functions (kinks, periods, ray behaviour). The Grünwald–Letnikov quotient
:math:`h^{-\\alpha}\\sum_k \\Lambda^\\alpha(k) f(x \\pm kh)` and the lattice operator
:math:`(\\delta_{right})^\\alpha r_h f` are compared against it.
"""

from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .coefficients import CoeffTable, FracOrder, as_order
from .fracops import _table_for, frac_right
from .grid import Grid, restrict


class DegenerateFitError(ValueError):
    """Order fit on data that cannot be fitted (too few points or zero errors)."""


# -- test-function registry -----------------------------------------------------------


@dataclass(frozen=True)
class Ray:
    """Behaviour of a function along :math:`x \\to \\pm\\infty`.

    ``kind`` is ``periodic`` (``period``, ``mean``), ``constant`` (``value``
    from ``onset`` on), ``decaying`` (like :math:`e^{-rate |x|}`) or
    ``unbounded``. ``bound`` is a sup of ``|f|`` on the ray when known.
    """

    kind: str
    bound: float | None = None
    mean: float | None = None
    period: float | None = None
    value: float | None = None
    onset: float | None = None
    rate: float | None = None


@dataclass(frozen=True)
class SmoothFunction:
    """Registered test function with its Hölder class :math:`C^{k,\\beta}`.

    ``kinks`` lists points where ``f`` is only :math:`C^{0,\\beta}`; with a
    ``period`` they repeat periodically. ``exact_right``/``exact_left`` are
    closed forms :math:`(\\alpha, x) \\mapsto (D_{\\pm})^\\alpha f(x)` when known.
    """

    id: str
    eval: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    holder_k: int
    holder_beta: float
    decay_note: str
    right: Ray
    left: Ray
    kinks: tuple[float, ...] = ()
    period: float | None = None
    derivative: str | None = None
    exact_right: Callable[[float, np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    exact_left: Callable[[float, np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __call__(self, x):
        return self.eval(x)

    def ray(self, side: str) -> Ray:
        return self.right if side == "right" else self.left

    def exact(self, side: str):
        return self.exact_right if side == "right" else self.exact_left


def _abs_sin_mean(beta: float) -> float:
    return math.gamma((beta + 1) / 2) / (math.sqrt(math.pi) * math.gamma(beta / 2 + 1))


def _ramp_exact(sign: float):
    # D f = -(1/Gamma(1-a)) int_0^inf f'(x + t) t^{-a} dt for the right side
    def exact(a, x):
        x = np.asarray(x, dtype=np.float64)
        if sign > 0:
            hi, lo = np.maximum(1 - x, 0), np.maximum(-1 - x, 0)
        else:
            hi, lo = np.maximum(x + 1, 0), np.maximum(x - 1, 0)
        return -sign * (hi ** (1 - a) - lo ** (1 - a)) / special.gamma(2 - a)

    return exact


def _build_registry() -> dict[str, SmoothFunction]:
    tau = 2 * math.pi
    periodic = Ray("periodic", bound=1.0, mean=0.0, period=tau)
    entries = [
        SmoothFunction(
            "const", lambda x: np.ones_like(np.asarray(x, dtype=np.float64)), 1, 1.0, "bounded",
            Ray("constant", bound=1.0, value=1.0, onset=-math.inf),
            Ray("constant", bound=1.0, value=1.0, onset=math.inf),
            derivative="zero",
            exact_right=lambda a, x: np.zeros_like(np.asarray(x, dtype=np.float64)),
            exact_left=lambda a, x: np.zeros_like(np.asarray(x, dtype=np.float64)),
        ),
        SmoothFunction(
            "zero", lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)), 1, 1.0, "bounded",
            Ray("constant", bound=0.0, value=0.0, onset=-math.inf),
            Ray("constant", bound=0.0, value=0.0, onset=math.inf),
            derivative="zero",
            exact_right=lambda a, x: np.zeros_like(np.asarray(x, dtype=np.float64)),
            exact_left=lambda a, x: np.zeros_like(np.asarray(x, dtype=np.float64)),
        ),
        SmoothFunction(
            "ramp", lambda x: np.clip(np.asarray(x, dtype=np.float64), -1.0, 1.0), 0, 1.0, "bounded",
            Ray("constant", bound=1.0, value=1.0, onset=1.0),
            Ray("constant", bound=1.0, value=-1.0, onset=-1.0),
            kinks=(-1.0, 1.0),
            derivative="ramp_slope",
            exact_right=_ramp_exact(1.0),
            exact_left=_ramp_exact(-1.0),
        ),
        SmoothFunction(
            "ramp_slope",
            lambda x: (np.abs(np.asarray(x, dtype=np.float64)) < 1.0).astype(np.float64),
            0, 1.0, "bounded",
            Ray("constant", bound=1.0, value=0.0, onset=1.0),
            Ray("constant", bound=1.0, value=0.0, onset=-1.0),
            kinks=(-1.0, 1.0),
            derivative="zero",
        ),
        SmoothFunction(
            "exp_neg", lambda x: np.exp(-np.asarray(x, dtype=np.float64)), 1, 1.0, "right_decaying",
            Ray("decaying", rate=1.0),
            Ray("unbounded"),
            derivative="neg_exp_neg",
            exact_right=lambda a, x: np.exp(-np.asarray(x, dtype=np.float64)),
        ),
        SmoothFunction(
            "neg_exp_neg", lambda x: -np.exp(-np.asarray(x, dtype=np.float64)), 1, 1.0, "right_decaying",
            Ray("decaying", rate=1.0),
            Ray("unbounded"),
            derivative="exp_neg",
            exact_right=lambda a, x: -np.exp(-np.asarray(x, dtype=np.float64)),
        ),
        SmoothFunction(
            "exp_pos", lambda x: np.exp(np.asarray(x, dtype=np.float64)), 1, 1.0, "left_decaying",
            Ray("unbounded"),
            Ray("decaying", rate=1.0),
            derivative="exp_pos",
            exact_left=lambda a, x: np.exp(np.asarray(x, dtype=np.float64)),
        ),
        SmoothFunction(
            "cos", np.cos, 1, 1.0, "bounded", periodic, periodic, period=tau, derivative="neg_sin",
            exact_right=lambda a, x: np.cos(np.asarray(x) - math.pi * a / 2),
            exact_left=lambda a, x: np.cos(np.asarray(x) + math.pi * a / 2),
        ),
        SmoothFunction(
            "sin", np.sin, 1, 1.0, "bounded", periodic, periodic, period=tau, derivative="cos",
            exact_right=lambda a, x: np.sin(np.asarray(x) - math.pi * a / 2),
            exact_left=lambda a, x: np.sin(np.asarray(x) + math.pi * a / 2),
        ),
        SmoothFunction(
            "neg_sin", lambda x: -np.sin(x), 1, 1.0, "bounded", periodic, periodic, period=tau,
            derivative="neg_cos",
            exact_right=lambda a, x: -np.sin(np.asarray(x) - math.pi * a / 2),
            exact_left=lambda a, x: -np.sin(np.asarray(x) + math.pi * a / 2),
        ),
        SmoothFunction(
            "neg_cos", lambda x: -np.cos(x), 1, 1.0, "bounded", periodic, periodic, period=tau,
            derivative="sin",
            exact_right=lambda a, x: -np.cos(np.asarray(x) - math.pi * a / 2),
            exact_left=lambda a, x: -np.cos(np.asarray(x) + math.pi * a / 2),
        ),
    ]
    for beta in (0.5, 0.8):
        ray = Ray("periodic", bound=1.0, mean=_abs_sin_mean(beta), period=math.pi)
        entries.append(
            SmoothFunction(
                f"abs_sin_{beta}",
                lambda x, b=beta: np.abs(np.sin(x)) ** b,
                0, beta, "bounded", ray, ray, kinks=(0.0,), period=math.pi,
            )
        )
    return {f.id: f for f in entries}


REGISTRY: dict[str, SmoothFunction] = _build_registry()


def get_function(name: str) -> SmoothFunction:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown test function {name!r}; known: {sorted(REGISTRY)}") from None


def _as_function(f: SmoothFunction | str) -> SmoothFunction:
    return get_function(f) if isinstance(f, str) else f


# -- Marchaud derivative ---------------------------------------------------------------


def _kink_offsets(f: SmoothFunction, x: float, side: str, s_max: float) -> list[float]:
    """Distances ``s > 0`` from ``x`` to kinks on the given side, up to ``s_max``."""
    sign = 1.0 if side == "right" else -1.0
    out = []
    for k in f.kinks:
        if f.period is None:
            s = sign * (k - x)
            if 0 < s <= s_max:
                out.append(s)
            continue
        P = f.period
        # kinks k + m P with 0 < sign (k + mP - x) <= s_max
        m0 = math.floor((x - k) / P) - 1
        m1 = math.ceil((x - k) / P) + 1
        lo, hi = (m0, m1 + int(s_max / P) + 1) if sign > 0 else (m0 - int(s_max / P) - 1, m1)
        for m in range(lo, hi + 1):
            s = sign * (k + m * P - x)
            if 0 < s <= s_max:
                out.append(s)
    return sorted(out)


def _at_kink(f: SmoothFunction, x: float) -> bool:
    for k in f.kinks:
        d = x - k
        if f.period is not None:
            d = d - f.period * round(d / f.period)
        if abs(d) <= 1e-12 * max(1.0, abs(x)):
            return True
    return False


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge."""


def _quad(func, a, b, tol, **kw) -> float:
    with warnings.catch_warnings():
        # roundoff warnings are expected at these tolerances; the estimate is checked below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(func, a, b, epsabs=tol * 1e-3, epsrel=1e-12, limit=400, **kw)
    if not err <= max(1e3 * tol, 1e-9 * abs(val)):
        raise QuadratureError(f"quadrature on [{a}, {b}] stalled with error {err:.2e}")
    return val


def _taylor(f: SmoothFunction, x: float) -> tuple[float, float, float] | None:
    """First three derivatives of ``f`` at ``x`` from the registry's derivative chain."""
    out = []
    g = f
    for _ in range(3):
        if g.derivative is None:
            return None
        g = get_function(g.derivative)
        out.append(float(g.eval(np.array([x]))[0]))
    return out[0], out[1], out[2]


def _periodic_tail(g, fx: float, mean: float, P: float, T: float, alpha: float, samples: int = 2**16) -> float:
    """:math:`\\int_T^\\infty (g(s) - f(x)) s^{-1-\\alpha} ds` for ``g`` of period ``P``.

    The mean part is exact; the oscillating part is integrated by parts four
    times with the zero-mean antiderivatives computed by FFT over one period.
    """
    tau = np.arange(samples) * (P / samples)
    c = np.fft.rfft(g(T + tau) - mean) / samples
    k = np.arange(len(c))
    omega = 2 * math.pi * k / P
    total = (mean - fx) * T ** (-alpha) / alpha
    poch = 1.0
    coeffs = c.copy()
    for m in range(1, 5):
        coeffs[1:] = coeffs[1:] / (1j * omega[1:])
        coeffs[0] = 0.0
        # value at tau = 0 of the real series with rfft coefficients
        F = coeffs[0].real + 2.0 * np.sum(coeffs[1:].real)
        if samples % 2 == 0:
            F -= coeffs[-1].real
        total -= F * poch * T ** (-alpha - m)
        poch *= alpha + m
    return total


@functools.lru_cache(maxsize=8192)
def _marchaud_cached(fid: str, x: float, alpha: float, side: str, tol: float) -> float:
    f = get_function(fid)
    ray = f.ray(side)
    sign = 1.0 if side == "right" else -1.0
    fx = float(f.eval(np.array([x]))[0])

    def g(s):
        return f.eval(x + sign * np.asarray(s, dtype=np.float64))

    def phi(s):
        return float(g(np.array([s]))[0]) - fx

    if ray.kind == "unbounded":
        raise ValueError(f"{fid} is unbounded on the {side} ray")
    if ray.kind == "constant" and ray.value == fx and sign * (x - ray.onset) >= 0:
        return 0.0

    at_kink = _at_kink(f, x)
    if at_kink and f.holder_k == 0 and not alpha < f.holder_beta:
        raise ValueError(f"Marchaud integral of {fid} at a kink needs alpha < beta = {f.holder_beta}")
    kappa = f.holder_beta if at_kink else 1.0

    near = _kink_offsets(f, x, side, 2.0 + (f.period or 0.0))
    eps = min(1.0, near[0] / 2) if near else 1.0

    # (0, eps]: phi(s) ~ s^kappa, integrate phi(s)/s^kappa against s^(kappa-1-alpha)
    taylor = None if at_kink else _taylor(f, x)
    s_small = 1e-4 * eps

    def regular(s):
        if taylor is not None and s < s_small:
            # f(x+s) - f(x) loses digits for tiny s; expand instead
            d1, d2, d3 = taylor
            return sign * d1 + d2 * s / 2 + sign * d3 * s * s / 6
        # the algebraic-weight rule also samples the endpoint s = 0
        s = max(s, 1e-7 * eps)
        return phi(s) / s**kappa

    inner = _quad(regular, 0.0, eps, tol, weight="alg", wvar=(kappa - 1 - alpha, 0.0))

    if ray.kind == "periodic":
        P = ray.period
        T = eps + 64 * P
        breaks = set(eps + 0.5 * P * np.arange(129))
    elif ray.kind == "constant":
        T = max(eps, sign * (ray.onset - x))
        breaks = {eps, T}
        b = eps
        while b < T:
            breaks.add(b)
            b *= 2
    elif ray.kind == "decaying":
        reach = max(0.0, -sign * x) if ray.onset is None else max(0.0, sign * (ray.onset - x))
        T = eps + reach + 40.0 / ray.rate
        breaks = {eps, T}
        b = eps
        while b < T:
            breaks.add(b)
            b *= 2
    else:
        raise ValueError(f"unknown ray kind {ray.kind!r}")
    breaks.update(s for s in _kink_offsets(f, x, side, T) if s > eps)
    edges = sorted(b for b in breaks if eps <= b <= T)

    middle = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            middle += _quad(lambda s: phi(s) * s ** (-1.0 - alpha), lo, hi, tol)

    if ray.kind == "periodic":
        tail = _periodic_tail(g, fx, ray.mean, ray.period, T, alpha)
    elif ray.kind == "constant":
        tail = (ray.value - fx) * T ** (-alpha) / alpha
    else:
        tail = -fx * T ** (-alpha) / alpha
    return (inner + middle + tail) / special.gamma(-alpha)


def marchaud(
    f: SmoothFunction | str,
    x: float,
    order: FracOrder | float,
    side: str = "right",
    tol: float = 1e-10,
) -> float:
    """Marchaud derivative :math:`(D_{\\pm})^\\alpha f(x)` of a registry function.

    The integral is split at :math:`\\varepsilon` (half the distance to the next
    kink, at most 1). On :math:`(0, \\varepsilon]` the factor :math:`s^{\\kappa-1-\\alpha}`,
    with :math:`\\kappa = \\beta` at a kink and 1 elsewhere, is handled by an
    algebraic-weight rule. The middle range is split at kinks and half periods
    (or doubling intervals). The far part is closed in form: exactly for a ray
    that becomes constant or decays, and by repeated integration by parts for
    a periodic ray.
    """
    f = _as_function(f)
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left': got {side!r}")
    return _marchaud_cached(f.id, float(x), as_order(order).alpha, side, float(tol))


# -- Grünwald–Letnikov ------------------------------------------------------------------


def _ray_limit(ray: Ray) -> float | None:
    if ray.kind == "periodic":
        return ray.mean
    if ray.kind == "constant":
        return ray.value
    if ray.kind == "decaying":
        return 0.0
    return None


@dataclass(frozen=True)
class GLResult:
    value: float
    truncation_bound: float
    M_used: int


def grunwald_letnikov(
    f: SmoothFunction | str,
    x: float,
    order: FracOrder | float,
    h: float,
    side: str = "right",
    table: CoeffTable | None = None,
) -> GLResult:
    """:math:`h^{-\\alpha} \\sum_{k=0}^M \\Lambda^\\alpha(k) f(x \\pm kh)` in centered form.

    The sum beyond ``M`` is replaced by its ray average: with ``L`` the mean,
    limit value or zero of the ray, :math:`\\sum_{k>M} \\Lambda^\\alpha(k)(f - f(x))
    \\approx -(L - f(x)) S_M`, where :math:`S_M = \\sum_{k \\le M}\\Lambda^\\alpha(k)`.
    """
    f = _as_function(f)
    table = _table_for(order, table)
    a = table.alpha
    sign = 1.0 if side == "right" else -1.0
    ray = f.ray(side)
    L = _ray_limit(ray)
    if L is None:
        raise ValueError(f"{f.id} is unbounded on the {side} ray")
    k = np.arange(table.M + 1)
    vals = f.eval(x + sign * k * h)
    fx = vals[0]
    S = table.partial_sum
    total = float(np.dot(table.values, vals - fx))
    total -= (L - fx) * S
    next_coeff = abs(table.values[-1]) * (table.M - a) / (table.M + 1)
    if ray.kind == "periodic":
        bound = next_coeff * (ray.period / h + 1.0) * 2.0 * (ray.bound or 1.0)
    elif ray.kind == "constant":
        bound = 0.0 if sign * (x + sign * table.M * h - ray.onset) >= 0 else S * 2.0 * (ray.bound or 1.0)
    else:
        q = math.exp(-ray.rate * h)
        bound = next_coeff * abs(vals[-1]) * q / (1 - q)
    scale = h ** (-a)
    return GLResult(total * scale, bound * scale, table.M)


# -- convergence harness -------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    alpha: float
    beta: float
    h_list: tuple[float, ...]
    err_list: tuple[float, ...]
    slope: float
    r2: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        if len(self.h_list) != len(self.err_list) or len(self.h_list) < 4:
            raise ValueError("a convergence report needs at least four (h, error) pairs")
        if any(b >= a for a, b in zip(self.h_list, self.h_list[1:])):
            raise ValueError("h_list must be strictly decreasing")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "h_list": list(self.h_list),
            "err_list": list(self.err_list),
            "slope": None if math.isnan(self.slope) else self.slope,
            "r2": None if math.isnan(self.r2) else self.r2,
            "degenerate": self.degenerate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        rows = ["h,err"] + [f"{h:.17g},{e:.17g}" for h, e in zip(self.h_list, self.err_list)]
        return "\n".join(rows) + "\n"


def fit_order(h_list, err_list) -> tuple[float, float]:
    """Least-squares slope of :math:`\\log(err)` against :math:`\\log(h)` and its :math:`r^2`."""
    h = np.asarray(h_list, dtype=np.float64)
    e = np.asarray(err_list, dtype=np.float64)
    if h.shape != e.shape or len(h) < 4:
        raise DegenerateFitError("need at least four (h, error) pairs")
    if np.any(e <= 0) or np.any(h <= 0) or not np.all(np.isfinite(e)):
        raise DegenerateFitError("errors must be positive and finite to fit an order")
    x, y = np.log(h), np.log(e)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def _report(alpha, beta, h_list, errs) -> ConvergenceReport:
    try:
        slope, r2 = fit_order(h_list, errs)
        degenerate = False
    except DegenerateFitError:
        slope, r2, degenerate = math.nan, math.nan, True
    return ConvergenceReport(alpha, beta, tuple(map(float, h_list)), tuple(map(float, errs)), slope, r2, degenerate)


def _check_class(f: SmoothFunction, alpha: float) -> None:
    if f.holder_k == 0 and not alpha < f.holder_beta:
        raise ValueError(f"need alpha < beta = {f.holder_beta} for {f.id}")


def _target(f: SmoothFunction, x: np.ndarray, alpha: float, side: str = "right") -> np.ndarray:
    exact = f.exact(side)
    if exact is not None:
        return np.asarray(exact(alpha, x), dtype=np.float64)
    return np.array([marchaud(f, float(xi), alpha, side) for xi in x])


def sample_points(h: float, window: tuple[float, float], x_step: float | None = None) -> np.ndarray:
    """Mesh indices ``n`` with ``n*h`` in the window, optionally only on the
    coarser lattice ``x_step * Z`` (which must be a multiple of ``h``)."""
    lo, hi = window
    if x_step is None:
        return np.arange(math.ceil(lo / h - 1e-9), math.floor(hi / h + 1e-9) + 1)
    stride = round(x_step / h)
    if stride < 1 or abs(stride * h - x_step) > 1e-9 * x_step:
        raise ValueError(f"x_step {x_step} is not a multiple of h {h}")
    k = np.arange(math.ceil(lo / x_step - 1e-9), math.floor(hi / x_step + 1e-9) + 1)
    return k * stride


def compare_discrete_continuous(
    f: SmoothFunction | str,
    order: FracOrder | float,
    h: float,
    window: tuple[float, float],
    x_step: float | None = None,
    table: CoeffTable | None = None,
) -> float:
    """:math:`\\sup_n |(\\delta_{right})^\\alpha(r_h f)(nh) - (D_{right})^\\alpha f(nh)|` over the
    physical window (see :func:`sample_points`)."""
    f = _as_function(f)
    alpha = as_order(order).alpha
    _check_class(f, alpha)
    table = _table_for(alpha, table)
    n = sample_points(h, window, x_step)
    u = restrict(f, Grid(h, int(n.min()), int(n.max())))
    disc = np.array([frac_right(u, alpha, int(k), table).value for k in n])
    return float(np.max(np.abs(disc - _target(f, n * h, alpha))))


def discretization_sweep(
    f: SmoothFunction | str,
    order: FracOrder | float,
    h_list,
    window: tuple[float, float] = (-1.0, 1.0),
    x_step: float | None = None,
    M: int = 10**5,
) -> ConvergenceReport:
    """:func:`compare_discrete_continuous` over decreasing ``h`` with a fitted order."""
    f = _as_function(f)
    alpha = as_order(order).alpha
    table = _table_for(alpha, None, M)
    errs = [compare_discrete_continuous(f, alpha, h, window, x_step, table) for h in h_list]
    return _report(alpha, f.holder_beta, h_list, errs)


def gl_vs_marchaud(
    f: SmoothFunction | str,
    x,
    order: FracOrder | float,
    h_list,
    side: str = "right",
    M: int = 10**5,
) -> ConvergenceReport:
    """Per-``h`` sup over the points ``x`` of :math:`|GL_h f(x) - (D_\\pm)^\\alpha f(x)|`.

    The Marchaud value is computed by quadrature even when a closed form is
    known, so the check is independent of the registry's formulas.
    """
    f = _as_function(f)
    alpha = as_order(order).alpha
    _check_class(f, alpha)
    table = _table_for(alpha, None, M)
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    ref = np.array([marchaud(f, float(xi), alpha, side) for xi in xs])
    errs = []
    for h in h_list:
        gl = np.array([grunwald_letnikov(f, float(xi), alpha, h, side, table).value for xi in xs])
        errs.append(float(np.max(np.abs(gl - ref))))
    return _report(alpha, f.holder_beta, h_list, errs)


def derivative_variant_check(
    f: SmoothFunction | str,
    order: FracOrder | float,
    h_list,
    window: tuple[float, float] = (-1.0, 1.0),
    x_step: float | None = None,
    M: int = 10**5,
) -> ConvergenceReport:
    """Sup error of :math:`-\\delta_{right}(\\delta_{right})^\\alpha r_h f` against
    :math:`r_h (D_{right})^\\alpha f'`, using that the derivative commutes with
    the fractional power."""
    f = _as_function(f)
    if f.derivative is None:
        raise ValueError(f"{f.id} has no registered derivative")
    df = get_function(f.derivative)
    alpha = as_order(order).alpha
    table = _table_for(alpha, None, M)
    errs = []
    for h in h_list:
        n = sample_points(h, window, x_step)
        u = restrict(f, Grid(h, int(n.min()), int(n.max()) + 1))
        w0 = np.array([frac_right(u, alpha, int(k), table).value for k in n])
        w1 = np.array([frac_right(u, alpha, int(k) + 1, table).value for k in n])
        disc = (w1 - w0) / h
        errs.append(float(np.max(np.abs(disc - _target(df, n * h, alpha)))))
    return _report(alpha, f.holder_beta, h_list, errs)


# -- kernel versus continuous weights ----------------------------------------------------


def kernel_cell_constants(alpha: float, h: float, m) -> np.ndarray:
    """:math:`m^{2+\\alpha} h^\\alpha \\left|\\frac{1}{\\Gamma(-\\alpha)}\\int_{mh}^{(m+1)h}
    t^{-1-\\alpha}dt - \\Lambda^\\alpha(m) h^{-\\alpha}\\right|`.

    Both terms are of size :math:`m^{-1-\\alpha}` and differ at order
    :math:`m^{-2-\\alpha}`, so the cell integral uses the cancellation-free
    form :math:`-m^{-\\alpha}\\,\\mathrm{expm1}(-\\alpha\\,\\mathrm{log1p}(1/m))/\\alpha`
    and :math:`\\Lambda^\\alpha(m)` comes from log-Gamma values.
    """
    a = float(alpha)
    m = np.asarray(m, dtype=np.float64)
    cell = -(m ** (-a)) * np.expm1(-a * np.log1p(1.0 / m)) / a
    integral = cell / special.gamma(-a) * h ** (-a)
    lam = -np.exp(special.gammaln(m - a) - special.gammaln(m + 1) - special.gammaln(1 - a)) * a
    # Lambda(m) = Gamma(m - a) / (Gamma(-a) m!) and Gamma(-a) = -Gamma(1 - a) / a
    return m ** (2 + a) * h**a * np.abs(integral - lam * h ** (-a))


def kernel_cell_limit(alpha: float) -> float:
    """Large-``m`` limit :math:`(1+\\alpha)^2 / (2|\\Gamma(-\\alpha)|)` of :func:`kernel_cell_constants`."""
    return (1 + alpha) ** 2 / (2 * abs(special.gamma(-alpha)))
