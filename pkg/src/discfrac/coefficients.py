"""Binomial kernels of the discrete fractional differences and Poisson heat weights.

The positive-power kernel is

.. math::

    \\Lambda^\\alpha(m) = \\binom{m - \\alpha - 1}{m} = (-1)^m \\binom{\\alpha}{m},

and the negative-power kernel is :math:`\\Lambda^{-\\alpha}(j) = \\Gamma(j + \\alpha) /
(\\Gamma(\\alpha) j!)`. Both are generated by multiplicative recurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special


class OrderError(ValueError):
    """Raised when a fractional order lies outside :math:`(0, 1)`."""


@dataclass(frozen=True)
class FracOrder:
    """Fractional order :math:`0 < \\alpha < 1`.

    ``negative`` selects the negative power :math:`-\\alpha` while ``alpha``
    itself always stays inside :math:`(0, 1)`.
    """

    alpha: float
    negative: bool = False

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not (0.0 < a < 1.0) or not math.isfinite(a):
            raise OrderError(f"fractional order must lie in (0, 1): got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def signed(self) -> float:
        return -self.alpha if self.negative else self.alpha


def as_order(order: FracOrder | float) -> FracOrder:
    if isinstance(order, FracOrder):
        return order
    return FracOrder(order)


def _readonly(x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    x.setflags(write=False)
    return x


@dataclass(frozen=True)
class CoeffTable:
    """Truncated kernel :math:`\\Lambda^{\\pm\\alpha}(0), \\dots, \\Lambda^{\\pm\\alpha}(M)`.

    For the positive power ``tail_mass`` bounds :math:`\\sum_{m > M} |\\Lambda^\\alpha(m)|`.
    For the negative power the kernel is not summable and ``tail_mass`` holds
    the growth exponent :math:`\\alpha - 1` of :math:`\\Lambda^{-\\alpha}(j) \\sim
    j^{\\alpha - 1} / \\Gamma(\\alpha)`.
    """

    order: FracOrder
    M: int
    values: np.ndarray = field(repr=False)
    tail_mass: float

    @property
    def alpha(self) -> float:
        return self.order.alpha

    @property
    def negative(self) -> bool:
        return self.order.negative

    @property
    def partial_sum(self) -> float:
        """:math:`\\sum_{m=0}^M \\Lambda^\\alpha(m)`, which equals the exact tail
        :math:`-\\sum_{m > M} \\Lambda^\\alpha(m)` since the full kernel sums to zero."""
        return _partial_sum(self)


def _partial_sum(table: CoeffTable) -> float:
    # Sum_{m<=M} Lambda^alpha(m) = Lambda^{alpha-1}(M) = Gamma(M+1-alpha) / (Gamma(1-alpha) M!)
    a = table.alpha
    if table.negative:
        raise ValueError("partial sums are only defined for the positive-power kernel")
    M = table.M
    return math.exp(special.gammaln(M + 1 - a) - special.gammaln(M + 1) - special.gammaln(1 - a))


def _check_count(M: int, minimum: int = 1) -> int:
    if int(M) != M or M < minimum:
        raise ValueError(f"truncation length must be an integer >= {minimum}: got {M!r}")
    return int(M)


def lambda_coeffs(order: FracOrder | float, M: int) -> CoeffTable:
    """Kernel :math:`\\Lambda^\\alpha(0..M)` by the recurrence
    :math:`\\Lambda(m) = \\Lambda(m-1)(m - 1 - \\alpha)/m`.

    >>> lambda_coeffs(0.5, 3).values.tolist()
    [1.0, -0.5, -0.125, -0.0625]
    """
    order = as_order(order)
    if order.negative:
        return lambda_neg_coeffs(order, M)
    M = _check_count(M)
    a = order.alpha
    m = np.arange(1, M + 1, dtype=np.float64)
    values = np.empty(M + 1)
    values[0] = 1.0
    values[1:] = np.cumprod((m - 1.0 - a) / m)
    return CoeffTable(order, M, _readonly(values), tail_mass_estimate(order, M))


def lambda_neg_coeffs(order: FracOrder | float, M: int) -> CoeffTable:
    """Kernel :math:`\\Lambda^{-\\alpha}(j) = \\Gamma(j+\\alpha)/(\\Gamma(\\alpha) j!)` for
    :math:`j = 0..M`; positive and decreasing but not summable."""
    order = as_order(order)
    order = FracOrder(order.alpha, negative=True)
    M = _check_count(M)
    a = order.alpha
    j = np.arange(1, M + 1, dtype=np.float64)
    values = np.empty(M + 1)
    values[0] = 1.0
    values[1:] = np.cumprod((j - 1.0 + a) / j)
    return CoeffTable(order, M, _readonly(values), a - 1.0)


def lambda_gamma_ratio(alpha: float, m: int | np.ndarray) -> np.ndarray:
    """Direct evaluation :math:`\\Gamma(m - \\alpha)/(\\Gamma(-\\alpha)\\Gamma(m+1))`.

    Kept as an independent cross-check for small ``m``; the quotient loses
    accuracy (and overflows) for large arguments.
    """
    m = np.asarray(m, dtype=np.float64)
    return special.gamma(m - alpha) / (special.gamma(-alpha) * special.gamma(m + 1))


def tail_mass_estimate(order: FracOrder | float, M: int) -> float:
    """Leading-order tail mass :math:`M^{-\\alpha}/\\Gamma(1-\\alpha)`.

    The exact tail :math:`\\sum_{m>M}|\\Lambda^\\alpha(m)| = \\Gamma(M+1-\\alpha)/
    (\\Gamma(1-\\alpha) M!)` never exceeds this value (Wendel's inequality), so it
    is a bound for every ``M >= 1``, not only asymptotically.
    """
    order = as_order(order)
    M = _check_count(M)
    a = order.alpha
    return M ** (-a) / math.gamma(1.0 - a)


@dataclass(frozen=True)
class HeatWeights:
    """Poisson weights :math:`G_t(j) = e^{-t} t^j / j!` for :math:`j = 0..J`."""

    t: float
    J: int
    values: np.ndarray = field(repr=False)
    mass_deficit: float


def heat_weights(t: float, tolerance: float = 1e-14) -> HeatWeights:
    """Weights :math:`G_t(0..J)` with :math:`J` large enough that the Poisson
    tail :math:`P(X > J)` is at most ``tolerance``.

    For ``t <= 700`` the recurrence :math:`G_t(j) = G_t(j-1) t / j` is used;
    beyond that :math:`e^{-t}` underflows and the weights are built in log space.
    """
    t = float(t)
    if not (t >= 0.0) or not math.isfinite(t):
        raise ValueError(f"heat weights need t >= 0: got {t!r}")
    if t == 0.0:
        return HeatWeights(0.0, 0, _readonly(np.ones(1)), 0.0)
    J = int(math.ceil(t + 12.0 * math.sqrt(t) + 40.0))
    while special.pdtrc(J, t) > tolerance:
        J = int(J * 1.25) + 10
    j = np.arange(J + 1, dtype=np.float64)
    if t <= 700.0:
        values = np.empty(J + 1)
        values[0] = math.exp(-t)
        values[1:] = t / j[1:]
        values = np.cumprod(values)
    else:
        values = np.exp(-t + j * math.log(t) - special.gammaln(j + 1.0))
    deficit = max(0.0, 1.0 - math.fsum(values))
    return HeatWeights(t, J, _readonly(values), deficit)


def jump_distribution(order: FracOrder | float, M: int) -> np.ndarray:
    """Jump probabilities :math:`p(n) = -\\Lambda^\\alpha(n)` for :math:`n = 1..M`.

    They describe a particle at ``j`` jumping to ``j + n``; the missing mass
    :math:`1 - \\sum p(n)` equals the kernel's tail mass beyond ``M``.
    """
    order = as_order(order)
    if order.negative:
        raise ValueError("jump distribution needs the positive-power kernel")
    table = lambda_coeffs(order, M)
    return _readonly(-table.values[1:])
