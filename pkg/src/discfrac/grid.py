"""Functions on the mesh :math:`h\\mathbb{Z}` stored on a finite window with explicit tails.

Every public routine addresses points by their *physical index* ``n`` (the
point is ``n * h``), never by array offset.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np


class UnresolvableError(LookupError):
    """A value outside the stored window was requested from an undefined tail."""


@dataclass(frozen=True)
class Grid:
    h: float
    n_lo: int
    n_hi: int

    def __post_init__(self) -> None:
        if not (float(self.h) > 0.0) or not math.isfinite(self.h):
            raise ValueError(f"mesh step must be positive: got {self.h!r}")
        if int(self.n_lo) != self.n_lo or int(self.n_hi) != self.n_hi:
            raise ValueError("window bounds must be integers")
        if self.n_lo > self.n_hi:
            raise ValueError(f"empty window [{self.n_lo}, {self.n_hi}]")
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "n_lo", int(self.n_lo))
        object.__setattr__(self, "n_hi", int(self.n_hi))

    @property
    def size(self) -> int:
        return self.n_hi - self.n_lo + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_lo, self.n_hi + 1)

    @property
    def points(self) -> np.ndarray:
        return self.indices * self.h


# -- tails --------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroTail:
    def evaluate(self, n: np.ndarray, h: float) -> np.ndarray:
        return np.zeros(len(n))


@dataclass(frozen=True)
class ConstantTail:
    value: float

    def evaluate(self, n: np.ndarray, h: float) -> np.ndarray:
        return np.full(len(n), float(self.value))


@dataclass(frozen=True)
class CallbackTail:
    """Tail given by a vectorized callback of the physical point ``x = n*h``.

    Optional metadata used by truncated sums:

    * ``bound``: sup of ``|f|`` on the ray;
    * ``decay``: ratio ``q < 1`` with ``|f(n+1)| <= q |f(n)|`` along the ray
      (geometric decay), required by the negative powers;
    * ``mean``/``period``: asymptotic mean and period (physical units) of an
      oscillating tail, which lets truncated kernel sums add the mean part of
      the remainder exactly.
    * ``name``: registry identifier, used for serialization.
    """

    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    name: str | None = None
    bound: float | None = None
    decay: float | None = None
    mean: float | None = None
    period: float | None = None

    def evaluate(self, n: np.ndarray, h: float) -> np.ndarray:
        x = np.asarray(n, dtype=np.float64) * h
        out = np.asarray(self.func(x), dtype=np.float64)
        out = np.broadcast_to(out, x.shape).astype(np.float64)
        if not np.all(np.isfinite(out)):
            raise UnresolvableError("callback tail returned non-finite values")
        return out


@dataclass(frozen=True)
class UndefinedTail:
    """Marks a side on which the function is not available."""

    def evaluate(self, n: np.ndarray, h: float) -> np.ndarray:
        if len(n):
            raise UnresolvableError(
                f"indices {int(np.min(n))}..{int(np.max(n))} fall on an undefined tail"
            )
        return np.zeros(0)


TailModel = Union[ZeroTail, ConstantTail, CallbackTail, UndefinedTail]


def tail_constant(tail: TailModel) -> float | None:
    """Constant value of a tail, or ``None`` if it is not constant."""
    if isinstance(tail, ZeroTail):
        return 0.0
    if isinstance(tail, ConstantTail):
        return float(tail.value)
    return None


# -- grid functions -------------------------------------------------------------


@dataclass(frozen=True)
class GridFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)
    tail_right: TailModel = ZeroTail()
    tail_left: TailModel = ZeroTail()

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (self.grid.size,):
            raise ValueError(
                f"expected {self.grid.size} values for window "
                f"[{self.grid.n_lo}, {self.grid.n_hi}], got shape {v.shape}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def n_lo(self) -> int:
        return self.grid.n_lo

    @property
    def n_hi(self) -> int:
        return self.grid.n_hi

    def take(self, a: int, b: int) -> np.ndarray:
        """Values at indices ``a..b`` (inclusive), reading tails outside the window."""
        if b < a:
            return np.zeros(0)
        out = np.empty(b - a + 1)
        lo, hi = self.n_lo, self.n_hi
        if a < lo:
            k = min(b, lo - 1)
            out[: k - a + 1] = self.tail_left.evaluate(np.arange(a, k + 1), self.h)
        s, e = max(a, lo), min(b, hi)
        if s <= e:
            out[s - a : e - a + 1] = self.values[s - lo : e - lo + 1]
        if b > hi:
            k = max(a, hi + 1)
            out[k - a :] = self.tail_right.evaluate(np.arange(k, b + 1), self.h)
        return out

    def __call__(self, n: int) -> float:
        return float(self.take(n, n)[0])

    def with_values(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.grid, values, self.tail_right, self.tail_left)

    def __mul__(self, c: float) -> GridFunction:
        return GridFunction(
            self.grid, c * self.values, _scale_tail(self.tail_right, c), _scale_tail(self.tail_left, c)
        )

    __rmul__ = __mul__


def _scale_tail(tail: TailModel, c: float) -> TailModel:
    if isinstance(tail, ConstantTail):
        return ConstantTail(c * tail.value)
    if isinstance(tail, CallbackTail):
        return CallbackTail(
            lambda x, f=tail.func: c * np.asarray(f(x)),
            bound=None if tail.bound is None else abs(c) * tail.bound,
            decay=tail.decay,
            mean=None if tail.mean is None else c * tail.mean,
            period=tail.period,
        )
    return tail


def lazy_tail(op: Callable[[np.ndarray], np.ndarray], h: float, **meta) -> CallbackTail:
    """Callback tail that evaluates an index-based operator on demand."""

    def func(x: np.ndarray) -> np.ndarray:
        n = np.rint(np.asarray(x) / h).astype(np.int64)
        return op(np.atleast_1d(n))

    return CallbackTail(func, **meta)


def shift(u: GridFunction, k: int) -> GridFunction:
    """``v(n) = u(n + k)``."""
    grid = Grid(u.h, u.n_lo - k, u.n_hi - k)
    return GridFunction(grid, u.values, _shift_tail(u.tail_right, k, u.h), _shift_tail(u.tail_left, k, u.h))


def _shift_tail(tail: TailModel, k: int, h: float) -> TailModel:
    if isinstance(tail, CallbackTail):
        return CallbackTail(
            lambda x, f=tail.func: f(np.asarray(x) + k * h),
            bound=tail.bound,
            decay=tail.decay,
            mean=tail.mean,
            period=tail.period,
        )
    return tail


# -- constructors ----------------------------------------------------------------


def indicator(grid: Grid, k: int = 0) -> GridFunction:
    """Indicator of the single index ``k`` with zero tails."""
    if not grid.n_lo <= k <= grid.n_hi:
        raise ValueError(f"index {k} outside window [{grid.n_lo}, {grid.n_hi}]")
    v = np.zeros(grid.size)
    v[k - grid.n_lo] = 1.0
    return GridFunction(grid, v)


def constant(grid: Grid, c: float) -> GridFunction:
    return GridFunction(grid, np.full(grid.size, float(c)), ConstantTail(c), ConstantTail(c))


def geometric(grid: Grid, r: float) -> GridFunction:
    """``u(n) = r**n`` with callback tails; the decaying side carries ``decay``."""
    r = float(r)
    if not r > 0:
        raise ValueError("ratio must be positive")
    h = grid.h

    def func(x):
        return r ** np.rint(np.asarray(x) / h)

    right = CallbackTail(func, decay=r if r < 1 else None, bound=r ** (grid.n_hi + 1) if r <= 1 else None)
    left = CallbackTail(func, decay=1 / r if r > 1 else None, bound=r ** (grid.n_lo - 1) if r >= 1 else None)
    return GridFunction(grid, r ** grid.indices.astype(np.float64), right, left)


def restrict(f, grid: Grid) -> GridFunction:
    """Sample a real-line function at ``n*h`` on the window; both tails call ``f``.

    ``f`` is a :class:`~discfrac.continuous.SmoothFunction` (or any object with
    a vectorized ``eval`` and optional ray metadata). A ray that is constant
    from some onset on becomes a :class:`ConstantTail` once the window reaches
    the onset.
    """
    values = np.asarray(f.eval(grid.points), dtype=np.float64)
    return GridFunction(grid, values, _ray_tail(f, "right", grid), _ray_tail(f, "left", grid))


def _ray_tail(f, side: str, grid: Grid) -> TailModel:
    ray = getattr(f, side, None)
    name = getattr(f, "id", None)
    if ray is None:
        return CallbackTail(f.eval, name=name)
    if ray.kind == "constant":
        edge = (grid.n_hi + 1) * grid.h if side == "right" else (grid.n_lo - 1) * grid.h
        reached = edge >= ray.onset if side == "right" else edge <= ray.onset
        if reached:
            return ConstantTail(ray.value)
    decay = None
    if ray.kind == "decaying" and ray.rate is not None:
        decay = math.exp(-ray.rate * grid.h)
    return CallbackTail(f.eval, name=name, bound=ray.bound, decay=decay, mean=ray.mean, period=ray.period)


# -- differences -----------------------------------------------------------------


def delta_right(u: GridFunction, n: int) -> float:
    """:math:`(u(nh) - u((n+1)h))/h`."""
    a, b = u.take(n, n + 1)
    return (a - b) / u.h


def delta_left(u: GridFunction, n: int) -> float:
    """:math:`(u(nh) - u((n-1)h))/h`."""
    b, a = u.take(n - 1, n)
    return (a - b) / u.h


def delta_right_apply(u: GridFunction) -> GridFunction:
    """:math:`\\delta_{right} u` on the window of ``u``, with lazy tails."""
    vals = u.take(u.n_lo, u.n_hi + 1)
    h = u.h

    def op(n):
        out = np.empty(len(n))
        for i, k in enumerate(n):
            out[i] = delta_right(u, int(k))
        return out

    return GridFunction(
        u.grid,
        (vals[:-1] - vals[1:]) / h,
        _diff_tail(u.tail_right, op, h),
        lazy_tail(op, h),
    )


def delta_left_apply(u: GridFunction) -> GridFunction:
    vals = u.take(u.n_lo - 1, u.n_hi)
    h = u.h

    def op(n):
        out = np.empty(len(n))
        for i, k in enumerate(n):
            out[i] = delta_left(u, int(k))
        return out

    return GridFunction(
        u.grid,
        (vals[1:] - vals[:-1]) / h,
        lazy_tail(op, h),
        _diff_tail(u.tail_left, op, h),
    )


def _diff_tail(tail: TailModel, op, h: float) -> TailModel:
    if tail_constant(tail) is not None:
        return ZeroTail()
    return lazy_tail(op, h)


# -- norms -----------------------------------------------------------------------


def lp_norm(u: GridFunction, p: float) -> float:
    """:math:`\\ell^p` norm including whatever the tails contribute in closed form.

    Zero tails add nothing. Constant non-zero tails are not summable for
    ``p < inf``. Callback tails are summed only when they declare geometric
    ``decay``; for ``p = inf`` callback tails contribute nothing, so the result
    is the sup over the sampled window.
    """
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be in [1, inf]: got {p}")
    w = np.abs(u.values)
    if math.isinf(p):
        out = float(w.max())
        for tail in (u.tail_left, u.tail_right):
            c = tail_constant(tail)
            if c is not None:
                out = max(out, abs(c))
        return out
    total = float(np.sum(w**p))
    for side, tail in (("left", u.tail_left), ("right", u.tail_right)):
        c = tail_constant(tail)
        if c is not None:
            if c != 0:
                raise ValueError(f"constant {side} tail {c} is not p-summable")
            continue
        if isinstance(tail, CallbackTail) and tail.decay is not None:
            total += _geometric_tail_sum(u, side, p)
            continue
        raise ValueError(f"{side} tail has no closed-form p-summation")
    return total ** (1.0 / p)


def _geometric_tail_sum(u: GridFunction, side: str, p: float) -> float:
    total, start, chunk = 0.0, 1, 256
    while True:
        if side == "right":
            vals = u.take(u.n_hi + start, u.n_hi + start + chunk - 1)
        else:
            vals = u.take(u.n_lo - start - chunk + 1, u.n_lo - start)[::-1]
        s = float(np.sum(np.abs(vals) ** p))
        total += s
        if s <= 1e-17 * max(total, 1e-300) or abs(vals[-1]) == 0.0:
            return total
        start += chunk


def holder_seminorm(u: GridFunction, beta: float) -> float:
    """Discrete Hölder seminorm over all pairs of the window.

    .. math::

        \\max_{j \\ne m} \\frac{|u(jh) - u(mh)|}{h^\\beta |j - m|^\\beta}

    Tails are ignored: the result is a statement about the window only.
    """
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1]: got {beta}")
    if u.grid.size < 2:
        raise ValueError("Hölder seminorm needs at least two window points")
    v = u.values
    best = 0.0
    # pairs at offset d, one vectorized sweep per offset
    for d in range(1, len(v)):
        diff = np.abs(v[d:] - v[:-d])
        m = float(diff.max())
        if m > 0:
            best = max(best, m / (u.h * d) ** beta)
    return best


# -- serialization -------------------------------------------------------------------


def _tail_to_json(tail: TailModel) -> dict:
    if isinstance(tail, ZeroTail):
        return {"kind": "zero"}
    if isinstance(tail, ConstantTail):
        return {"kind": "constant", "value": float(tail.value)}
    if isinstance(tail, CallbackTail):
        if tail.name is None:
            raise ValueError("only registry callbacks can be serialized")
        return {"kind": "callback", "name": tail.name}
    return {"kind": "undefined"}


def _tail_from_json(desc: dict, side: str, grid: Grid) -> TailModel:
    kind = desc["kind"]
    if kind == "zero":
        return ZeroTail()
    if kind == "constant":
        return ConstantTail(float(desc["value"]))
    if kind == "undefined":
        return UndefinedTail()
    if kind == "callback":
        from .continuous import get_function

        return _ray_tail(get_function(desc["name"]), side, grid)
    raise ValueError(f"unknown tail kind {kind!r}")


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write text through a temporary file and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_grid_function(u: GridFunction, path: str | os.PathLike) -> None:
    """Write ``n,value`` rows to ``path`` and a JSON sidecar ``path + '.json'``."""
    lines = ["n,value"]
    lines += [f"{n},{v:.17g}" for n, v in zip(u.grid.indices, u.values)]
    meta = {
        "h": u.h,
        "n_lo": u.n_lo,
        "n_hi": u.n_hi,
        "tail_right": _tail_to_json(u.tail_right),
        "tail_left": _tail_to_json(u.tail_left),
    }
    atomic_write(path, "\n".join(lines) + "\n")
    atomic_write(os.fspath(path) + ".json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_grid_function(path: str | os.PathLike) -> GridFunction:
    with open(os.fspath(path) + ".json", encoding="utf-8") as fh:
        meta = json.load(fh)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    grid = Grid(meta["h"], meta["n_lo"], meta["n_hi"])
    idx = [int(r["n"]) for r in rows]
    if idx != list(range(grid.n_lo, grid.n_hi + 1)):
        raise ValueError("CSV rows do not match the sidecar window")
    values = np.array([float(r["value"]) for r in rows])
    right = _tail_from_json(meta["tail_right"], "right", grid)
    left = _tail_from_json(meta["tail_left"], "left", grid)
    return GridFunction(grid, values, right, left)
