"""Command-line front end.

Every subcommand writes its result files atomically, together with a
``<out>.config.json`` sidecar holding the resolved configuration. Exit codes:
0 success, 2 invalid parameters, 3 a result outside its acceptance band,
4 a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BAND = 3
EXIT_NUMERICAL = 4


class ValidationError(ValueError):
    pass


class BandError(RuntimeError):
    pass


# -- argument helpers -----------------------------------------------------------------


def _pair(text: str, cast=float) -> tuple:
    parts = str(text).split(":")
    if len(parts) != 2:
        raise ValidationError(f"expected lo:hi, got {text!r}")
    return cast(parts[0]), cast(parts[1])


def _band(text: str) -> tuple[float, float]:
    lo, hi = (s.strip() for s in str(text).split(":"))
    return (float(lo) if lo else -math.inf, float(hi) if hi else math.inf)


def h_sequence(text: str) -> list[float]:
    """``"0.2:0.0125"`` halves from 0.2 down to 0.0125; ``"0.2,0.1,0.05"`` lists values."""
    text = str(text)
    if ":" in text:
        h0, h1 = _pair(text)
        if not h0 > h1 > 0:
            raise ValidationError("h range must be start:end with start > end > 0")
        out = [h0]
        while out[-1] / 2 >= h1 * (1 - 1e-9):
            out.append(out[-1] / 2)
        return out
    return [float(x) for x in text.split(",")]


def read_config(path: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"bad config line {line!r}")
            k, v = line.split("=", 1)
            cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def _write(path: str, text: str, config: dict) -> None:
    from .grid import atomic_write

    atomic_write(path, text)
    atomic_write(path + ".config.json", json.dumps(config, indent=2, sort_keys=True) + "\n")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _alpha(value) -> float:
    from .coefficients import FracOrder

    return FracOrder(float(value)).alpha


# -- subcommands -----------------------------------------------------------------------


def cmd_coeffs(args, config) -> int:
    from .coefficients import lambda_coeffs

    if int(args.M) < 1:
        raise ValidationError("M must be >= 1")
    table = lambda_coeffs(_alpha(args.alpha), int(args.M))
    rows = ["m,lambda"] + [f"{m},{_fmt(v)}" for m, v in enumerate(table.values)]
    _write(args.out, "\n".join(rows) + "\n", config)
    return EXIT_OK


def _input_function(name: str, h: float, lo: int, hi: int, r: float):
    from .continuous import get_function
    from .grid import Grid, constant, geometric, indicator, restrict

    grid = Grid(h, lo, hi)
    if name == "indicator":
        if not lo <= 0 <= hi:
            raise ValidationError("the indicator input needs 0 inside the window")
        return indicator(grid, 0)
    if name == "geometric":
        return geometric(grid, r)
    if name == "const":
        return constant(grid, 1.0)
    try:
        return restrict(get_function(name), grid)
    except KeyError as exc:
        raise ValidationError(str(exc)) from None


def cmd_apply(args, config) -> int:
    from .fracops import frac_left, frac_neg_left, frac_neg_right, frac_right, lambda_coeffs

    alpha = _alpha(args.alpha)
    lo, hi = _pair(args.window, int)
    u = _input_function(args.f, float(args.h), lo, hi, float(args.r))
    rows = ["n,value,truncation_bound"]
    if args.negative:
        op = frac_neg_right if args.side == "right" else frac_neg_left
        results = [op(u, alpha, n) for n in range(lo, hi + 1)]
    else:
        table = lambda_coeffs(alpha, int(args.M))
        op = frac_right if args.side == "right" else frac_left
        results = [op(u, alpha, n, table) for n in range(lo, hi + 1)]
    rows += [f"{n},{_fmt(res.value)},{_fmt(res.truncation_bound)}" for n, res in zip(range(lo, hi + 1), results)]
    _write(args.out, "\n".join(rows) + "\n", config)
    return EXIT_OK


def cmd_dirichlet(args, config) -> int:
    from .fracops import DirichletProblem, solve_dirichlet
    from .grid import Grid, GridFunction, geometric

    alpha = _alpha(args.alpha)
    j0, j1, h, r = int(args.j0), int(args.j1), float(args.h), float(args.r)
    if not j0 < j1:
        raise ValidationError("need j0 < j1")
    if args.fixture == "eigen":
        g = geometric(Grid(h, j1, j1), r)
        n = np.arange(j0, j1)
        # f = (delta_right)^alpha r^n = r^n (1 - r)^alpha h^-alpha
        f = r**n * (1 - r) ** alpha * h ** (-alpha)
    elif args.fixture == "random":
        rng = np.random.default_rng(int(args.seed))
        f = rng.random(j1 - j0)
        g = GridFunction(Grid(h, j1, j1), np.zeros(1))
    else:
        raise ValidationError(f"unknown fixture {args.fixture!r}")
    M = int(args.M) if args.M is not None else None
    from .coefficients import lambda_coeffs

    table = lambda_coeffs(alpha, M) if M else None
    sol = solve_dirichlet(DirichletProblem(alpha, j0, j1, f, g), table, tolerance=float(args.tolerance))
    rows = ["n,u,residual"]
    for i, n in enumerate(range(j0, j1)):
        rows.append(f"{n},{_fmt(sol.u(n))},{_fmt(sol.residuals[i])}")
    _write(args.out, "\n".join(rows) + "\n", config)
    if args.fixture == "eigen":
        err = max(abs(sol.u(n) - r**n) for n in range(j0, j1))
        if err > float(args.max_error):
            raise BandError(f"eigen fixture error {err:.3e} above {args.max_error}")
    return EXIT_OK


def cmd_extension(args, config) -> int:
    from .semigroups import neumann_limit, poisson_apply

    gamma = float(args.gamma)
    if not 0 < gamma < 1:
        raise ValidationError("gamma must lie in (0, 1)")
    lo, hi = _pair(args.window, int)
    u = _input_function(args.f, float(args.h), lo, hi, float(args.r))
    zs = [float(z) for z in str(args.z).split(",")]
    if any(z <= 0 for z in zs):
        raise ValidationError("z values must be positive")
    rows = ["z,n,U"]
    for z in zs:
        U = poisson_apply(u, gamma, z)
        rows += [f"{_fmt(z)},{n},{_fmt(v)}" for n, v in zip(U.grid.indices, U.values)]
    _write(args.out, "\n".join(rows) + "\n", config)
    limit = neumann_limit(u, gamma)
    records = limit.records()
    _write(args.out + ".neumann.json", json.dumps(records, indent=2, sort_keys=True) + "\n", config)
    worst = max(r["rel_err"] for r in records)
    if worst > float(args.neumann_tol):
        raise BandError(f"Neumann limit relative error {worst:.3e} above {args.neumann_tol}")
    return EXIT_OK


def cmd_converge(args, config) -> int:
    from .continuous import derivative_variant_check, discretization_sweep, get_function, gl_vs_marchaud

    alpha = _alpha(args.alpha)
    try:
        f = get_function(args.f)
    except KeyError as exc:
        raise ValidationError(str(exc)) from None
    if f.holder_k == 0 and not alpha < f.holder_beta:
        raise ValidationError(f"need alpha < beta = {f.holder_beta}")
    hs = h_sequence(args.h)
    if len(hs) < 4:
        raise ValidationError("need at least four mesh sizes")
    window = _pair(args.window)
    x_step = float(args.x_step) if args.x_step else None
    if args.mode == "discrete":
        report = discretization_sweep(f, alpha, hs, window, x_step)
    elif args.mode == "gl":
        xs = np.arange(math.ceil(window[0] / x_step), math.floor(window[1] / x_step) + 1) * x_step if x_step else [0.0]
        report = gl_vs_marchaud(f, xs, alpha, hs)
    elif args.mode == "derivative":
        report = derivative_variant_check(f, alpha, hs, window, x_step)
    else:
        raise ValidationError(f"unknown mode {args.mode!r}")
    _write(args.out, report.to_json() + "\n", config)
    _write(args.out + ".csv", report.to_csv(), config)
    if report.degenerate:
        return EXIT_OK
    lo, hi = _band(args.band) if args.band else (report.beta - alpha - 0.15, math.inf)
    if not lo <= report.slope <= hi:
        raise BandError(f"fitted slope {report.slope:.4f} outside [{lo}, {hi}]")
    return EXIT_OK


def cmd_harmonic(args, config) -> int:
    from .harmonic import OPERATORS, TGrid, cz_kernel_size_check, empirical_lp_growth

    gamma = float(args.gamma)
    if not 0 < gamma < 1:
        raise ValidationError("gamma must lie in (0, 1)")
    tgrid = TGrid.log_spaced(float(args.t_min), float(args.t_max), int(args.per_decade))
    if args.op == "cz":
        j_lo, j_hi = _pair(args.j_range, int)
        if not 8 <= j_lo < j_hi <= 2**12:
            raise ValidationError("j range must lie in [8, 4096]")
        j = np.unique(np.geomspace(j_lo, j_hi, 40).astype(int))
        rep = cz_kernel_size_check(gamma, tgrid, j)
        _write(args.out + ".csv", rep.to_csv(), config)
        summary = {"gamma": gamma, "size_exponent": rep.size_exponent, "smoothness_exponent": rep.smoothness_exponent}
        _write(args.out, json.dumps(summary, indent=2, sort_keys=True) + "\n", config)
        return EXIT_OK
    if args.op not in OPERATORS:
        raise ValidationError(f"unknown operator {args.op!r}")
    s_lo, s_hi = _pair(args.sizes, int)
    sizes = [2**k for k in range(int(math.log2(s_lo)), int(math.log2(s_hi)) + 1)]
    rep = empirical_lp_growth(args.op, float(args.p), sizes, int(args.trials), args.family, gamma, tgrid, int(args.seed))
    _write(args.out, rep.to_json() + "\n", config)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discfrac", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file; command-line flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="dump the kernel Lambda^alpha(0..M) as CSV")
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--M", type=int, default=10)
    p.add_argument("--out", default="coeffs.csv")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("apply", help="apply a discrete fractional power on a window")
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--f", default="indicator", help="indicator, geometric, const or a registry id")
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--window", default="-5:5")
    p.add_argument("--side", choices=("right", "left"), default="right")
    p.add_argument("--negative", action="store_true", help="apply the negative power")
    p.add_argument("--M", type=int, default=10**5)
    p.add_argument("--out", default="apply.csv")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("dirichlet", help="solve the one-sided Dirichlet problem")
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--j0", type=int, default=0)
    p.add_argument("--j1", type=int, default=20)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--fixture", choices=("eigen", "random"), default="eigen")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--max-error", type=float, default=1e-8)
    p.add_argument("--out", default="dirichlet.csv")
    p.set_defaults(func=cmd_dirichlet)

    p = sub.add_parser("extension", help="extension solution U(z, n) and its Neumann limit")
    p.add_argument("--gamma", required=True, type=float)
    p.add_argument("--f", default="indicator")
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--window", default="-3:3")
    p.add_argument("--z", default="0.5,1,2")
    p.add_argument("--neumann-tol", type=float, default=1e-3)
    p.add_argument("--out", default="extension.csv")
    p.set_defaults(func=cmd_extension)

    p = sub.add_parser("converge", help="fitted convergence order against the continuous derivative")
    p.add_argument("--f", required=True)
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--h", default="0.2:0.0125")
    p.add_argument("--window", default="-1:1")
    p.add_argument("--x-step", type=float, default=0.2)
    p.add_argument("--mode", choices=("discrete", "gl", "derivative"), default="discrete")
    p.add_argument("--band", default=None, help="lo:hi accepted slope range (either end may be empty)")
    p.add_argument("--out", default="converge.json")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("harmonic", help="maximal/square function norm growth and kernel estimates")
    p.add_argument("--op", default="heat_max", help="heat_max, poisson_max, poisson_g or cz")
    p.add_argument("--family", choices=("indicator", "comb", "random_signs"), default="indicator")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--sizes", default="256:4096")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-min", type=float, default=1e-3)
    p.add_argument("--t-max", type=float, default=1e3)
    p.add_argument("--per-decade", type=int, default=16)
    p.add_argument("--j-range", default="8:4096")
    p.add_argument("--out", default="harmonic.json")
    p.set_defaults(func=cmd_harmonic)
    return parser


def _resolve(argv) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known_args, rest = pre.parse_known_args(argv)
    if known_args.config:
        cfg = read_config(known_args.config)
        choices = parser._subparsers._group_actions[0].choices
        command = next((tok for tok in rest if tok in choices), None)
        if command is None:
            raise ValidationError("no subcommand given")
        sub = choices[command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        for action in sub._actions:
            if action.dest not in cfg:
                continue
            value = cfg[action.dest]
            if action.type is not None:
                value = action.type(value)
            elif isinstance(action, argparse._StoreTrueAction):
                value = value.lower() in ("1", "true", "yes")
            action.default = value
            action.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    from .coefficients import OrderError
    from .continuous import DegenerateFitError, QuadratureError
    from .fracops import ConvergenceError, TailError
    from .semigroups import ExtrapolationError
    from .semigroups import QuadratureError as BesselError

    try:
        args = _resolve(argv)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    numerical = (ConvergenceError, QuadratureError, BesselError, ExtrapolationError, DegenerateFitError)
    try:
        return args.func(args, config)
    except BandError as exc:
        print(f"band: {exc}", file=sys.stderr)
        return EXIT_BAND
    except numerical as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, OrderError, TailError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
