"""Command-line interface: ``qrg-xy2d {verify,flow,concurrence,derivative,scaling}``.

Every command writes a self-describing CSV: a version line, a config echo,
optional ``#`` metadata lines, a header row and data rows. Floats carry 17
significant digits so output is byte-identical for a given config, whatever
the worker count.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, svg
from .entanglement import FitError, cg_at, abs_derivative, derivative_peak, scaling_fits
from .rg_map import BLOCK_SIZE, MAX_ITERATIONS, effective_pair_coupling, eta_factors_closed, eta_factors_operator
from .rg_map import ProjectionError, fixed_points, iterate, rg_step
from .xy_block import Couplings, verify_ground_space

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "QRG_THREADS"

_DEFAULTS = {
    "verify": dict(gamma_min=-1.0, gamma_max=1.0, points=41, iterations=(0,)),
    "flow": dict(gamma_min=-1.0, gamma_max=1.0, points=21, iterations=(8,)),
    "concurrence": dict(gamma_min=-1.0, gamma_max=1.0, points=2001, iterations=(0, 1, 2)),
    "derivative": dict(gamma_min=-1.0, gamma_max=1.0, points=2001, iterations=(0, 1, 2)),
    "scaling": dict(gamma_min=-1.0, gamma_max=1.0, points=3, iterations=(1, 2, 3, 4)),
}
_ORACLE_GAMMAS = (0.1, 0.3, 0.5, 0.7, 0.9)
_EXPECTED_FIXED_POINTS = (-1.0, 0.0, 1.0)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    gamma_min: float
    gamma_max: float
    points: int
    iterations: tuple[int, ...]
    fd_step: float = 1e-4
    tol: float = 1e-8
    out: str = "-"
    threads: int = 1
    svg: bool = False

    def validate(self) -> None:
        if not (math.isfinite(self.gamma_min) and math.isfinite(self.gamma_max)):
            raise ConfigError("gamma range must be finite")
        if not self.gamma_min < self.gamma_max:
            raise ConfigError(f"--gamma-min ({self.gamma_min}) must be below --gamma-max ({self.gamma_max})")
        if self.points < 3:
            raise ConfigError("--points must be at least 3")
        if not self.iterations:
            raise ConfigError("--iterations must not be empty")
        if any(not 0 <= n <= MAX_ITERATIONS for n in self.iterations):
            raise ConfigError(f"iterations must lie in [0, {MAX_ITERATIONS}]")
        if not self.fd_step > 0:
            raise ConfigError("--fd-step must be positive")
        if not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if self.svg and self.out == "-":
            raise ConfigError("--svg needs --out PATH")

    def grid(self) -> np.ndarray:
        return np.linspace(self.gamma_min, self.gamma_max, self.points)

    def echo(self) -> str:
        # output-independent fields only, so thread count and path never change the bytes
        its = ",".join(str(n) for n in self.iterations)
        return (
            f"command={self.command} gamma_min={_f(self.gamma_min)} gamma_max={_f(self.gamma_max)} "
            f"points={self.points} iterations={its} fd_step={_f(self.fd_step)} tol={_f(self.tol)} "
            f"svg={int(self.svg)}"
        )


def _f(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _pmap(func, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [func(x) for x in items]
    chunk = max(1, len(items) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items, chunksize=chunk))


def _write_csv(cfg: RunConfig, header, rows, meta=()) -> str:
    buf = io.StringIO()
    major, minor = __version__.split(".")[:2]
    buf.write(f"# qrg-xy2d v{major}.{minor}\n")
    buf.write(f"# config: {cfg.echo()}\n")
    for line in meta:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_f(v) for v in row])
    text = buf.getvalue()
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        Path(cfg.out).write_text(text, encoding="utf-8", newline="\n")
    return text


def _write_svg(cfg: RunConfig, series, xlabel: str, ylabel: str, title: str) -> None:
    if cfg.svg:
        Path(cfg.out).with_suffix(".svg").write_text(svg.render(series, xlabel, ylabel, title), encoding="utf-8")


# --------------------------------------------------------------------------- verify


def _verify_point(gamma: float, tol: float) -> list[tuple]:
    rows = []
    rep = verify_ground_space(Couplings(1.0, gamma), tol)
    rows.append(("energy_rel_error", gamma, rep.energy_rel_error, tol, rep.energy_rel_error <= tol))
    rows.append(("degeneracy", gamma, rep.degeneracy, 2, rep.degeneracy == 2))
    rows.append(("projector_distance", gamma, rep.projector_distance, tol, rep.projector_distance <= tol))
    bound = tol * abs(rep.e0_analytic)
    for name, r in zip(("residual_phi1", "residual_phi2"), rep.residuals):
        rows.append((name, gamma, r, bound, r <= bound))
    try:
        closed = eta_factors_closed(gamma).as_array()
        op = eta_factors_operator(gamma).as_array()
        diff = min(np.abs(closed - op).max(), np.abs(closed + op).max())
        rows.append(("eta_closed_vs_operator", gamma, diff, tol, diff <= tol))
    except ProjectionError:
        rows.append(("eta_closed_vs_operator", gamma, math.inf, tol, False))
    return rows


def _oracle_point(gamma: float, tol: float) -> tuple:
    pc = effective_pair_coupling(gamma, [(2, 3)])
    diff = abs(pc.gamma_eff - rg_step(gamma).gamma_prime)
    return ("two_block_gamma_prime", gamma, diff, tol, diff <= tol)


def cmd_verify(cfg: RunConfig) -> int:
    grid = cfg.grid()
    rows = [r for chunk in _pmap(partial(_verify_point, tol=cfg.tol), grid, cfg.threads) for r in chunk]
    rows += _pmap(partial(_oracle_point, tol=cfg.tol), _ORACLE_GAMMAS, cfg.threads)
    roots = fixed_points(-1.2, 1.2)
    if len(roots) == len(_EXPECTED_FIXED_POINTS):
        err = max(abs(a - b) for a, b in zip(roots, _EXPECTED_FIXED_POINTS))
    else:
        err = math.inf
    rows.append(("fixed_points", math.nan, err, cfg.tol, err <= cfg.tol))

    meta = [f"fixed_points: {','.join(_f(r) for r in roots)}"]
    residuals = [r[2] for r in rows if r[0].startswith("residual")]
    meta.append(f"max_residual: {_f(max(residuals))}")
    failed = [r for r in rows if not r[4]]
    meta.append(f"checks: {len(rows)} failed: {len(failed)}")
    _write_csv(cfg, ("check", "gamma", "value", "tolerance", "passed"), rows, meta)

    print(f"verify: {len(rows)} checks, {len(failed)} failed, max residual {max(residuals):.3g}", file=sys.stderr)
    for name, gamma, value, tol, _ in failed:
        print(f"  FAIL {name} gamma={gamma:g} value={value:.3g} tolerance={tol:.3g}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAILED


# --------------------------------------------------------------------------- flow


def _flow_rows(gamma0: float, n: int) -> list[tuple]:
    traj = iterate(gamma0, n)
    return [
        (gamma0, k, size, g, j)
        for k, (size, (g, j)) in enumerate(zip(traj.effective_sizes, traj.steps))
    ]


def cmd_flow(cfg: RunConfig) -> int:
    n = max(cfg.iterations)
    rows = [r for chunk in _pmap(partial(_flow_rows, n=n), cfg.grid(), cfg.threads) for r in chunk]
    roots = fixed_points(-1.2, 1.2)
    meta = [f"fixed_points: {','.join(_f(r) for r in roots)}"]
    _write_csv(cfg, ("gamma0", "n", "N", "gamma_n", "j_ratio_cumulative"), rows, meta)
    return EXIT_OK


# --------------------------------------------------------------------------- concurrence / derivative


def _cg_row(gamma: float, iterations: tuple[int, ...]) -> tuple:
    return (gamma, *(cg_at(gamma, n) for n in iterations))


def cmd_concurrence(cfg: RunConfig) -> int:
    grid = cfg.grid()
    rows = _pmap(partial(_cg_row, iterations=cfg.iterations), grid, cfg.threads)
    header = ("gamma", *(f"cg_{n}" for n in cfg.iterations))
    _write_csv(cfg, header, rows)
    data = np.array([r[1:] for r in rows])
    series = [(f"n={n}", grid, data[:, k]) for k, n in enumerate(cfg.iterations)]
    _write_svg(cfg, series, "gamma", "C_g", "Geometric mean concurrence")
    return EXIT_OK


def _dcg_row(gamma: float, iterations: tuple[int, ...], h: float) -> tuple:
    return (gamma, *(abs_derivative(gamma, n, h) for n in iterations))


def cmd_derivative(cfg: RunConfig) -> int:
    grid = cfg.grid()
    if np.diff(grid).min() <= 2 * cfg.fd_step:
        raise ConfigError("grid spacing must exceed 2 * --fd-step")
    rows = _pmap(partial(_dcg_row, iterations=cfg.iterations, h=cfg.fd_step), grid, cfg.threads)
    peaks = _pmap(derivative_peak, cfg.iterations, cfg.threads)
    meta = [
        f"peak: n={p.n} gamma_max={_f(p.gamma_max)} d_max={_f(p.d_max)} converged={int(p.converged)}"
        for p in peaks
    ]
    header = ("gamma", *(f"abs_dcg_{n}" for n in cfg.iterations))
    _write_csv(cfg, header, rows, meta)
    data = np.array([r[1:] for r in rows])
    series = [(f"n={n}", grid, data[:, k]) for k, n in enumerate(cfg.iterations)]
    _write_svg(cfg, series, "gamma", "|dC_g/dgamma|", "Derivative of the geometric mean concurrence")
    return EXIT_OK


# --------------------------------------------------------------------------- scaling


def cmd_scaling(cfg: RunConfig) -> int:
    if len(cfg.iterations) < 3:
        print("scaling: need at least 3 iterations for a fit", file=sys.stderr)
        return EXIT_NUMERIC
    peaks = _pmap(derivative_peak, cfg.iterations, cfg.threads)
    try:
        fit = scaling_fits(cfg.iterations, peaks)
    except FitError as exc:
        print(f"scaling: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    meta = [
        f"fit_ln_dmax: slope={_f(fit.slope_d)} intercept={_f(fit.intercept_d)} r2={_f(fit.r2_d)}",
        f"fit_ln_gamma_distance: slope={_f(fit.slope_gamma)} intercept={_f(fit.intercept_gamma)} r2={_f(fit.r2_gamma)}",
        f"theta: {_f(fit.theta)}",
        f"prefactor: {_f(fit.prefactor)}",
    ]
    rows = [(p.n, BLOCK_SIZE ** (p.n + 1), p.gamma_max, p.d_max) for p in peaks]
    _write_csv(cfg, ("n", "N", "gamma_max", "d_max"), rows, meta)
    _write_svg(
        cfg,
        [("ln d_max", fit.log_size, fit.log_d_max), ("ln(gamma_c - gamma_max)", fit.log_size, fit.log_distance)],
        "ln N",
        "log value",
        f"theta = {fit.theta:.4f}",
    )
    return EXIT_OK


_COMMANDS = {
    "verify": cmd_verify,
    "flow": cmd_flow,
    "concurrence": cmd_concurrence,
    "derivative": cmd_derivative,
    "scaling": cmd_scaling,
}


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--gamma-min", type=float, default=None)
    shared.add_argument("--gamma-max", type=float, default=None)
    shared.add_argument("--points", type=int, default=None, help="number of gamma grid points")
    shared.add_argument("--iterations", type=_int_list, default=None, help="comma list of RG iteration counts")
    shared.add_argument("--fd-step", type=float, default=1e-4, help="central-difference step")
    shared.add_argument("--tol", type=float, default=1e-8)
    shared.add_argument("--out", default="-", help="output CSV path (default stdout)")
    shared.add_argument("--threads", type=int, default=None, help=f"worker processes (default ${THREADS_ENV} or 1)")
    shared.add_argument("--svg", action="store_true", help="also write <out>.svg")

    parser = argparse.ArgumentParser(prog="qrg-xy2d", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qrg-xy2d {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "cross-check closed forms against exact diagonalization",
        "flow": "RG trajectories of gamma and J",
        "concurrence": "geometric-mean concurrence after n RG steps",
        "derivative": "|dC_g/dgamma| and its peak",
        "scaling": "finite-size scaling of the derivative peak",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[shared], help=text)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    d = _DEFAULTS[args.command]
    threads = args.threads
    if threads is None:
        env = os.environ.get(THREADS_ENV, "1")
        try:
            threads = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}={env!r} is not an integer") from None
    return RunConfig(
        command=args.command,
        gamma_min=d["gamma_min"] if args.gamma_min is None else args.gamma_min,
        gamma_max=d["gamma_max"] if args.gamma_max is None else args.gamma_max,
        points=d["points"] if args.points is None else args.points,
        iterations=d["iterations"] if args.iterations is None else args.iterations,
        fd_step=args.fd_step,
        tol=args.tol,
        out=args.out,
        threads=threads,
        svg=args.svg,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        cfg.validate()
        return _COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"qrg-xy2d: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError) as exc:
        print(f"qrg-xy2d: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
