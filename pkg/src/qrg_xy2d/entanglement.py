"""Corner-pair concurrences of the block ground state and their RG evolution.

After ``n`` RG steps a block stands for ``N = 5**(n+1)`` original sites, so
the geometric-mean concurrence of the five-site box evaluated at the
renormalized anisotropy ``gamma_n`` tracks the entanglement of a system of
that size. The peak of ``|dC_g/dgamma|`` moves towards the critical point
``gamma_c = 0`` as ``n`` grows. The scaling fits extract the exponent of
that approach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import linregress

from .rg_map import BLOCK_SIZE, rg_step
from .spin_algebra import partial_trace_pair, pauli
from .xy_block import GAMMA_FLOOR, ground_states_analytic

__all__ = [
    "ConcurrenceSet",
    "DerivativeCurve",
    "DerivativePeak",
    "ScalingFit",
    "FitError",
    "CORNER_PAIRS",
    "GAMMA_C",
    "concurrence",
    "pairwise_concurrences",
    "linear_rg_slope",
    "renormalized_gamma",
    "cg_at",
    "cg_curve",
    "abs_derivative",
    "derivative_peak",
    "derivative_curve",
    "scaling_fits",
]

GAMMA_C = 0.0
CORNER_PAIRS = tuple(combinations(range(2, 6), 2))

_IY = pauli("y")[0]
_YY = np.kron(_IY, _IY)  # equals sigma^y x sigma^y up to a sign that cancels in rho~


class FitError(ArithmeticError):
    """Too few usable points, or a logarithm of a non-positive quantity."""


def concurrence(rho: np.ndarray) -> np.ndarray | float:
    """Wootters concurrence of a real two-qubit density matrix.

    Accepts a single 4x4 matrix or a stack of shape ``(..., 4, 4)``. The
    square roots of the eigenvalues of ``rho rho~`` are the singular values
    of ``tau = Psi^T (sy x sy) Psi`` with ``rho = Psi Psi^T``. Working with
    ``tau`` avoids taking square roots of round-off sized eigenvalues, so
    nearly pure states keep full precision.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape[-2:] != (4, 4):
        raise ValueError("expected 4x4 density matrices")
    if np.abs(rho - np.swapaxes(rho, -1, -2)).max() > 1e-10:
        raise ValueError("density matrix is not symmetric")
    if np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1.0).max() > 1e-10:
        raise ValueError("density matrix does not have unit trace")
    w, v = np.linalg.eigh(rho)
    if w.min() < -1e-8:
        raise ValueError(f"density matrix has negative eigenvalue {w.min():.3g}")
    psi = v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]
    tau = np.swapaxes(psi, -1, -2) @ _YY @ psi
    s = np.linalg.svd(tau, compute_uv=False)  # descending
    c = np.maximum(s[..., 0] - s[..., 1] - s[..., 2] - s[..., 3], 0.0)
    return float(c) if c.ndim == 0 else c


@dataclass(frozen=True)
class ConcurrenceSet:
    pairs: dict[tuple[int, int], float]
    cg: float


def _pair_set(state: np.ndarray) -> ConcurrenceSet:
    rhos = np.stack([partial_trace_pair(state, pair) for pair in CORNER_PAIRS])
    values = concurrence(rhos)
    pairs = {pair: float(c) for pair, c in zip(CORNER_PAIRS, values)}
    cg = 0.0 if np.any(values == 0.0) else float(np.prod(values) ** (1.0 / len(values)))
    return ConcurrenceSet(pairs, cg)


def pairwise_concurrences(gamma: float, member: int = 1) -> ConcurrenceSet:
    """The six corner-pair concurrences of one ground state and their geometric mean."""
    if member not in (1, 2):
        raise ValueError("member must be 1 or 2")
    phi = ground_states_analytic(gamma)[member - 1]
    return _pair_set(phi)


def linear_rg_slope() -> float:
    """d gamma' / d gamma at the critical point."""
    return rg_step(GAMMA_FLOOR).gamma_prime / GAMMA_FLOOR


def renormalized_gamma(gamma: float, n: int) -> float:
    g = float(gamma)
    for _ in range(n):
        g = rg_step(g).gamma_prime
    return g


def cg_at(gamma: float, n: int) -> float:
    """C_g of the five-site box after ``n`` RG steps from ``gamma``."""
    return pairwise_concurrences(renormalized_gamma(gamma, n)).cg


def cg_curve(n: int, grid) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    return np.array([cg_at(g, n) for g in grid])


def abs_derivative(gamma: float, n: int, h: float) -> float:
    """Central-difference |dC_g/dgamma| after ``n`` steps."""
    return abs(cg_at(gamma + h, n) - cg_at(gamma - h, n)) / (2.0 * h)


@dataclass(frozen=True)
class DerivativePeak:
    n: int
    gamma_max: float
    d_max: float
    d_max_half_step: float

    @property
    def converged(self) -> bool:
        return abs(self.d_max - self.d_max_half_step) <= 0.01 * self.d_max


def derivative_peak(
    n: int,
    rel_step: float = 1e-4,
    decades_below: float = 3.0,
    per_decade: int = 40,
    xatol: float = 1e-6,
) -> DerivativePeak:
    """Maximum of |dC_g/dgamma| on the side gamma < gamma_c.

    Near gamma_c the map is linear, gamma' ~ lam * gamma, so the peak after
    ``n`` steps sits at ``|gamma|`` of order ``lam**-n``. The search runs on
    ``u = ln|gamma|`` with a finite-difference step proportional to
    ``|gamma|``: a log-spaced scan from ``10**-decades_below * lam**-n`` up
    to 1 brackets the maximum, then a bounded scalar search refines ``u`` to
    ``xatol``. Going much lower only samples round-off.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    lam = linear_rg_slope()
    log_min = -decades_below - n * math.log10(lam)

    def d(u: float, step: float = rel_step) -> float:
        g = GAMMA_C - math.exp(u)
        return abs_derivative(g, n, step * abs(g))

    us = np.linspace(log_min * math.log(10.0), 0.0, int(math.ceil(-log_min * per_decade)) + 1)
    vals = np.array([d(u) for u in us])
    k = int(np.argmax(vals))
    lo, hi = us[max(k - 1, 0)], us[min(k + 1, us.size - 1)]
    res = minimize_scalar(lambda u: -d(u), bounds=(lo, hi), method="bounded", options={"xatol": xatol})
    u_best = float(res.x) if -res.fun >= vals[k] else float(us[k])
    g_max = GAMMA_C - math.exp(u_best)
    return DerivativePeak(n=n, gamma_max=g_max, d_max=d(u_best), d_max_half_step=d(u_best, rel_step / 2))


@dataclass(frozen=True)
class DerivativeCurve:
    n: int
    grid: np.ndarray
    values: np.ndarray
    gamma_max: float
    d_max: float
    converged: bool


def derivative_curve(n: int, grid, h: float = 1e-4, peak: DerivativePeak | None = None) -> DerivativeCurve:
    """|dC_g/dgamma| on a uniform grid plus the refined peak on the gamma < 0 side."""
    grid = np.asarray(grid, dtype=float)
    if not h > 0:
        raise ValueError("h must be positive")
    if grid.size > 1:
        spacing = np.diff(grid)
        if np.any(spacing <= 0):
            raise ValueError("grid must be strictly increasing")
        if spacing.min() <= 2 * h:
            raise ValueError("grid spacing must exceed 2h")
    values = np.array([abs_derivative(g, n, h) for g in grid])
    peak = peak or derivative_peak(n)
    return DerivativeCurve(n, grid, values, peak.gamma_max, peak.d_max, peak.converged)


@dataclass(frozen=True)
class ScalingFit:
    n: tuple[int, ...]
    log_size: np.ndarray
    log_d_max: np.ndarray
    log_distance: np.ndarray  # ln(gamma_c - gamma_max)
    slope_d: float
    intercept_d: float
    r2_d: float
    slope_gamma: float
    intercept_gamma: float
    r2_gamma: float
    theta: float
    prefactor: float
    peaks: tuple[DerivativePeak, ...]


def scaling_fits(n_list, peaks: list[DerivativePeak] | None = None) -> ScalingFit:
    """Log-log fits of the derivative peak against the effective size N = 5**(n+1).

    Fits ``ln d_max`` and ``ln(gamma_c - gamma_max)`` linearly in ``ln N``.
    ``theta`` is minus the second slope and ``prefactor`` is defined through
    ``gamma_max = gamma_c - (prefactor * N)**(-theta)``.
    """
    n_list = tuple(int(n) for n in n_list)
    if len(n_list) < 3:
        raise FitError("need at least 3 iterations for a fit")
    if peaks is None:
        peaks = [derivative_peak(n) for n in n_list]
    dist = np.array([GAMMA_C - p.gamma_max for p in peaks])
    d_max = np.array([p.d_max for p in peaks])
    if np.any(dist <= 0) or np.any(d_max <= 0):
        raise FitError("non-positive peak height or peak on the wrong side of gamma_c")
    log_n = np.array([(n + 1) * math.log(BLOCK_SIZE) for n in n_list])
    log_d = np.log(d_max)
    log_dist = np.log(dist)
    if not (np.all(np.isfinite(log_d)) and np.all(np.isfinite(log_dist))):
        raise FitError("non-finite logarithm")
    fit_d = linregress(log_n, log_d)
    fit_g = linregress(log_n, log_dist)
    theta = -float(fit_g.slope)
    prefactor = math.exp(-float(fit_g.intercept) / theta)
    return ScalingFit(
        n=n_list,
        log_size=log_n,
        log_d_max=log_d,
        log_distance=log_dist,
        slope_d=float(fit_d.slope),
        intercept_d=float(fit_d.intercept),
        r2_d=float(fit_d.rvalue**2),
        slope_gamma=float(fit_g.slope),
        intercept_gamma=float(fit_g.intercept),
        r2_gamma=float(fit_g.rvalue**2),
        theta=theta,
        prefactor=prefactor,
        peaks=tuple(peaks),
    )
