"""Block renormalization of the XY couplings.

Each five-spin block is replaced by one effective qubit spanned by its ground
doublet. To first order the inter-block bonds become XY bonds between
effective qubits with renormalized ``(J', gamma')``. This module evaluates
the closed-form recursion and provides operator-level checks of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.optimize import bisect

from .spin_algebra import embed, pauli, two_site_coupling
from .xy_block import GAMMA_FLOOR, N_SITES, ground_coefficients, ground_states_analytic

__all__ = [
    "EtaFactors",
    "RGStepResult",
    "RGTrajectory",
    "PairCoupling",
    "ProjectionError",
    "block_projector",
    "eta_factors_closed",
    "eta_factors_operator",
    "gamma_prime_from_eta",
    "rg_step",
    "fixed_points",
    "iterate",
    "effective_pair_coupling",
    "BLOCK_SIZE",
    "MAX_GAMMA",
    "MAX_ITERATIONS",
]

BLOCK_SIZE = 5
MAX_GAMMA = 1.5
MAX_ITERATIONS = 64


class ProjectionError(ArithmeticError):
    """A projected operator does not have the expected Pauli structure."""


@dataclass(frozen=True)
class EtaFactors:
    """Pauli renormalization factors: centre site (1) and the shared corner value."""

    eta1x: float
    eta1y: float
    etacx: float
    etacy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.eta1x, self.eta1y, self.etacx, self.etacy])


@dataclass(frozen=True)
class RGStepResult:
    gamma_prime: float
    j_ratio: float


@dataclass(frozen=True)
class RGTrajectory:
    gamma0: float
    gammas: tuple[float, ...]
    j_ratios: tuple[float, ...]  # cumulative J_n / J_0

    @property
    def n_max(self) -> int:
        return len(self.gammas) - 1

    @property
    def effective_sizes(self) -> tuple[int, ...]:
        return tuple(BLOCK_SIZE ** (k + 1) for k in range(len(self.gammas)))

    @property
    def steps(self) -> list[tuple[float, float]]:
        return list(zip(self.gammas, self.j_ratios))


def block_projector(gamma: float) -> np.ndarray:
    """32x2 isometry whose columns are the renamed states |up'> = phi1, |down'> = phi2."""
    phi1, phi2 = ground_states_analytic(gamma)
    return np.column_stack([phi1, phi2])


def eta_factors_closed(gamma: float, printed: bool = False) -> EtaFactors:
    """Closed-form Pauli renormalization factors from gamma_1..gamma_10.

    The corner expressions carry ``+3 g4 g9`` for x and ``-3 g4 g9`` for y,
    which is what projecting sigma_2 onto the doublet gives. ``printed=True``
    uses the opposite signs on those two terms. That variant does not match
    the projection and is kept for comparison only.
    """
    g1, g2, g3, g4, g5, g6, g7, g8, g9, g10 = ground_coefficients(gamma).values
    s = -1.0 if printed else 1.0
    eta1x = 4 * g10 * g2 + g3 * g6 + 6 * g4 * g7 + g5 * g8 + 4 * g1 * g9
    eta1y = 4 * g10 * g2 - g3 * g6 - 6 * g4 * g7 - g5 * g8 + 4 * g1 * g9
    etacx = g10 * (3 * g4 + g5) + 3 * g2 * g7 + g1 * (g6 + 3 * g7) + g2 * g8 + g9 * (g3 + s * 3 * g4)
    etacy = g10 * (3 * g4 - g5) - 3 * g2 * g7 + g1 * (-g6 + 3 * g7) + g2 * g8 + g9 * (g3 - s * 3 * g4)
    return EtaFactors(eta1x, eta1y, etacx, etacy)


_PATTERN = {"x": 1.0, "y": -1.0}  # expected sign of the (1, 0) entry relative to (0, 1)


def eta_factors_operator(gamma: float, tol: float = 1e-8) -> EtaFactors:
    """Pauli renormalization factors by projecting sigma_i onto the ground doublet.

    Raises ``ProjectionError`` if a projected operator is not proportional to
    the matching Pauli matrix of the effective qubit, or if the corner sites
    disagree.
    """
    p0 = block_projector(gamma)
    eta = {}
    for axis in ("x", "y"):
        mat, _ = pauli(axis)
        for site in range(1, N_SITES + 1):
            m = p0.T @ embed(mat, site, N_SITES) @ p0
            if max(abs(m[0, 0]), abs(m[1, 1]), abs(m[1, 0] - _PATTERN[axis] * m[0, 1])) > tol:
                raise ProjectionError(f"P0 sigma_{site}^{axis} P0 is not proportional to sigma^{axis}: {m.tolist()}")
            eta[axis, site] = float(m[0, 1])
    for axis in ("x", "y"):
        corners = [eta[axis, k] for k in range(2, N_SITES + 1)]
        if max(corners) - min(corners) > 1e-10:
            raise ProjectionError(f"corner factors for {axis} differ: {corners}")
    return EtaFactors(eta["x", 1], eta["y", 1], eta["x", 2], eta["y", 2])


def gamma_prime_from_eta(gamma: float, eta: EtaFactors | None = None) -> float:
    """gamma' assembled from the corner factors of a single corner-corner bond."""
    eta = eta or eta_factors_closed(gamma)
    wx = (1.0 + gamma) * eta.etacx**2
    wy = (1.0 - gamma) * eta.etacy**2
    return (wx - wy) / (wx + wy)


def _closed_step(g: float) -> RGStepResult:
    g1, g2, g3, g4, g5, g6, g7, g8, g9, g10 = ground_coefficients(g).values
    # common bracket: J'/J and the denominator of gamma'
    jb = (
        g10**2 * (9 * g4**2 + 6 * g * g4 * g5 + g5**2)
        + 9 * g2**2 * g7**2
        + g1**2 * (g6**2 + 6 * g * g6 * g7 + 9 * g7**2)
        + 6 * g * g2**2 * g7 * g8
        + g2**2 * g8**2
        + 6 * g * g2 * g3 * g7 * g9
        + 18 * g2 * g4 * g7 * g9
        + 2 * g2 * g3 * g8 * g9
        + 6 * g * g2 * g4 * g8 * g9
        + g3**2 * g9**2
        + 6 * g * g3 * g4 * g9**2
        + 9 * g4**2 * g9**2
        + 2 * g1 * (
            g2 * (3 * g7 * (3 * g * g7 + g8) + g6 * (3 * g7 + g * g8))
            + (g * g3 * g6 + 3 * g4 * g6 + 3 * g3 * g7 + 9 * g * g4 * g7) * g9
        )
        + 2 * g10 * (
            g1 * (g5 * g6 + 9 * g4 * g7)
            + g * (9 * g2 * g4 * g7 + 3 * g1 * (g4 * g6 + g5 * g7) + g2 * g5 * g8 + 9 * g4**2 * g9 + g3 * g5 * g9)
            + 3 * (g2 * (g5 * g7 + g4 * g8) + g4 * (g3 + g5) * g9)
        )
    )
    num = 2 * (3 * g10 * g4 + 3 * g1 * g7 + g2 * g8 + g3 * g9) * (
        g10 * g5 + g1 * g6 + 3 * g2 * g7 + 3 * g4 * g9
    ) + g * (
        g10**2 * (9 * g4**2 + g5**2)
        + 9 * g2**2 * g7**2
        + g1**2 * (g6**2 + 9 * g7**2)
        + g2**2 * g8**2
        + 18 * g2 * g4 * g7 * g9
        + 2 * g2 * g3 * g8 * g9
        + g3**2 * g9**2
        + 9 * g4**2 * g9**2
        + 6 * g1 * (g2 * g7 * (g6 + g8) + (g4 * g6 + g3 * g7) * g9)
        + 2 * g10 * (g1 * (g5 * g6 + 9 * g4 * g7) + 3 * (g2 * (g5 * g7 + g4 * g8) + g4 * (g3 + g5) * g9))
    )
    return RGStepResult(float(num / jb), float(jb))


def rg_step(gamma: float) -> RGStepResult:
    """One RG step: renormalized anisotropy and ``J'/J``.

    ``J'/J`` is the common bracket of the recursion with the overall
    prefactor set to one (a single corner-corner bond per effective bond).
    Below ``GAMMA_FLOOR`` the map is continued linearly, gamma' being odd.
    """
    g = float(gamma)
    if not math.isfinite(g):
        raise ValueError(f"non-finite gamma {gamma}")
    if abs(g) > MAX_GAMMA:
        raise ValueError(f"|gamma| = {abs(g)} exceeds {MAX_GAMMA}")
    if abs(g) < GAMMA_FLOOR:
        edge = _closed_step(GAMMA_FLOOR)
        return RGStepResult(g * edge.gamma_prime / GAMMA_FLOOR, edge.j_ratio)
    res = _closed_step(g)
    if not (math.isfinite(res.gamma_prime) and math.isfinite(res.j_ratio)):
        raise ValueError(f"non-finite RG step at gamma={gamma}")
    return res


def fixed_points(lo: float, hi: float, points: int = 2001, xtol: float = 1e-10) -> list[float]:
    """Roots of gamma'(gamma) - gamma in ``[lo, hi]`` by grid bracketing and bisection."""
    if not lo < hi:
        raise ValueError("need lo < hi")

    def f(g: float) -> float:
        return rg_step(g).gamma_prime - g

    grid = np.linspace(lo, hi, points)
    vals = [f(g) for g in grid]
    roots: list[float] = []
    for k in range(points):
        if vals[k] == 0.0:
            roots.append(float(grid[k]))
        elif k + 1 < points and vals[k] * vals[k + 1] < 0.0:
            roots.append(float(bisect(f, grid[k], grid[k + 1], xtol=xtol)))
    merged: list[float] = []
    for r in sorted(roots):
        if not merged or r - merged[-1] > 1e-8:
            merged.append(r)
    return merged


def iterate(gamma0: float, n: int) -> RGTrajectory:
    """Apply the RG map ``n`` times starting at ``gamma0``."""
    if not 0 <= n <= MAX_ITERATIONS:
        raise ValueError(f"n must be in [0, {MAX_ITERATIONS}]")
    gammas = [float(gamma0)]
    ratios = [1.0]
    for _ in range(n):
        step = rg_step(gammas[-1])
        gammas.append(step.gamma_prime)
        ratios.append(ratios[-1] * step.j_ratio)
    return RGTrajectory(float(gamma0), tuple(gammas), tuple(ratios))


@dataclass(frozen=True)
class PairCoupling:
    j_eff: float
    gamma_eff: float
    components: dict[str, float]


_REAL_PAULI = ("I", "X", "Y", "Z")  # Y stands for i sigma^y here


def _real_pauli(label: str) -> np.ndarray:
    return np.eye(2) if label == "I" else pauli(label.lower())[0]


def effective_pair_coupling(gamma: float, bonds: list[tuple[int, int]]) -> PairCoupling:
    """Effective XY coupling between two blocks from an explicit first-order projection.

    Builds the inter-block Hamiltonian (J = 1) on the ten spins of two blocks
    using only the listed ``(corner of A, corner of B)`` bonds, projects it
    with ``P0 x P0`` and reads off the XX and YY components of the resulting
    4x4 operator. ``components`` holds every two-site Pauli coefficient, with
    ``YY`` in terms of sigma^y sigma^y.
    """
    if not 1 <= len(bonds) <= 6:
        raise ValueError("need between 1 and 6 bonds")
    n = 2 * N_SITES
    h = np.zeros((2**n, 2**n))
    for a, b in bonds:
        if not (2 <= a <= N_SITES and 2 <= b <= N_SITES):
            raise ValueError(f"bond {(a, b)} must join corners 2..5")
        h += (1.0 + gamma) * two_site_coupling("x", a, N_SITES + b, n)
        h += (1.0 - gamma) * two_site_coupling("y", a, N_SITES + b, n)
    h *= 0.25
    p0 = block_projector(gamma)
    p = np.kron(p0, p0)
    m = p.T @ h @ p

    comps = {}
    for la, lb in product(_REAL_PAULI, repeat=2):
        s = np.kron(_real_pauli(la), _real_pauli(lb))
        coef = float(np.sum(s * m)) / 4.0
        # (i sigma^y) x (i sigma^y) = -sigma^y x sigma^y; one lone Y stays imaginary
        comps[la + lb] = -coef if la == lb == "Y" else coef
    stray = {k: v for k, v in comps.items() if k not in ("XX", "YY") and abs(v) > 1e-10}
    if stray:
        raise ProjectionError(f"projected inter-block operator has non-XY parts: {stray}")
    cxx, cyy = comps["XX"], comps["YY"]
    return PairCoupling(j_eff=2.0 * (cxx + cyy), gamma_eff=(cxx - cyy) / (cxx + cyy), components=comps)
