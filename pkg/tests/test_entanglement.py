import math

import numpy as np
import pytest

from qrg_xy2d.entanglement import (
    CORNER_PAIRS,
    FitError,
    DerivativePeak,
    abs_derivative,
    cg_at,
    cg_curve,
    concurrence,
    derivative_curve,
    derivative_peak,
    linear_rg_slope,
    pairwise_concurrences,
    scaling_fits,
)

BELL = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2)


def _pure(psi):
    return np.outer(psi, psi)


def test_bell_and_product():
    assert concurrence(_pure(BELL)) == pytest.approx(1.0, abs=1e-12)
    assert concurrence(_pure(np.array([1.0, 0.0, 0.0, 0.0]))) == pytest.approx(0.0, abs=1e-12)
    assert concurrence(np.eye(4) / 4) == 0.0


def test_pure_state_formula(rng):
    psi = rng.normal(size=(1000, 4))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    rhos = np.einsum("ki,kj->kij", psi, psi)
    want = 2 * np.abs(psi[:, 0] * psi[:, 3] - psi[:, 1] * psi[:, 2])
    np.testing.assert_allclose(concurrence(rhos), want, atol=1e-10)


def test_werner_threshold():
    bell = _pure(BELL)
    for p, want in ((0.2, 0.0), (1 / 3, 0.0), (0.6, 0.4), (1.0, 1.0)):
        rho = p * bell + (1 - p) * np.eye(4) / 4
        assert concurrence(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-10)


def test_local_rotation_invariance(rng):
    psi = rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    rho = _pure(psi)
    t1, t2 = 0.7, -1.3
    r = lambda t: np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    u = np.kron(r(t1), r(t2))
    assert concurrence(u @ rho @ u.T) == pytest.approx(concurrence(rho), abs=1e-12)


def test_concurrence_validates():
    with pytest.raises(ValueError):
        concurrence(np.eye(3) / 3)
    with pytest.raises(ValueError):
        concurrence(np.eye(4))
    with pytest.raises(ValueError):
        concurrence(np.diag([1.5, -0.5, 0.0, 0.0]))


@pytest.mark.parametrize("gamma", [0.0, 0.05, 0.3, 0.8, -0.3])
def test_corner_pairs_equal(gamma):
    cs = pairwise_concurrences(gamma)
    assert len(cs.pairs) == 6 and set(cs.pairs) == set(CORNER_PAIRS)
    vals = np.array(list(cs.pairs.values()))
    assert np.ptp(vals) < 1e-10


def test_cg_spot_values():
    assert pairwise_concurrences(0.0).cg == pytest.approx(0.25, abs=1e-12)
    assert pairwise_concurrences(1.0).cg == pytest.approx(0.0, abs=1e-12)
    # 40-digit evaluation of the Wootters eigenvalues gives 0.0487341824214498
    assert pairwise_concurrences(0.3).cg == pytest.approx(0.04873418242145, abs=1e-12)


def test_cg_same_for_both_members_and_sign():
    assert pairwise_concurrences(0.3, member=2).cg == pytest.approx(pairwise_concurrences(0.3).cg, abs=1e-12)
    assert pairwise_concurrences(-0.3).cg == pytest.approx(pairwise_concurrences(0.3).cg, abs=1e-12)
    with pytest.raises(ValueError):
        pairwise_concurrences(0.3, member=3)


def test_linear_slope():
    assert linear_rg_slope() == pytest.approx(11.0, rel=1e-6)


def test_cg_curves_cross_at_critical_point():
    assert cg_at(0.0, 0) == pytest.approx(cg_at(0.0, 3), abs=1e-12)
    grid = np.array([-0.2, 0.0, 0.2])
    c = cg_curve(2, grid)
    assert c[1] > c[0] and c[1] > c[2]
    with pytest.raises(ValueError):
        cg_curve(-1, grid)


def test_abs_derivative_symmetric():
    assert abs_derivative(-0.1, 1, 1e-5) == pytest.approx(abs_derivative(0.1, 1, 1e-5), rel=1e-6)


def test_derivative_peaks_move_towards_zero():
    peaks = [derivative_peak(n) for n in range(4)]
    assert all(p.converged for p in peaks)
    assert all(p.gamma_max < 0 for p in peaks)
    gm = [abs(p.gamma_max) for p in peaks]
    dm = [p.d_max for p in peaks]
    assert all(b < a for a, b in zip(gm, gm[1:]))
    assert all(b > a for a, b in zip(dm, dm[1:]))
    assert peaks[0].gamma_max == pytest.approx(-0.090713, abs=1e-5)
    assert peaks[1].d_max == pytest.approx(11.3498, rel=1e-4)


def test_derivative_curve_checks_grid():
    with pytest.raises(ValueError):
        derivative_curve(0, [0.0, 1e-4], h=1e-4)
    with pytest.raises(ValueError):
        derivative_curve(0, [0.1, 0.0])
    peak = DerivativePeak(0, -0.09, 1.0, 1.0)
    dc = derivative_curve(0, np.linspace(-0.5, 0.5, 11), peak=peak)
    assert dc.values.shape == (11,) and dc.gamma_max == -0.09


def test_scaling_fit_slope_matches_linear_map():
    fit = scaling_fits([1, 2, 3, 4])
    lam = 11.0
    assert fit.r2_d >= 0.99
    assert fit.theta == pytest.approx(math.log(lam) / math.log(5), rel=1e-3)
    assert fit.prefactor == pytest.approx(1.0, abs=0.05)


def test_scaling_fit_needs_three_points():
    with pytest.raises(FitError):
        scaling_fits([1, 2])
    bad = [DerivativePeak(n, 0.1, 1.0, 1.0) for n in (1, 2, 3)]
    with pytest.raises(FitError):
        scaling_fits([1, 2, 3], bad)
