import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrg_xy2d.rg_map import (
    MAX_ITERATIONS,
    ProjectionError,
    block_projector,
    effective_pair_coupling,
    eta_factors_closed,
    eta_factors_operator,
    fixed_points,
    gamma_prime_from_eta,
    iterate,
    rg_step,
)

ETA_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


def test_spot_values():
    assert rg_step(0.1).gamma_prime == pytest.approx(0.791596, abs=1e-6)
    assert rg_step(0.5).gamma_prime == pytest.approx(0.99988, abs=1e-5)
    assert rg_step(0.0).gamma_prime == 0.0
    assert rg_step(0.0).j_ratio == pytest.approx(0.375, abs=1e-12)


@pytest.mark.parametrize("g", [-1.0, 0.0, 1.0])
def test_fixed_points_are_invariant(g):
    assert rg_step(g).gamma_prime == pytest.approx(g, abs=1e-9)


def test_fixed_points_search():
    roots = fixed_points(-1.2, 1.2)
    np.testing.assert_allclose(roots, [-1.0, 0.0, 1.0], atol=1e-8)
    assert fixed_points(0.1, 0.9) == []
    assert fixed_points(-0.2, 0.2) == pytest.approx([0.0], abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-6, 1.4))
def test_gamma_prime_is_odd_and_repelled_from_zero(g):
    plus, minus = rg_step(g).gamma_prime, rg_step(-g).gamma_prime
    assert plus == pytest.approx(-minus, rel=1e-10, abs=1e-14)
    if g < 1.0:
        assert abs(plus) > abs(g)


def test_linear_continuation_below_floor():
    a, b = rg_step(1e-14).gamma_prime, rg_step(2e-14).gamma_prime
    assert b == pytest.approx(2 * a, rel=1e-12)
    assert a / 1e-14 == pytest.approx(11.0, rel=1e-6)


def test_rg_step_domain():
    with pytest.raises(ValueError):
        rg_step(1.6)
    with pytest.raises(ValueError):
        rg_step(float("inf"))


@pytest.mark.parametrize("gamma", ETA_GRID)
def test_eta_closed_matches_operator(gamma):
    c = eta_factors_closed(gamma).as_array()
    o = eta_factors_operator(gamma).as_array()
    assert min(np.abs(c - o).max(), np.abs(c + o).max()) < 1e-8


def test_printed_corner_eta_disagrees_with_operator():
    c = eta_factors_closed(0.5, printed=True).as_array()
    o = eta_factors_operator(0.5).as_array()
    assert min(np.abs(c - o).max(), np.abs(c + o).max()) > 1e-2


@pytest.mark.parametrize("gamma", [0.1, 0.45, 0.9, -0.3])
def test_gamma_prime_from_eta_matches_closed(gamma):
    assert gamma_prime_from_eta(gamma) == pytest.approx(rg_step(gamma).gamma_prime, abs=1e-12)


def test_block_projector_is_isometry():
    p = block_projector(0.4)
    np.testing.assert_allclose(p.T @ p, np.eye(2), atol=1e-13)


def test_iterate_flows_to_ising():
    traj = iterate(0.1, 6)
    assert traj.n_max == 6
    assert all(b >= a for a, b in zip(traj.gammas, traj.gammas[1:]))
    assert traj.gammas[-1] == pytest.approx(1.0, abs=1e-12)
    assert traj.effective_sizes[:3] == (5, 25, 125)
    assert traj.j_ratios[0] == 1.0


@pytest.mark.parametrize("g", [0.0, 1.0, -1.0])
def test_iterate_fixed_point_rows_constant(g):
    traj = iterate(g, 5)
    assert all(x == pytest.approx(g, abs=1e-12) for x in traj.gammas)


def test_iterate_bounds():
    with pytest.raises(ValueError):
        iterate(0.1, MAX_ITERATIONS + 1)


@pytest.mark.parametrize("gamma", [0.1, 0.5, 0.9])
def test_two_block_oracle(gamma):
    pc = effective_pair_coupling(gamma, [(2, 3)])
    assert pc.gamma_eff == pytest.approx(rg_step(gamma).gamma_prime, abs=1e-8)
    assert pc.j_eff == pytest.approx(rg_step(gamma).j_ratio, rel=1e-10)
    others = {k: v for k, v in pc.components.items() if k not in ("XX", "YY")}
    assert max(abs(v) for v in others.values()) <= 1e-10


def test_two_bonds_double_the_coupling():
    one = effective_pair_coupling(0.3, [(2, 3)])
    two = effective_pair_coupling(0.3, [(2, 3), (4, 5)])
    assert two.j_eff / one.j_eff == pytest.approx(2.0, rel=1e-12)
    assert two.gamma_eff == pytest.approx(one.gamma_eff, abs=1e-12)


def test_pair_coupling_validates_bonds():
    with pytest.raises(ValueError):
        effective_pair_coupling(0.3, [(1, 3)])
    with pytest.raises(ValueError):
        effective_pair_coupling(0.3, [])
    assert issubclass(ProjectionError, ArithmeticError)


def test_any_corner_pair_gives_same_bond():
    ref = effective_pair_coupling(0.4, [(2, 3)])
    for bond in [(5, 4), (3, 3), (2, 5)]:
        pc = effective_pair_coupling(0.4, [bond])
        assert pc.j_eff == pytest.approx(ref.j_eff, rel=1e-12)
        assert pc.gamma_eff == pytest.approx(ref.gamma_eff, abs=1e-12)
