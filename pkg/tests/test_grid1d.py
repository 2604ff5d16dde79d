import numpy as np
import pytest

from msnt import grid1d
from msnt.errors import ValidationError

from conftest import make_params


def test_grid_validation():
    with pytest.raises(ValidationError):
        grid1d.Grid(N=0, length=1.0)
    with pytest.raises(ValidationError):
        grid1d.Grid(N=4, length=-1.0)
    g = grid1d.Grid(N=4, length=2.0)
    assert g.dx == 0.5
    assert np.allclose(g.cell_centers, [0.25, 0.75, 1.25, 1.75])
    assert np.allclose(g.face_positions, [0.0, 0.5, 1.0, 1.5, 2.0])


def test_face_gradient_stencils():
    g = grid1d.Grid(N=2, length=1.0)
    assert np.allclose(grid1d.face_gradient(g, np.array([0.0, 1.0])), [0.0, 2.0, 0.0])
    g8 = grid1d.Grid(N=8, length=1.0)
    assert np.allclose(grid1d.face_gradient(g8, np.full(8, 3.7)), 0.0)
    linear = (np.arange(8) + 0.5) * g8.dx
    grad = grid1d.face_gradient(g8, linear)
    assert np.allclose(grad[1:-1], 1.0)


def test_divergence_and_telescoping(rng):
    g = grid1d.Grid(N=17, length=2.0)
    F = rng.standard_normal(18)
    div = grid1d.divergence(g, F)
    assert abs(np.sum(div) * g.dx - (F[-1] - F[0])) <= 1e-14 * max(1.0, np.abs(F).max())
    F[0] = F[-1] = 0.0
    assert abs(np.sum(grid1d.divergence(g, F)) * g.dx) <= 1e-14
    assert np.allclose(grid1d.divergence(g, np.full(18, 2.5)), 0.0)
    g1 = grid1d.Grid(N=1, length=0.5)
    assert np.allclose(grid1d.divergence(g1, np.array([1.0, 3.0])), 4.0)


def test_gradient_of_constant_then_divergence_is_zero():
    g = grid1d.Grid(N=9, length=1.0)
    f = np.full(9, 1.234)
    assert np.allclose(grid1d.divergence(g, grid1d.face_gradient(g, f)), 0.0)


def test_shape_validation():
    g = grid1d.Grid(N=4, length=1.0)
    with pytest.raises(ValidationError):
        grid1d.face_gradient(g, np.zeros(5))
    with pytest.raises(ValidationError):
        grid1d.divergence(g, np.zeros(4))


def test_apply_boundary():
    p = make_params(lam=1.0, theta0=1.0)
    jl, jr = grid1d.apply_boundary(p, 2.0, 2.0)
    # outward magnitude 1 on both walls when the cell is hotter by 1
    assert jl == pytest.approx(-1.0)
    assert jr == pytest.approx(1.0)
    assert grid1d.apply_boundary(p, 1.0, 1.0) == (0.0, 0.0)
    p0 = make_params(lam=0.0)
    assert grid1d.apply_boundary(p0, 5.0, 0.2) == (0.0, 0.0)


def test_face_average_modes():
    assert grid1d.face_average(1.0, 3.0) == 2.0
    assert grid1d.face_average(1.0, 3.0, "harmonic") == pytest.approx(1.5)
    with pytest.raises(ValidationError):
        grid1d.face_average(1.0, 1.0, "geometric")


def test_driving_forces_sum_to_discrete_pressure_gradient(rng):
    # sum_i grad(rho_i theta)/m_i == grad(sum_i rho_i theta / m_i) exactly,
    # by linearity of the face gradient
    from msnt.constitutive import driving_force, total_pressure
    p = make_params(n=3, m=[1.0, 2.0, 0.7])
    g = grid1d.Grid(N=25, length=1.3)
    rho = rng.uniform(0.1, 2.0, (25, 3))
    theta = rng.uniform(0.5, 2.0, 25)
    d = np.stack([grid1d.face_gradient(g, rho[:, i] * theta)
                  for i in range(3)], axis=1) / p.m
    grad_p = grid1d.face_gradient(g, total_pressure(p, rho, theta))
    assert np.abs(d.sum(axis=1) - grad_p).max() <= 1e-13 * max(
        1.0, np.abs(grad_p).max())
    # uniform total pressure (equal masses, theta = 1/rho): forces sum to ~0
    pu = make_params(n=3, m=[1.0, 1.0, 1.0])
    theta_u = 1.0 / rho.sum(axis=1)
    grad = np.stack([grid1d.face_gradient(g, rho[:, i] * theta_u)
                     for i in range(3)], axis=1)
    du = driving_force(pu, grad)
    ptot = total_pressure(pu, rho, theta_u)
    assert np.abs(ptot - ptot[0]).max() <= 1e-13
    assert np.abs(du.sum(axis=1)).max() <= 1e-12


def test_restrict_prolong_roundtrip(rng):
    coarse = rng.standard_normal((6, 3))
    assert np.array_equal(grid1d.restrict(grid1d.prolong(coarse, 2), 2), coarse)
    fine = rng.standard_normal(12)
    # restriction preserves the cell integral
    assert np.sum(grid1d.restrict(fine, 3)) * 3 == pytest.approx(np.sum(fine))
    with pytest.raises(ValidationError):
        grid1d.restrict(fine, 5)
