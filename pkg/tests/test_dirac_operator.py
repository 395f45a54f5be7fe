import math

import numpy as np
import pytest

from dirac_operator import (
    GAMMA,
    covariant_derivative,
    curvature_action,
    dirac,
    dirac_adjoint,
    laplacian,
    weitzenbock_residual,
)
from gauge_field import Connection, apply_gauge, pure_gauge, random_gauge
from states import GridMismatchError
from torus_geometry import build_geometry, inner_l2, lp_norm, random_smooth_field


def _spinor(g, rng):
    return random_smooth_field(g, rng, trailing=(2,), complex_valued=True)


def _connection(g, rng, flux=(2, 0, 0, 0, 0, 2)):
    return Connection(flux=flux, a=np.stack([random_smooth_field(g, rng, amplitude=0.5) for _ in range(4)]))


def test_gamma_clifford_relations():
    for mu in range(4):
        for nu in range(4):
            anti = GAMMA[mu].conj().T @ GAMMA[nu] + GAMMA[nu].conj().T @ GAMMA[mu]
            np.testing.assert_allclose(anti, 2 * np.eye(2) * (mu == nu), atol=1e-15)


def test_dirac_adjoint_pairing(unit_torus, rng):
    A = _connection(unit_torus, rng)
    phi, psi = _spinor(unit_torus, rng), _spinor(unit_torus, rng)
    lhs = np.sum(dirac(A, phi, unit_torus) * np.conj(psi))
    rhs = np.sum(phi * np.conj(dirac_adjoint(A, psi, unit_torus)))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_laplacian_is_positive_form(unit_torus, rng):
    A = _connection(unit_torus, rng)
    phi = _spinor(unit_torus, rng)
    nabla = covariant_derivative(A, phi, unit_torus)
    grad_sq = lp_norm(np.moveaxis(nabla, 0, -2), 2, unit_torus) ** 2
    assert inner_l2(laplacian(A, phi, unit_torus), phi, unit_torus) == pytest.approx(grad_sq, rel=1e-10)


def test_constant_spinor_is_parallel_for_flat_connection(unit_torus):
    phi = np.zeros(unit_torus.dims + (2,), dtype=complex)
    phi[..., 1] = 2.0 - 1.0j
    A = Connection.flat(unit_torus)
    np.testing.assert_allclose(dirac(A, phi, unit_torus), 0.0, atol=1e-14)
    np.testing.assert_allclose(laplacian(A, phi, unit_torus), 0.0, atol=1e-14)


def test_plane_wave_derivative(unit_torus):
    x = unit_torus.coordinates(0)
    h = unit_torus.spacing[0]
    k = 2 * np.pi * 2
    phi = np.zeros(unit_torus.dims + (2,), dtype=complex)
    phi[..., 0] = np.exp(1j * k * x)
    nabla = covariant_derivative(Connection.flat(unit_torus), phi, unit_torus)
    np.testing.assert_allclose(nabla[0], 1j * math.sin(k * h) / h * phi, atol=1e-12)
    np.testing.assert_allclose(nabla[1:], 0.0, atol=1e-14)


def test_dirac_is_gauge_covariant(unit_torus, rng):
    A = _connection(unit_torus, rng)
    phi = _spinor(unit_torus, rng)
    t = random_gauge(unit_torus, rng, amplitude=1.5, winding=(1, 0, 0, -1))
    A_t, phi_t = apply_gauge(t, A, phi, unit_torus)
    phase = np.exp(1j * t.full_phase())[..., None]
    np.testing.assert_allclose(dirac(A_t, phi_t, unit_torus), phase * dirac(A, phi, unit_torus), atol=1e-10)


def test_weitzenbock_exact_for_flat_and_pure_gauge(unit_torus, rng):
    phi = _spinor(unit_torus, rng)
    scale = lp_norm(phi, 2, unit_torus) / 0.125 ** 2
    assert weitzenbock_residual(Connection.flat(unit_torus), phi, unit_torus) <= 1e-12 * scale
    A = pure_gauge(random_gauge(unit_torus, rng), unit_torus)
    assert weitzenbock_residual(A, phi, unit_torus) <= 1e-12 * scale


def test_weitzenbock_includes_scalar_curvature(rng):
    g = build_geometry((6, 6, 6, 6), (1.0 / 6,) * 4, 2.0)
    phi = _spinor(g, rng)
    # 平坦环面上 D*D 没有 k 项, 缺陷正好是 k/4 phi
    assert weitzenbock_residual(Connection.flat(g), phi, g) == pytest.approx(0.5 * lp_norm(phi, 2, g), rel=1e-10)


def _plane_case(n):
    g = build_geometry((n, n, 4, 4), (1.0 / n, 1.0 / n, 0.25, 0.25), 0.0)
    x0, x1 = g.coordinates(0), g.coordinates(1)
    a = np.zeros((4,) + g.dims)
    a[0] = 0.7 * np.sin(2 * np.pi * (x1 + 0.1))
    a[1] = 0.4 * np.cos(2 * np.pi * (x0 + 0.5 / n))
    phi = np.stack([np.cos(2 * np.pi * x0) + 0j, 0.5 * np.exp(2j * np.pi * x1)], axis=-1)
    return weitzenbock_residual(Connection(flux=(0,) * 6, a=a), phi, g)


def test_weitzenbock_defect_converges_second_order():
    coarse, fine = _plane_case(16), _plane_case(32)
    assert fine < coarse
    assert math.log2(coarse / fine) == pytest.approx(2.0, abs=0.5)


def test_curvature_action_matches_sigma_pairing(unit_torus, rng):
    A = _connection(unit_torus, rng)
    phi = _spinor(unit_torus, rng)
    action = curvature_action(A, phi, unit_torus)
    # rho(F+/2) 是 Hermite 的, <rho phi, phi> 为实数
    assert abs(np.sum(action * np.conj(phi)).imag) <= 1e-10 * np.sum(np.abs(action) * np.abs(phi))


def test_spinor_shape_checked(unit_torus):
    with pytest.raises(GridMismatchError):
        dirac(Connection.flat(unit_torus), np.zeros((8, 8, 8, 8, 3), dtype=complex), unit_torus)
