import math

import numpy as np
import pytest

from dirac_operator import curvature_action, dirac, dirac_adjoint, laplacian
from gauge_field import Connection, alpha_square_from_flux, apply_gauge, random_gauge
from states import GridMismatchError
from sw_functional import (
    ConfigurationPoint,
    analytic_directional,
    bound_suite,
    directional_derivative,
    el_residual_connection,
    el_residual_spinor,
    energy_value,
    expected_gap,
    first_order_residuals,
    gap_limit,
    gradient,
    quadratic_bound,
    sw_energy,
    sw_first_order,
    topological_gap,
)
from torus_geometry import build_geometry, inner_l2, random_smooth_field

FOUR_PI_SQ = 4 * math.pi ** 2


def _random_point(g, rng, flux=(2, 0, 0, 0, 0, 0), amplitude=0.5):
    phi = random_smooth_field(g, rng, trailing=(2,), amplitude=amplitude, complex_valued=True)
    a = np.stack([random_smooth_field(g, rng, amplitude=amplitude) for _ in range(4)])
    return ConfigurationPoint(A=Connection(flux=flux, a=a), phi=phi)


def _vacuum(g, flux):
    return ConfigurationPoint(A=Connection.flat(g, flux), phi=np.zeros(g.dims + (2,), dtype=complex))


def _constant_solution(g):
    phi = np.zeros(g.dims + (2,), dtype=complex)
    phi[..., 0] = 1.0
    return ConfigurationPoint(A=Connection.flat(g), phi=phi)


def test_harmonic_values_unit_torus(unit_torus):
    p = _vacuum(unit_torus, (2, 0, 0, 0, 0, 0))
    assert sw_first_order(p, unit_torus) == pytest.approx(FOUR_PI_SQ, rel=1e-12)
    report = sw_energy(p, unit_torus)
    assert report.sw_energy == pytest.approx(FOUR_PI_SQ, rel=1e-12)
    assert report.terms.curvature_quarter == pytest.approx(FOUR_PI_SQ, rel=1e-12)
    assert report.topological_gap == pytest.approx(0.0, abs=1e-9)


def test_self_dual_sector_gap(unit_torus):
    p = _vacuum(unit_torus, (2, 0, 0, 0, 0, 2))
    assert sw_first_order(p, unit_torus) == pytest.approx(4 * FOUR_PI_SQ, rel=1e-12)
    assert energy_value(p, unit_torus) == pytest.approx(2 * FOUR_PI_SQ, rel=1e-12)
    assert topological_gap(p, unit_torus) == pytest.approx(gap_limit(8), rel=1e-12)


@pytest.mark.parametrize("flux", [(2, 0, 0, 0, 0, 0), (2, 0, 0, 0, 0, 2), (0, 2, 0, 0, 2, 0)])
def test_gap_is_topological_without_spinor(unit_torus, rng, flux):
    p = _random_point(unit_torus, rng, flux)
    p = ConfigurationPoint(A=p.A, phi=np.zeros_like(p.phi))
    assert topological_gap(p, unit_torus) == pytest.approx(gap_limit(alpha_square_from_flux(flux)), abs=1e-9 * math.pi ** 2)


@pytest.mark.parametrize("k", [0.0, -1.0])
def test_gap_differs_from_expected_by_weitzenbock_defect(rng, k):
    g = build_geometry((6, 6, 6, 6), (1.0 / 6,) * 4, k)
    p = _random_point(g, rng, (2, 0, 0, 0, 0, 2))
    defect = dirac_adjoint(p.A, dirac(p.A, p.phi, g), g) - laplacian(p.A, p.phi, g) - curvature_action(p.A, p.phi, g)
    correction = inner_l2(defect, p.phi, g)
    gap = topological_gap(p, g)
    assert gap == pytest.approx(expected_gap(p, g) + correction, rel=1e-9)


def test_energy_terms_add_up(negative_torus, rng):
    report = sw_energy(_random_point(negative_torus, rng), negative_torus)
    t = report.terms
    assert report.sw_energy == pytest.approx(t.curvature_quarter + t.grad_sq + t.quartic_eighth + t.curvature_coupling)
    assert report.topological_gap == pytest.approx(report.sw_first_order - report.sw_energy)


def test_constant_solution_is_critical(negative_torus):
    p = _constant_solution(negative_torus)
    assert el_residual_spinor(p, negative_torus) <= 1e-12
    assert el_residual_connection(p, negative_torus) <= 1e-12
    g_phi, g_a = gradient(p, negative_torus)
    assert np.max(np.abs(g_phi)) <= 1e-12
    assert np.max(np.abs(g_a)) <= 1e-12
    # |nabla phi|^2 = 0, 1/8 - 1/4 = -1/8 每单位体积
    assert energy_value(p, negative_torus) == pytest.approx(-0.125 * negative_torus.volume)
    assert first_order_residuals(p, negative_torus)["dirac"] <= 1e-12


@pytest.mark.parametrize("flux", [(0, 0, 0, 0, 0, 0), (2, 0, 0, 0, 0, 2)])
def test_gradient_matches_finite_differences(negative_torus, rng, flux):
    g = negative_torus
    p = _random_point(g, rng, flux)
    grad = gradient(p, g)
    g_norm = math.sqrt(inner_l2(grad[0], grad[0], g) + inner_l2(grad[1], grad[1], g))
    for _ in range(5):
        d_phi = random_smooth_field(g, rng, trailing=(2,), complex_valued=True)
        d_a = np.stack([random_smooth_field(g, rng) for _ in range(4)])
        d_norm = math.sqrt(inner_l2(d_phi, d_phi, g) + inner_l2(d_a, d_a, g))
        fd = directional_derivative(p, g, d_phi, d_a)
        an = analytic_directional(grad, d_phi, d_a, g)
        assert abs(fd - an) <= 1e-6 * g_norm * d_norm


def test_connection_gradient_without_spinor_is_half_codifferential(unit_torus, rng):
    p = _random_point(unit_torus, rng, (2, 0, 0, 0, 0, 0))
    p = ConfigurationPoint(A=p.A, phi=np.zeros_like(p.phi))
    d_a = np.stack([random_smooth_field(unit_torus, rng) for _ in range(4)])
    zero = np.zeros_like(p.phi)
    fd = directional_derivative(p, unit_torus, zero, d_a)
    an = analytic_directional(gradient(p, unit_torus), zero, d_a, unit_torus)
    assert fd == pytest.approx(an, rel=1e-6)


def test_functionals_are_gauge_invariant(unit_torus, rng):
    p = _random_point(unit_torus, rng, (2, 0, 0, 0, 0, 2))
    t = random_gauge(unit_torus, rng, amplitude=2.0, winding=(1, -2, 0, 1))
    A, phi = apply_gauge(t, p.A, p.phi, unit_torus)
    q = ConfigurationPoint(A=A, phi=phi)
    for fn in (sw_first_order, energy_value, el_residual_spinor, el_residual_connection):
        assert fn(q, unit_torus) == pytest.approx(fn(p, unit_torus), rel=1e-10)


def test_quadratic_bound_roots():
    quad = quadratic_bound(1.0, 1.0, 0.0, 8.0)
    assert quad["value"] == pytest.approx(0.0)
    assert quad["discriminant"] == pytest.approx(64.0)
    assert (quad["root_low"], quad["root_high"]) == pytest.approx((0.0, 8.0))
    assert quad["floor"] == -2.0 and quad["floor_holds"]


def test_quadratic_bound_below_floor():
    quad = quadratic_bound(1.0, 1.0, -3.0, 1.0)
    assert quad["discriminant"] < 0
    assert quad["root_low"] is None and quad["root_high"] is None
    assert not quad["floor_holds"]


def test_bound_suite_on_vacuum(unit_torus):
    report = bound_suite(_vacuum(unit_torus, (2, 0, 0, 0, 0, 2)), unit_torus)
    assert report.sup_norm == 0.0 and report.sup_bound_holds
    assert report.topological_floor == pytest.approx(8 * math.pi ** 2)
    assert report.lower_bound_holds
    assert report.holder_slack >= 0


def test_bound_suite_constant_solution(negative_torus):
    report = bound_suite(_constant_solution(negative_torus), negative_torus)
    assert report.k_minus == pytest.approx(1.0)
    assert report.sup_norm == pytest.approx(1.0)
    assert report.sup_bound_holds
    assert report.curvature_floor == pytest.approx(-2.0)
    assert report.lower_bound_holds


def test_point_shape_check(unit_torus, small_torus):
    p = _vacuum(small_torus, (0,) * 6)
    with pytest.raises(GridMismatchError):
        energy_value(p, unit_torus)


def _defect_pairing(p, g):
    defect = dirac_adjoint(p.A, dirac(p.A, p.phi, g), g) - laplacian(p.A, p.phi, g) - curvature_action(p.A, p.phi, g)
    return inner_l2(defect, p.phi, g)


def test_first_order_functional_weights_dirac_term_fully(negative_torus, rng):
    p = _random_point(negative_torus, rng, (2, 0, 0, 0, 0, 2))
    res = first_order_residuals(p, negative_torus)
    assert res["dirac"] > 0.1
    assert sw_first_order(p, negative_torus) == pytest.approx(0.5 * res["curvature"] ** 2 + res["dirac"] ** 2)
    # 权重 1/2 时差值多出 -1/2 ||D+ phi||^2, 不再由拓扑与 |phi| 决定
    halved = 0.5 * res["curvature"] ** 2 + 0.5 * res["dirac"] ** 2 - energy_value(p, negative_torus)
    exact = expected_gap(p, negative_torus) + _defect_pairing(p, negative_torus)
    assert halved == pytest.approx(exact - 0.5 * res["dirac"] ** 2, rel=1e-9)


def test_gap_identity_holds_across_sectors():
    g = build_geometry((6, 6, 6, 6), (1.0 / 6,) * 4, 0.0)
    sectors = [(0, 0, 0, 0, 0, 0), (2, 0, 0, 0, 0, 2), (0, 2, 0, 0, 2, 0)]
    for seed in range(20):
        flux = sectors[seed % 3]
        p = _random_point(g, np.random.default_rng(seed), flux)
        gap = topological_gap(p, g)
        assert gap == pytest.approx(expected_gap(p, g) + _defect_pairing(p, g), rel=1e-9, abs=1e-9)


@pytest.mark.slow
def test_gap_spread_in_trivial_sector_is_second_order():
    # 同一种子在两种网格上给出同一连续场, 差值只剩 O(h^2) 的 Weitzenböck 缺陷
    spreads = []
    for n in (8, 16):
        g = build_geometry((n,) * 4, (1.0 / n,) * 4, 0.0)
        deviations = []
        for seed in range(20):
            p = _random_point(g, np.random.default_rng(seed), (0,) * 6)
            deviations.append(topological_gap(p, g) - expected_gap(p, g))
        spreads.append(np.ptp(deviations))
    assert math.log2(spreads[0] / spreads[1]) == pytest.approx(2.0, abs=0.6)
