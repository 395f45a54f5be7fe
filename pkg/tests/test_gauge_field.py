import math

import numpy as np
import pytest

from gauge_field import (
    PAIRS,
    Connection,
    GaugeTransform,
    alpha_square_from_flux,
    apply_gauge,
    chern_square,
    co_differential,
    component,
    curvature,
    harmonic_density,
    plaquette_angles,
    plaquette_fluxes,
    pure_gauge,
    random_gauge,
    reassemble,
    split_sd_asd,
)
from states import GridMismatchError
from torus_geometry import build_geometry, lp_norm, random_smooth_field

SECTORS = [
    (0, 0, 0, 0, 0, 0),
    (2, 0, 0, 0, 0, 0),
    (2, 0, 0, 0, 0, 2),
    (0, 2, 0, 0, 2, 0),
    (2, -2, 4, 2, 0, -2),
]


def _fluctuation(g, rng, amplitude=1.0):
    return np.stack([random_smooth_field(g, rng, amplitude=amplitude) for _ in range(4)])


def test_harmonic_curvature_is_constant(unit_torus):
    F = curvature(Connection.flat(unit_torus, (2, 0, 0, 0, 0, 0)), unit_torus)
    np.testing.assert_allclose(F[0], 4 * np.pi, rtol=1e-14)
    np.testing.assert_allclose(F[1:], 0.0, atol=1e-14)


def test_harmonic_density_scales_with_area():
    g = build_geometry((4, 8, 4, 4), (0.5, 0.25, 0.25, 0.25), 0.0)
    b = harmonic_density((2, 0, 0, 0, 0, 0), g)
    assert b[0] == pytest.approx(2 * np.pi * 2 / (2.0 * 2.0))


@pytest.mark.parametrize("flux", SECTORS)
def test_flux_quantization_with_fluctuation(unit_torus, rng, flux):
    F = curvature(Connection(flux=flux, a=_fluctuation(unit_torus, rng)), unit_torus)
    np.testing.assert_allclose(plaquette_fluxes(F, unit_torus), flux, atol=1e-10)


def test_flux_quantization_on_anisotropic_grid(rng):
    g = build_geometry((4, 6, 8, 5), (0.3, 0.2, 0.1, 0.4), 0.0)
    flux = (2, 0, -2, 4, 0, 2)
    F = curvature(Connection(flux=flux, a=_fluctuation(g, rng)), g)
    np.testing.assert_allclose(plaquette_fluxes(F, g), flux, atol=1e-10)


@pytest.mark.parametrize("flux, expected", [((2, 0, 0, 0, 0, 2), 8), ((0, 2, 0, 0, 2, 0), -8), ((2, 0, 0, 0, 0, 0), 0)])
def test_alpha_square_examples(flux, expected):
    assert alpha_square_from_flux(flux) == expected


@pytest.mark.parametrize("flux", SECTORS)
def test_chern_square_is_topological(unit_torus, rng, flux):
    alpha_sq = alpha_square_from_flux(flux)
    assert chern_square(curvature(Connection.flat(unit_torus, flux), unit_torus), unit_torus) == pytest.approx(
        alpha_sq, abs=1e-10
    )
    F = curvature(Connection(flux=flux, a=_fluctuation(unit_torus, rng)), unit_torus)
    assert chern_square(F, unit_torus) == pytest.approx(alpha_sq, abs=1e-10)


@pytest.mark.parametrize("flux", SECTORS)
def test_sd_minus_asd_norm(unit_torus, rng, flux):
    F = curvature(Connection(flux=flux, a=_fluctuation(unit_torus, rng)), unit_torus)
    sd, asd = split_sd_asd(F)
    difference = lp_norm(np.moveaxis(sd, 0, -1), 2, unit_torus) ** 2 - lp_norm(np.moveaxis(asd, 0, -1), 2, unit_torus) ** 2
    assert difference == pytest.approx(4 * math.pi ** 2 * alpha_square_from_flux(flux), abs=1e-9)


def test_split_is_orthogonal_and_invertible(rng):
    F = rng.normal(size=(6, 100))
    sd, asd = split_sd_asd(F)
    np.testing.assert_allclose(np.sum(sd ** 2, axis=0) + np.sum(asd ** 2, axis=0), np.sum(F ** 2, axis=0))
    np.testing.assert_allclose(reassemble(sd, asd), F, atol=1e-14)


def test_self_dual_form_has_no_asd_part():
    F = np.zeros(6)
    F[0] = F[5] = 1.0
    sd, asd = split_sd_asd(F)
    np.testing.assert_allclose(asd, 0.0)
    assert sd[0] == pytest.approx(math.sqrt(2))


def test_component_antisymmetry(unit_torus, rng):
    F = curvature(Connection(flux=(2, 0, 0, 0, 0, 0), a=_fluctuation(unit_torus, rng)), unit_torus)
    for mu, nu in PAIRS:
        np.testing.assert_array_equal(component(F, nu, mu), -component(F, mu, nu))
    np.testing.assert_array_equal(component(F, 2, 2), 0.0)


def test_curvature_is_gauge_invariant_with_winding(unit_torus, rng):
    A = Connection(flux=(2, 0, 0, 0, 0, 2), a=_fluctuation(unit_torus, rng))
    phi = random_smooth_field(unit_torus, rng, trailing=(2,), complex_valued=True)
    for _ in range(5):
        t = random_gauge(unit_torus, rng, amplitude=2.0, max_winding=2)
        A_t, phi_t = apply_gauge(t, A, phi, unit_torus)
        np.testing.assert_allclose(curvature(A_t, unit_torus), curvature(A, unit_torus), atol=1e-10)
        np.testing.assert_allclose(np.abs(phi_t), np.abs(phi), atol=1e-14)


def test_pure_gauge_is_flat(unit_torus, rng):
    A = pure_gauge(random_gauge(unit_torus, rng, winding=(1, 0, -2, 0)), unit_torus)
    np.testing.assert_allclose(curvature(A, unit_torus), 0.0, atol=1e-10)
    np.testing.assert_allclose(plaquette_angles(A, unit_torus), 0.0, atol=1e-10)


def test_winding_increments_wrap(unit_torus, rng):
    t = GaugeTransform(theta=random_smooth_field(unit_torus, rng), winding=(1, -1, 0, 2))
    incr = t.link_increments()
    for mu, w in enumerate(t.winding):
        np.testing.assert_allclose(np.sum(incr[mu], axis=mu), 2 * np.pi * w, atol=1e-12)


def test_co_differential_of_harmonic_field_vanishes(unit_torus):
    F = curvature(Connection.flat(unit_torus, (2, 2, 0, 0, 0, 2)), unit_torus)
    np.testing.assert_allclose(co_differential(F, unit_torus), 0.0, atol=1e-12)


def test_co_differential_is_adjoint_of_curvature(unit_torus, rng):
    # <F(a) - b, F(c) - b> 对 c 线性, 伴随关系 <F(c) - b, G> = <c, d*G>
    G = rng.normal(size=(6,) + unit_torus.dims)
    c = _fluctuation(unit_torus, rng)
    Fc = curvature(Connection(flux=(0,) * 6, a=c), unit_torus)
    lhs = np.sum(Fc * G)
    rhs = np.sum(c * co_differential(G, unit_torus))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_odd_flux_rejected(unit_torus):
    with pytest.raises(ValueError):
        Connection.flat(unit_torus, (1, 0, 0, 0, 0, 0))


def test_shape_mismatch(unit_torus, small_torus):
    A = Connection.flat(small_torus)
    with pytest.raises(GridMismatchError):
        curvature(A, unit_torus)
    t = GaugeTransform(theta=np.zeros(small_torus.dims))
    with pytest.raises(GridMismatchError):
        apply_gauge(t, Connection.flat(unit_torus), np.zeros(unit_torus.dims + (2,), dtype=complex), unit_torus)
