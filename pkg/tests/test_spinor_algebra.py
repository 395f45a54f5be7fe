import numpy as np
import pytest

from spinor_algebra import (
    C_RHO,
    TAU,
    apply_endo,
    clifford_sd,
    endo_norm_sq,
    endo_to_triple,
    norm_sq,
    sigma,
    sigma_triple,
    spinor_inner,
)


def _spinors(rng, n=200):
    return rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))


@pytest.mark.parametrize(
    "phi, expected",
    [
        ((0, 0), [[0, 0], [0, 0]]),
        ((1, 0), [[0.5, 0], [0, -0.5]]),
        ((1, 1j), [[0, -1j], [1j, 0]]),
    ],
)
def test_sigma_matrix(phi, expected):
    np.testing.assert_allclose(sigma(np.array(phi, dtype=complex)), np.array(expected, dtype=complex), atol=1e-15)


@pytest.mark.parametrize("phi, expected", [((0, 0), 0.0), ((1, 0), 0.5), ((1, 1j), 2.0)])
def test_endo_norm_sq(phi, expected):
    assert endo_norm_sq(sigma(np.array(phi, dtype=complex))) == pytest.approx(expected)


def test_apply_endo_examples():
    phi = np.array([1, 0], dtype=complex)
    np.testing.assert_allclose(apply_endo(sigma(phi), phi), [0.5, 0])
    phi = np.array([1, 1j], dtype=complex)
    np.testing.assert_allclose(apply_endo(sigma(phi), phi), [1, 1j])
    np.testing.assert_allclose(apply_endo(np.zeros((2, 2)), phi), [0, 0])


def test_sigma_is_traceless_and_hermitian(rng):
    s = sigma(_spinors(rng))
    np.testing.assert_allclose(s[:, 0, 0] + s[:, 1, 1], 0, atol=1e-13)
    np.testing.assert_allclose(s, np.conj(np.swapaxes(s, -1, -2)), atol=1e-13)


def test_sigma_norm_identity(rng):
    phi = _spinors(rng)
    np.testing.assert_allclose(0.5 * endo_norm_sq(sigma(phi)), norm_sq(phi) ** 2 / 4, rtol=1e-12)


def test_sigma_eigenvector(rng):
    phi = _spinors(rng)
    np.testing.assert_allclose(apply_endo(sigma(phi), phi), 0.5 * norm_sq(phi)[:, None] * phi, rtol=1e-12)


def test_sigma_quadratic_and_phase_invariant(rng):
    phi = _spinors(rng, 50)
    lam = rng.normal(size=50) + 1j * rng.normal(size=50)
    unit = np.exp(1j * rng.uniform(0, 2 * np.pi, size=50))
    np.testing.assert_allclose(sigma(lam[:, None] * phi), (np.abs(lam) ** 2)[:, None, None] * sigma(phi), atol=1e-11)
    np.testing.assert_allclose(sigma(unit[:, None] * phi), sigma(phi), atol=1e-12)


def test_clifford_zero_and_hermitian(rng):
    np.testing.assert_array_equal(clifford_sd(np.zeros(3)), np.zeros((2, 2)))
    rho = clifford_sd(rng.normal(size=(20, 3)))
    np.testing.assert_allclose(rho, np.conj(np.swapaxes(rho, -1, -2)), atol=1e-15)
    np.testing.assert_allclose(np.trace(rho, axis1=-2, axis2=-1), 0, atol=1e-15)


def test_clifford_pairing_fixes_normalization():
    omega = np.array([1.0, 0.0, 0.0])
    phi = np.array([1, 0], dtype=complex)
    lhs = spinor_inner(apply_endo(clifford_sd(omega), phi), phi)
    rhs = 2 * np.dot(omega, sigma_triple(phi))
    assert lhs == pytest.approx(rhs)
    assert lhs == pytest.approx(C_RHO)


def test_pairing_identity_random(rng):
    phi = _spinors(rng)
    omega = rng.normal(size=(len(phi), 3))
    lhs = np.sum(omega * sigma_triple(phi), axis=-1)
    rhs = 0.5 * spinor_inner(apply_endo(clifford_sd(omega), phi), phi)
    np.testing.assert_allclose(rhs.imag, 0, atol=1e-12)
    np.testing.assert_allclose(lhs, rhs.real, rtol=1e-12)


def test_wrong_clifford_scale_breaks_pairing(rng):
    phi = _spinors(rng, 10)
    omega = rng.normal(size=(10, 3))
    lhs = np.sum(omega * sigma_triple(phi), axis=-1)
    rhs = 0.5 * spinor_inner(apply_endo(clifford_sd(omega, c_rho=1.1 * C_RHO), phi), phi)
    assert not np.allclose(lhs, rhs.real, rtol=1e-6)


def test_triple_embedding_is_isometric(rng):
    phi = _spinors(rng)
    triple = sigma_triple(phi)
    np.testing.assert_allclose(np.sum(triple ** 2, axis=-1), endo_norm_sq(sigma(phi)), rtol=1e-12)
    # c_rho^2 = 2, rho(omega)/2 的三元组回到 omega
    endo = clifford_sd(triple) / 2
    np.testing.assert_allclose(endo_to_triple(endo), triple, rtol=1e-12, atol=1e-14)


def test_tau_generators_are_pauli():
    for t in TAU:
        np.testing.assert_allclose(t @ t, np.eye(2))
        assert np.trace(t) == 0
