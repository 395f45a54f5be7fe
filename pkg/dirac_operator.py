"""
Dirac 算子模块
正旋量场上的协变导数、spin^c Dirac 算子、联络 Laplacian 以及离散 Weitzenböck 残差
"""

import numpy as np

from gauge_field import Connection, curvature, link_phases, split_sd_asd
from spinor_algebra import C_RHO, apply_endo, clifford_sd
from states import GridMismatchError
from torus_geometry import Geometry, lp_norm

# 手征 gamma 矩阵 S+ -> S-: gamma_0 = I, gamma_k = i * sigma
GAMMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[1j, 0], [0, -1j]],
        [[0, 1j], [1j, 0]],
        [[0, 1], [-1, 0]],
    ],
    dtype=complex,
)


def _check_spinor(phi: np.ndarray, g: Geometry):
    if phi.shape != g.dims + (2,):
        raise GridMismatchError(f"spinor shape {phi.shape} does not match {g.dims} + (2,)")


def covariant_derivative(A: Connection, phi: np.ndarray, g: Geometry) -> np.ndarray:
    """
    规范协变中心差分

    nabla_mu phi(x) = [e^{-i p(x)} phi(x+mu) - e^{i p(x-mu)} phi(x-mu)] / 2h_mu

    Args:
        A: 联络
        phi: 旋量场, 形状 dims + (2,)
        g: 几何

    Returns:
        旋量 1-形式, 形状 (4,) + dims + (2,)
    """
    _check_spinor(phi, g)
    p = link_phases(A, g)
    out = np.empty((4,) + phi.shape, dtype=complex)
    for mu in range(4):
        U = np.exp(-1j * p[mu])[..., None]
        fwd = U * np.roll(phi, -1, axis=mu)
        back = np.roll(np.conj(U) * phi, 1, axis=mu)
        out[mu] = (fwd - back) / (2 * g.spacing[mu])
    return out


def dirac(A: Connection, phi: np.ndarray, g: Geometry) -> np.ndarray:
    """D+ phi = sum_mu gamma_mu nabla_mu phi"""
    nabla = covariant_derivative(A, phi, g)
    return np.einsum("mij,m...j->...i", GAMMA, nabla)


def dirac_adjoint(A: Connection, psi: np.ndarray, g: Geometry) -> np.ndarray:
    """D+ 关于离散 L^2 内积的伴随: -sum_mu gamma_mu^* nabla_mu psi"""
    nabla = covariant_derivative(A, psi, g)
    return -np.einsum("mji,m...j->...i", np.conj(GAMMA), nabla)


def laplacian(A: Connection, phi: np.ndarray, g: Geometry) -> np.ndarray:
    """
    联络 Laplacian nabla^* nabla phi

    中心差分满足 nabla^* = -nabla, 所以结果为 -sum_mu nabla_mu nabla_mu phi。
    """
    nabla = covariant_derivative(A, phi, g)
    out = np.zeros_like(phi, dtype=complex)
    for mu in range(4):
        out -= covariant_derivative(A, nabla[mu], g)[mu]
    return out


def curvature_action(A: Connection, phi: np.ndarray, g: Geometry, c_rho: float = C_RHO) -> np.ndarray:
    """rho(F+/2) phi"""
    sd, _ = split_sd_asd(curvature(A, g))
    endo = clifford_sd(np.moveaxis(sd, 0, -1) / 2, c_rho=c_rho)
    return apply_endo(endo, phi)


def weitzenbock_residual(A: Connection, phi: np.ndarray, g: Geometry) -> float:
    """
    离散 Weitzenböck 缺陷的 L^2 范数

    || D*D phi - (nabla^* nabla phi + (k/4) phi + rho(F+/2) phi) ||_2

    Args:
        A: 联络
        phi: 带限旋量场
        g: 几何

    Returns:
        残差
    """
    _check_spinor(phi, g)
    lhs = dirac_adjoint(A, dirac(A, phi, g), g)
    rhs = laplacian(A, phi, g) + 0.25 * g.k_field[..., None] * phi + curvature_action(A, phi, g)
    return lp_norm(lhs - rhs, 2, g)
