"""
旋量代数模块
正手征旋量的逐点代数: Hermite 内积、二次映射 sigma、自对偶 2-形式的 Clifford 作用

所有函数都对前导轴向量化, 旋量分量位于最后一轴 (长度 2),
自对偶三元组位于最后一轴 (长度 3), 2x2 矩阵位于最后两轴。
"""

import numpy as np

# ============= 常量 =============

# 无迹 Hermite 生成元 tau_1, tau_2, tau_3, 分别对应自对偶基
# (e12+e34)/sqrt2, (e13+e42)/sqrt2, (e14+e23)/sqrt2
TAU = np.array(
    [
        [[1, 0], [0, -1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
    ],
    dtype=complex,
)

# Clifford 归一化常数。gamma 约定 (I, i*sigma3, i*sigma1, i*sigma2) 下
# D*D - nabla*nabla 的曲率项为 -(1/sqrt2) sum s_k tau_k = rho(F+/2),
# 因而 c_rho = -sqrt2; 同时 c_rho^2 = 2 使 endo_to_triple 成为等距。
C_RHO = -np.sqrt(2.0)


# ============= 内积 =============

def spinor_inner(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """逐点 Hermite 内积 <u, v> = sum u_i conj(v_i), 对第二个参数共轭线性"""
    return np.sum(u * np.conj(v), axis=-1)


def norm_sq(phi: np.ndarray) -> np.ndarray:
    """|phi|^2 = |c1|^2 + |c2|^2"""
    return np.sum(np.abs(phi) ** 2, axis=-1)


def endo_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """矩阵的 Frobenius 内积 tr(a b^*)"""
    return np.sum(a * np.conj(b), axis=(-2, -1))


# ============= 二次映射 =============

def sigma(phi: np.ndarray) -> np.ndarray:
    """
    二次映射 sigma(phi) = phi (x) phi^* - |phi|^2/2 I

    Args:
        phi: 旋量, 形状 (..., 2)

    Returns:
        无迹 Hermite 矩阵, 形状 (..., 2, 2)
    """
    phi = np.asarray(phi, dtype=complex)
    c1 = phi[..., 0]
    c2 = phi[..., 1]
    a1 = np.abs(c1) ** 2
    a2 = np.abs(c2) ** 2
    out = np.empty(phi.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = (a1 - a2) / 2
    out[..., 0, 1] = c1 * np.conj(c2)
    out[..., 1, 0] = c2 * np.conj(c1)
    out[..., 1, 1] = (a2 - a1) / 2
    return out


def endo_norm_sq(endo: np.ndarray) -> np.ndarray:
    """矩阵各元素模平方之和"""
    return endo_inner(endo, endo).real


def apply_endo(endo: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """矩阵-向量乘法, 逐点"""
    return np.einsum("...ij,...j->...i", endo, phi)


# ============= Clifford 作用 =============

def clifford_sd(omega: np.ndarray, c_rho: float = C_RHO) -> np.ndarray:
    """
    自对偶 2-形式在 S+ 上的 Clifford 作用 rho(omega) = c_rho * sum s_k tau_k

    Args:
        omega: 自对偶三元组, 形状 (..., 3)
        c_rho: 归一化常数, 仅供故障注入时覆盖

    Returns:
        无迹 Hermite 矩阵, 形状 (..., 2, 2)
    """
    omega = np.asarray(omega, dtype=float)
    return c_rho * np.einsum("...k,kij->...ij", omega, TAU)


def endo_to_triple(endo: np.ndarray) -> np.ndarray:
    """
    无迹 Hermite 矩阵在自对偶三元组空间中的 Riesz 代表元

    配对 <omega, E> = 1/2 Re tr(rho(omega) E) 对应的向量是
    c_rho * (1/2 Re tr(tau_k E))_k, 且其欧氏范数等于 E 的 Frobenius 范数。

    Args:
        endo: 形状 (..., 2, 2)

    Returns:
        三元组, 形状 (..., 3)
    """
    # tr(tau_k E) = sum_ij tau_k[i, j] E[j, i]
    traces = np.einsum("kij,...ji->...k", TAU, endo)
    return C_RHO * 0.5 * traces.real


def sigma_triple(phi: np.ndarray) -> np.ndarray:
    """sigma(phi) 嵌入自对偶三元组空间"""
    return endo_to_triple(sigma(phi))
