"""
SW 泛函模块
一阶泛函 SW00 与展开泛函 SW02、Euler-Lagrange 残差、解析梯度以及不等式链
"""

import math
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from dirac_operator import covariant_derivative, dirac, laplacian
from gauge_field import (
    Connection,
    alpha_square_from_flux,
    co_differential,
    curvature,
    link_phases,
    split_sd_asd,
)
from spinor_algebra import norm_sq, sigma_triple
from states import BoundReport, EnergyReport, EnergyTerms, GridMismatchError
from torus_geometry import Geometry, integrate, lp_norm

# 布尔判定使用的相对容差
BOUND_TOL = 1e-9


# ============= 数据模型 =============

class ConfigurationPoint(BaseModel):
    """配置 (A, phi), 两者共享网格"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: Connection
    phi: np.ndarray = Field(description="旋量场, 形状 dims + (2,)")

    def check(self, g: Geometry) -> "ConfigurationPoint":
        if self.phi.shape != g.dims + (2,):
            raise GridMismatchError(f"spinor shape {self.phi.shape} does not match {g.dims} + (2,)")
        if self.A.a.shape != (4,) + g.dims:
            raise GridMismatchError(f"connection shape {self.A.a.shape} does not match (4,) + {g.dims}")
        return self

    def moved(self, d_phi: np.ndarray, d_a: np.ndarray, t: float) -> "ConfigurationPoint":
        """沿切向量 (d_phi, d_a) 走 t"""
        return ConfigurationPoint(A=self.A.with_a(self.A.a + t * d_a), phi=self.phi + t * d_phi)


def _one_form_norm(w: np.ndarray, g: Geometry) -> float:
    return lp_norm(np.moveaxis(w, 0, -1), 2, g)


# ============= 一阶泛函 =============

def first_order_residuals(p: ConfigurationPoint, g: Geometry) -> Dict[str, float]:
    """
    一阶方程两项的 L^2 残差

    Returns:
        {"dirac": ||D+ phi||_2, "curvature": ||F+ - sigma(phi)||_2}
    """
    p.check(g)
    sd, _ = split_sd_asd(curvature(p.A, g))
    defect = np.moveaxis(sd, 0, -1) - sigma_triple(p.phi)
    return {
        "dirac": lp_norm(dirac(p.A, p.phi, g), 2, g),
        "curvature": lp_norm(defect, 2, g),
    }


def sw_first_order(p: ConfigurationPoint, g: Geometry) -> float:
    """
    SW00 = int (1/2 |F+ - sigma(phi)|^2 + |D+ phi|^2)

    注意与常见写法 1/2 int (|F+ - sigma(phi)|^2 + |D+ phi|^2) 不同: 这里 Dirac 项权重为 1 而非 1/2。
    在 c_rho = -sqrt2 的归一化下, 只有权重 1 能使交叉项与 Weitzenböck 曲率项恰好抵消,
    从而 SW00 - SW02 = pi^2 alpha^2 + 1/8 int |phi|^4 (加 O(h^2) 缺陷)。
    取 1/2 时两者之差还含 -1/2 ||D+ phi||^2, 不再只依赖拓扑与 |phi|。
    """
    res = first_order_residuals(p, g)
    return 0.5 * res["curvature"] ** 2 + res["dirac"] ** 2


# ============= 展开泛函 =============

def energy_terms(p: ConfigurationPoint, g: Geometry) -> EnergyTerms:
    p.check(g)
    F = curvature(p.A, g)
    nabla = covariant_derivative(p.A, p.phi, g)
    rho = norm_sq(p.phi)
    return EnergyTerms(
        curvature_quarter=0.25 * integrate(np.sum(F ** 2, axis=0), g),
        grad_sq=integrate(np.sum(np.abs(nabla) ** 2, axis=(0, -1)), g),
        quartic_eighth=0.125 * integrate(rho ** 2, g),
        curvature_coupling=0.25 * integrate(g.k_field * rho, g),
    )


def energy_value(p: ConfigurationPoint, g: Geometry) -> float:
    """SW02 的数值, 流迭代中使用"""
    t = energy_terms(p, g)
    return t.curvature_quarter + t.grad_sq + t.quartic_eighth + t.curvature_coupling


def sw_energy(p: ConfigurationPoint, g: Geometry) -> EnergyReport:
    """
    SW02 = int (1/4 |F|^2 + |nabla phi|^2 + 1/8 |phi|^4 + 1/4 k |phi|^2)

    Args:
        p: 配置
        g: 几何

    Returns:
        EnergyReport, 四项分别给出, 附带 SW00 与差值
    """
    terms = energy_terms(p, g)
    total = terms.curvature_quarter + terms.grad_sq + terms.quartic_eighth + terms.curvature_coupling
    first = sw_first_order(p, g)
    return EnergyReport(sw_first_order=first, sw_energy=total, topological_gap=first - total, terms=terms)


def topological_gap(p: ConfigurationPoint, g: Geometry) -> float:
    """SW00 - SW02, 见 expected_gap"""
    return sw_first_order(p, g) - energy_value(p, g)


def gap_limit(alpha_sq: int) -> float:
    """phi = 0 时的差值 pi^2 alpha^2, 离散情形下精确成立"""
    return math.pi ** 2 * alpha_sq


def expected_gap(p: ConfigurationPoint, g: Geometry, alpha_sq: Optional[int] = None) -> float:
    """
    差值的连续极限 pi^2 alpha^2 + 1/8 int |phi|^4 - 1/4 int k |phi|^2

    sigma 以等距方式嵌入自对偶三元组, |sigma|^2 = |phi|^4 / 2, 比展开式中的四次项多出 1/8 |phi|^4;
    平坦环面上 D*D 不含 k 项。两者之外的差别是 O(h^2) 的 Weitzenböck 缺陷。
    """
    p.check(g)
    if alpha_sq is None:
        alpha_sq = alpha_square_from_flux(p.A.flux)
    rho = norm_sq(p.phi)
    return gap_limit(alpha_sq) + 0.125 * integrate(rho ** 2, g) - 0.25 * integrate(g.k_field * rho, g)


# ============= 梯度 =============

def current(p: ConfigurationPoint, g: Geometry) -> np.ndarray:
    """
    ||nabla phi||^2 对 a 的 L^2 梯度的两倍

    J_mu(x) = Im sum [conj(nabla_mu phi(x)) e^{-ip} phi(x+mu) + conj(nabla_mu phi(x+mu)) e^{ip} phi(x)]

    Returns:
        形状 (4,) + dims
    """
    p.check(g)
    phases = link_phases(p.A, g)
    nabla = covariant_derivative(p.A, p.phi, g)
    out = np.empty((4,) + g.dims)
    for mu in range(4):
        U = np.exp(-1j * phases[mu])[..., None]
        t1 = np.conj(nabla[mu]) * U * np.roll(p.phi, -1, axis=mu)
        t2 = np.conj(np.roll(nabla[mu], -1, axis=mu)) * np.conj(U) * p.phi
        out[mu] = np.imag(np.sum(t1 + t2, axis=-1))
    return out


def gradient(p: ConfigurationPoint, g: Geometry) -> Tuple[np.ndarray, np.ndarray]:
    """
    SW02 的解析一阶变分

    方向导数 = Re sum conj(g_phi) d_phi dv + sum g_a d_a dv

    Args:
        p: 配置
        g: 几何

    Returns:
        (g_phi, g_a), 形状分别为 dims + (2,) 与 (4,) + dims
    """
    p.check(g)
    rho = norm_sq(p.phi)[..., None]
    k = g.k_field[..., None]
    g_phi = 2 * laplacian(p.A, p.phi, g) + 0.5 * rho * p.phi + 0.5 * k * p.phi
    g_a = 0.5 * co_differential(curvature(p.A, g), g) + 0.5 * current(p, g)
    return g_phi, g_a


def gradient_norm(grad: Tuple[np.ndarray, np.ndarray], g: Geometry) -> float:
    g_phi, g_a = grad
    return math.sqrt(lp_norm(g_phi, 2, g) ** 2 + _one_form_norm(g_a, g) ** 2)


def directional_derivative(
    p: ConfigurationPoint,
    g: Geometry,
    d_phi: np.ndarray,
    d_a: np.ndarray,
    eps: float = 1e-5,
) -> float:
    """SW02 沿 (d_phi, d_a) 的中心有限差分"""
    plus = energy_value(p.moved(d_phi, d_a, eps), g)
    minus = energy_value(p.moved(d_phi, d_a, -eps), g)
    return (plus - minus) / (2 * eps)


def analytic_directional(grad: Tuple[np.ndarray, np.ndarray], d_phi: np.ndarray, d_a: np.ndarray, g: Geometry) -> float:
    g_phi, g_a = grad
    return float((np.real(np.sum(np.conj(g_phi) * d_phi)) + np.sum(g_a * d_a)) * g.cell_volume)


# ============= Euler-Lagrange 残差 =============

def el_residual_spinor(p: ConfigurationPoint, g: Geometry) -> float:
    """|| Delta phi + |phi|^2/4 phi + k/4 phi ||_2"""
    p.check(g)
    rho = norm_sq(p.phi)[..., None]
    residual = laplacian(p.A, p.phi, g) + 0.25 * rho * p.phi + 0.25 * g.k_field[..., None] * p.phi
    return lp_norm(residual, 2, g)


def el_residual_connection(p: ConfigurationPoint, g: Geometry) -> float:
    """|| d*F + J ||_2, J 为 ||nabla phi||^2 的联络梯度 (两倍)"""
    p.check(g)
    residual = co_differential(curvature(p.A, g), g) + current(p, g)
    return _one_form_norm(residual, g)


# ============= 不等式链 =============

def quadratic_bound(volume: float, k_minus: float, sw: float, x: float) -> Dict[str, Optional[float]]:
    """
    二次不等式 f(x) = x^2 - 8 v k^2 x - 8 v SW

    Args:
        volume: v_X
        k_minus: k^-
        sw: 泛函值
        x: 通常取 ||phi||_2^2

    Returns:
        f 的值、判别式、两个根 (判别式为负时为 None)、以及 SW >= -2 v k^4 是否成立
    """
    k2 = k_minus ** 2
    value = x ** 2 - 8 * volume * k2 * x - 8 * volume * sw
    disc = 32 * volume * (2 * volume * k2 ** 2 + sw)
    if disc >= 0:
        half = math.sqrt(disc) / 2
        roots = (4 * volume * k2 - half, 4 * volume * k2 + half)
    else:
        roots = (None, None)
    floor = -2 * volume * k2 ** 2
    return {
        "value": value,
        "discriminant": disc,
        "root_low": roots[0],
        "root_high": roots[1],
        "floor": floor,
        "floor_holds": sw >= floor - BOUND_TOL * max(1.0, abs(floor)),
    }


def bound_suite(p: ConfigurationPoint, g: Geometry, alpha_sq: Optional[int] = None) -> BoundReport:
    """
    在给定配置上求值全部界

    只报告, 不断言: 上确界界与二次不等式只对解成立。

    Args:
        p: 配置
        g: 几何
        alpha_sq: alpha^2, 缺省由通量计算

    Returns:
        BoundReport
    """
    p.check(g)
    if alpha_sq is None:
        alpha_sq = alpha_square_from_flux(p.A.flux)
    v = g.volume
    k_minus = g.k_minus
    sup = lp_norm(p.phi, np.inf, g)
    l2 = lp_norm(p.phi, 2, g)
    l4 = lp_norm(p.phi, 4, g)
    sw = energy_value(p, g)
    quad = quadratic_bound(v, k_minus, sw, l2 ** 2)
    # 1/4 ||F||^2 >= 1/4 (||F-||^2 - ||F+||^2 的绝对值) = pi^2 |alpha^2|, 其余项逐点 >= -k^4/8
    topological = math.pi ** 2 * abs(alpha_sq) - 0.125 * v * k_minus ** 4
    floor = quad["floor"]
    lower = max(topological, floor)
    return BoundReport(
        sup_norm=sup,
        k_minus=k_minus,
        sup_bound_holds=sup <= k_minus + BOUND_TOL * max(1.0, k_minus),
        l2_norm=l2,
        l4_norm=l4,
        holder_slack=v ** 0.25 * l4 - l2,
        quadratic_value=quad["value"],
        discriminant=quad["discriminant"],
        root_low=quad["root_low"],
        root_high=quad["root_high"],
        sw_energy=sw,
        topological_floor=topological,
        curvature_floor=floor,
        lower_bound=lower,
        lower_bound_holds=sw >= lower - BOUND_TOL * max(1.0, abs(lower)),
    )
