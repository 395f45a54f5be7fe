"""
规范场模块
行列式线丛上的 U(1) 联络: 曲率、自对偶/反自对偶分解、通量量子化的陈类、alpha^2 与规范变换

数组约定:
    联络涨落 a: 形状 (4,) + dims, a[mu](x) 位于前向链 x -> x+mu
    曲率 F: 形状 (6,) + dims, 分量顺序见 PAIRS
    自对偶三元组场: 形状 (3,) + dims
"""

import math
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator

from states import GridMismatchError
from torus_geometry import Geometry, random_smooth_field

# 坐标平面顺序, 对应通量 n12 n13 n14 n23 n24 n34
PAIRS: Tuple[Tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PAIR_INDEX = {pair: i for i, pair in enumerate(PAIRS)}

SQRT_HALF = 1.0 / math.sqrt(2.0)


# ============= 数据模型 =============

class Connection(BaseModel):
    """调和背景 (通量 2*pi*n) 加周期涨落 a"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    flux: Tuple[int, int, int, int, int, int] = Field(description="偶数通量 n_{mu nu}")
    a: np.ndarray = Field(description="涨落 1-形式, 形状 (4,) + dims")

    @field_validator("flux")
    @classmethod
    def _flux_even(cls, value):
        if any(n % 2 for n in value):
            raise ValueError(f"flux entries must be even, got {value}")
        return value

    @classmethod
    def flat(cls, g: Geometry, flux: Sequence[int] = (0, 0, 0, 0, 0, 0)) -> "Connection":
        return cls(flux=tuple(int(n) for n in flux), a=np.zeros((4,) + g.dims))

    def with_a(self, a: np.ndarray) -> "Connection":
        return Connection(flux=self.flux, a=a)


class GaugeTransform(BaseModel):
    """
    规范变换 e^{i theta}

    theta 只存周期部分; 绕数 w 贡献线性相位 2*pi*w_mu*x_mu/L_mu,
    因此 e^{i theta} 单值, 链上增量精确。
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    theta: np.ndarray = Field(description="周期相位, 形状 dims")
    winding: Tuple[int, int, int, int] = Field(default=(0, 0, 0, 0))

    def full_phase(self) -> np.ndarray:
        """theta + 线性绕数部分 (只在 mod 2pi 意义下有意义)"""
        dims = self.theta.shape
        total = np.array(self.theta, dtype=float)
        for mu, w in enumerate(self.winding):
            if w:
                shape = [1, 1, 1, 1]
                shape[mu] = dims[mu]
                total = total + (2 * np.pi * w * np.arange(dims[mu]) / dims[mu]).reshape(shape)
        return total

    def link_increments(self) -> np.ndarray:
        """theta(x+mu) - theta(x), 形状 (4,) + dims"""
        dims = self.theta.shape
        out = np.empty((4,) + dims)
        for mu in range(4):
            out[mu] = np.roll(self.theta, -1, axis=mu) - self.theta + 2 * np.pi * self.winding[mu] / dims[mu]
        return out


# ============= 差分工具 =============

def central_diff(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    """周期中心差分 (u(x+1) - u(x-1)) / 2h"""
    return (np.roll(u, -1, axis=axis) - np.roll(u, 1, axis=axis)) / (2 * h)


def forward_diff(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(u, -1, axis=axis) - u) / h


def backward_diff(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (u - np.roll(u, 1, axis=axis)) / h


def _check_connection(A: Connection, g: Geometry):
    if A.a.shape != (4,) + g.dims:
        raise GridMismatchError(f"connection shape {A.a.shape} does not match (4,) + {g.dims}")


def flux_vector(A: Connection) -> np.ndarray:
    return np.array(A.flux, dtype=int)


def harmonic_density(flux: Sequence[int], g: Geometry) -> np.ndarray:
    """调和代表元 b_{mu nu} = 2*pi*n_{mu nu} / (L_mu L_nu), 长度 6"""
    lengths = g.lengths
    return np.array([2 * np.pi * n / (lengths[mu] * lengths[nu]) for n, (mu, nu) in zip(flux, PAIRS)])


# ============= 链相位 =============

@lru_cache(maxsize=32)
def _background_phases(dims: tuple, spacing: tuple, flux: tuple) -> np.ndarray:
    lengths = [n * h for n, h in zip(dims, spacing)]
    phases = np.zeros((4,) + dims)
    for n, (mu, nu) in zip(flux, PAIRS):
        if n == 0:
            continue
        b = 2 * np.pi * n / (lengths[mu] * lengths[nu])
        shape_mu = [1, 1, 1, 1]
        shape_mu[mu] = dims[mu]
        x_mu = (np.arange(dims[mu]) * spacing[mu]).reshape(shape_mu)
        phases[nu] = phases[nu] + 0.5 * spacing[nu] * b * x_mu
        # 最后一个 mu 层上的过渡链
        shape_nu = [1, 1, 1, 1]
        shape_nu[nu] = dims[nu]
        x_nu = (np.arange(dims[nu]) * spacing[nu]).reshape(shape_nu)
        slab = [slice(None)] * 4
        slab[mu] = slice(dims[mu] - 1, dims[mu])
        phases[mu][tuple(slab)] = phases[mu][tuple(slab)] - 0.5 * b * lengths[mu] * x_nu
    phases.setflags(write=False)
    logger.debug(f"背景链相位已缓存: dims={dims}, flux={flux}")
    return phases


def link_phases(A: Connection, g: Geometry) -> np.ndarray:
    """
    半荷链相位 p_mu(x) = P_bg,mu(x) + h_mu a_mu(x) / 2

    Args:
        A: 联络
        g: 几何

    Returns:
        形状 (4,) + dims 的实数组
    """
    _check_connection(A, g)
    background = _background_phases(g.dims, g.spacing, tuple(A.flux))
    h = np.array(g.spacing).reshape((4, 1, 1, 1, 1))
    return background + 0.5 * h * A.a


def plaquette_angles(A: Connection, g: Geometry) -> np.ndarray:
    """每个基本方格的半荷相位和, 规约到 (-pi, pi], 形状 (6,) + dims"""
    p = link_phases(A, g)
    out = np.empty((6,) + g.dims)
    for i, (mu, nu) in enumerate(PAIRS):
        loop = p[mu] + np.roll(p[nu], -1, axis=mu) - np.roll(p[mu], -1, axis=nu) - p[nu]
        out[i] = np.angle(np.exp(1j * loop))
    return out


# ============= 曲率 =============

def curvature(A: Connection, g: Geometry) -> np.ndarray:
    """
    曲率 F = b + D_mu abar_nu - D_nu abar_mu

    abar 是相邻两条链的平均, D 是中心差分; 即方格的 clover 平均。
    对周期涨落, 每个坐标平面上的通量精确等于 2*pi*n。

    Args:
        A: 联络
        g: 几何

    Returns:
        F, 形状 (6,) + dims
    """
    _check_connection(A, g)
    b = harmonic_density(A.flux, g)
    abar = np.stack([(A.a[mu] + np.roll(A.a[mu], 1, axis=mu)) / 2 for mu in range(4)])
    F = np.empty((6,) + g.dims)
    for i, (mu, nu) in enumerate(PAIRS):
        F[i] = b[i] + central_diff(abar[nu], mu, g.spacing[mu]) - central_diff(abar[mu], nu, g.spacing[nu])
    return F


def component(F: np.ndarray, mu: int, nu: int) -> np.ndarray:
    """F_{mu nu}, 含反对称性"""
    if mu == nu:
        return np.zeros(F.shape[1:])
    if mu < nu:
        return F[PAIR_INDEX[(mu, nu)]]
    return -F[PAIR_INDEX[(nu, mu)]]


def plaquette_fluxes(F: np.ndarray, g: Geometry) -> np.ndarray:
    """
    每个坐标平面上的通量 / 2pi, 对横向格点取平均

    Returns:
        长度 6, 对合法联络应等于偶数 n
    """
    if F.shape != (6,) + g.dims:
        raise GridMismatchError(f"curvature shape {F.shape} does not match (6,) + {g.dims}")
    lengths = g.lengths
    out = np.empty(6)
    for i, (mu, nu) in enumerate(PAIRS):
        transverse_area = g.volume / (lengths[mu] * lengths[nu])
        out[i] = np.sum(F[i]) * g.cell_volume / transverse_area / (2 * np.pi)
    return out


def co_differential(F: np.ndarray, g: Geometry) -> np.ndarray:
    """
    d*F 在前向链上的值: (d*F)_nu = -M_nu sum_mu D_mu F_{mu nu}

    M_nu 为前向平均 (u(x) + u(x+nu)) / 2, 与 curvature 中的链平均互为伴随。

    Returns:
        形状 (4,) + dims
    """
    out = np.empty((4,) + g.dims)
    for nu in range(4):
        div = sum(central_diff(component(F, mu, nu), mu, g.spacing[mu]) for mu in range(4) if mu != nu)
        out[nu] = -(div + np.roll(div, -1, axis=nu)) / 2
    return out


# ============= 自对偶分解 =============

def split_sd_asd(F: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    F = F+ + F-

    正交归一基 (e12 +- e34)/sqrt2, (e13 -+ e24)/sqrt2, (e14 +- e23)/sqrt2 下的分量。

    Args:
        F: 形状 (6,) + grid

    Returns:
        (F+, F-), 形状均为 (3,) + grid
    """
    F = np.asarray(F, dtype=float)
    f12, f13, f14, f23, f24, f34 = F
    sd = np.stack([(f12 + f34), (f13 - f24), (f14 + f23)]) * SQRT_HALF
    asd = np.stack([(f12 - f34), (f13 + f24), (f14 - f23)]) * SQRT_HALF
    return sd, asd


def reassemble(sd: np.ndarray, asd: np.ndarray) -> np.ndarray:
    """split_sd_asd 的逆"""
    s1, s2, s3 = sd
    d1, d2, d3 = asd
    return np.stack([
        (s1 + d1),
        (s2 + d2),
        (s3 + d3),
        (s3 - d3),
        (d2 - s2),
        (s1 - d1),
    ]) * SQRT_HALF


# ============= 陈类 =============

def chern_square(F: np.ndarray, g: Geometry) -> float:
    """
    (1/4pi^2) * int 2(F12 F34 - F13 F24 + F14 F23)

    Args:
        F: 曲率
        g: 几何

    Returns:
        实数, 对合法联络等于 alpha^2
    """
    if F.shape != (6,) + g.dims:
        raise GridMismatchError(f"curvature shape {F.shape} does not match (6,) + {g.dims}")
    f12, f13, f14, f23, f24, f34 = F
    density = 2 * (f12 * f34 - f13 * f24 + f14 * f23)
    return float(np.sum(density) * g.cell_volume / (4 * np.pi ** 2))


def alpha_square_from_flux(n: Sequence[int]) -> int:
    """alpha^2 = 2(n12 n34 - n13 n24 + n14 n23)"""
    n12, n13, n14, n23, n24, n34 = (int(x) for x in n)
    return 2 * (n12 * n34 - n13 * n24 + n14 * n23)


# ============= 规范变换 =============

def apply_gauge(
    t: GaugeTransform,
    A: Connection,
    phi: np.ndarray,
    g: Geometry,
) -> Tuple[Connection, np.ndarray]:
    """
    phi -> e^{i theta} phi, a -> a + 2 d theta

    Args:
        t: 规范变换
        A: 联络
        phi: 旋量场, 形状 dims + (2,)
        g: 几何

    Returns:
        (变换后的联络, 变换后的旋量场)
    """
    _check_connection(A, g)
    if t.theta.shape != g.dims:
        raise GridMismatchError(f"gauge phase shape {t.theta.shape} does not match {g.dims}")
    if phi.shape != g.dims + (2,):
        raise GridMismatchError(f"spinor shape {phi.shape} does not match {g.dims} + (2,)")
    h = np.array(g.spacing).reshape((4, 1, 1, 1, 1))
    a_new = A.a + 2 * t.link_increments() / h
    phase = np.exp(1j * t.full_phase())
    return A.with_a(a_new), phase[..., None] * phi


def pure_gauge(t: GaugeTransform, g: Geometry, flux: Sequence[int] = (0, 0, 0, 0, 0, 0)) -> Connection:
    """背景加纯规范部分 2 d theta"""
    return apply_gauge(t, Connection.flat(g, flux), np.zeros(g.dims + (2,), dtype=complex), g)[0]


def random_gauge(
    g: Geometry,
    rng: np.random.Generator,
    amplitude: float = 1.0,
    modes: int = 1,
    max_winding: int = 1,
    winding: Optional[Sequence[int]] = None,
) -> GaugeTransform:
    """
    随机规范变换: 光滑周期相位加随机绕数

    Args:
        g: 几何
        rng: 随机数生成器
        amplitude: 相位量级
        modes: 最高波数
        max_winding: 绕数取值 [-max_winding, max_winding]
        winding: 直接指定绕数

    Returns:
        GaugeTransform
    """
    theta = random_smooth_field(g, rng, modes=modes, amplitude=amplitude)
    if winding is None:
        winding = tuple(int(w) for w in rng.integers(-max_winding, max_winding + 1, size=4))
    return GaugeTransform(theta=theta, winding=tuple(int(w) for w in winding))
