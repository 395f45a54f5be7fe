"""
环面几何模块
离散平坦 4-环面: 网格、求积、范数、体积, 以及给定的数量曲率权函数及其导出常数
"""

import math
from typing import Any, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from states import GeometryError, GridMismatchError, KSpec, UnsupportedNormError


# ============= 几何对象 =============

class Geometry(BaseModel):
    """
    平坦 4-环面上的网格

    构造后不可变; v_X, k^m, k^- 由 k_field 导出。
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dims: tuple[int, int, int, int] = Field(description="每个方向格点数")
    spacing: tuple[float, float, float, float] = Field(description="每个方向格距")
    k_field: np.ndarray = Field(description="逐点数量曲率")

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(n * h for n, h in zip(self.dims, self.spacing))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def k_min(self) -> float:
        return float(np.min(self.k_field))

    @property
    def k_minus(self) -> float:
        """k^- = 0 若 k_g >= 0 处处成立, 否则 (-k^m)^{1/2}"""
        k_min = self.k_min
        return 0.0 if k_min >= 0 else math.sqrt(-k_min)

    def coordinates(self, axis: int) -> np.ndarray:
        """第 axis 个坐标 x_axis = i * h, 广播为整张网格"""
        shape = [1, 1, 1, 1]
        shape[axis] = self.dims[axis]
        x = np.arange(self.dims[axis]) * self.spacing[axis]
        return np.broadcast_to(x.reshape(shape), self.dims)

    def summary(self) -> dict:
        return {
            "dims": list(self.dims),
            "spacing": list(self.spacing),
            "volume": self.volume,
            "k_min": self.k_min,
            "k_minus": self.k_minus,
        }


# ============= 构造 =============

def _bump_profile(dims, spacing, spec: KSpec) -> np.ndarray:
    lengths = [n * h for n, h in zip(dims, spacing)]
    center = spec.center if spec.center is not None else [length / 2 for length in lengths]
    if len(center) != 4:
        raise GeometryError("bump center needs 4 coordinates")
    grids = np.meshgrid(*[np.arange(n) * h for n, h in zip(dims, spacing)], indexing="ij")
    r_sq = np.zeros(dims)
    for x, c, length in zip(grids, center, lengths):
        # 周期距离
        d = np.abs(x - c) % length
        d = np.minimum(d, length - d)
        r_sq = r_sq + d ** 2
    rho_sq = r_sq / spec.radius ** 2
    bump = np.zeros(dims)
    inside = rho_sq < 1.0
    bump[inside] = np.exp(1.0 - 1.0 / (1.0 - rho_sq[inside]))
    return spec.value - spec.depth * bump


def build_geometry(
    dims: Sequence[int],
    spacing: Sequence[float],
    k_spec: Union[float, KSpec, dict, np.ndarray] = 0.0,
) -> Geometry:
    """
    构造几何

    Args:
        dims: 4 个正整数, 每个至少为 4
        spacing: 4 个正实数
        k_spec: 常数、KSpec/字典 (constant 或 bump), 或直接给出的逐点数组

    Returns:
        Geometry

    Raises:
        GeometryError: 维数或格距不合法
    """
    dims = tuple(int(n) for n in dims)
    spacing = tuple(float(h) for h in spacing)
    if len(dims) != 4 or len(spacing) != 4:
        raise GeometryError("dims and spacing need exactly 4 entries")
    if any(n <= 0 for n in dims) or any(h <= 0 for h in spacing):
        raise GeometryError(f"non-positive dims/spacing: dims={dims}, spacing={spacing}")
    if any(n < 4 for n in dims):
        raise GeometryError(f"every axis needs at least 4 sites: dims={dims}")

    if isinstance(k_spec, np.ndarray):
        if k_spec.shape != dims:
            raise GridMismatchError(f"k_field shape {k_spec.shape} != dims {dims}")
        k_field = np.array(k_spec, dtype=float)
    else:
        if isinstance(k_spec, (int, float)):
            k_spec = KSpec(kind="constant", value=float(k_spec))
        elif isinstance(k_spec, dict):
            k_spec = KSpec(**k_spec)
        if k_spec.kind == "constant":
            k_field = np.full(dims, k_spec.value, dtype=float)
        else:
            k_field = _bump_profile(dims, spacing, k_spec)

    if not np.all(np.isfinite(k_field)):
        raise GeometryError("k_field must be finite everywhere")
    k_field.setflags(write=False)
    return Geometry(dims=dims, spacing=spacing, k_field=k_field)


# ============= 求积与范数 =============

def check_grid(field: np.ndarray, g: Geometry, trailing: int = 0, leading: int = 0):
    """检查场的网格部分与几何一致"""
    shape = np.shape(field)
    grid = shape[leading:len(shape) - trailing] if trailing else shape[leading:]
    if tuple(grid) != g.dims:
        raise GridMismatchError(f"field grid {tuple(grid)} does not match geometry {g.dims}")


def integrate(f: np.ndarray, g: Geometry) -> float:
    """
    站点求和求积 sum f(x) * cell_volume, 对常数精确

    Args:
        f: 逐点密度, 形状必须等于 dims
        g: 几何

    Returns:
        积分值
    """
    check_grid(f, g)
    return float(np.sum(f) * g.cell_volume)


def pointwise_magnitude(f: np.ndarray, g: Geometry) -> np.ndarray:
    """逐点模; 多余的尾轴 (旋量分量等) 合并"""
    f = np.asarray(f)
    if f.shape == g.dims:
        return np.abs(f)
    check_grid(f, g, trailing=f.ndim - 4)
    axes = tuple(range(4, f.ndim))
    return np.sqrt(np.sum(np.abs(f) ** 2, axis=axes))


def lp_norm(f: np.ndarray, p: Any, g: Geometry) -> float:
    """
    L^p 范数, p 取 2, 4 或 inf

    Args:
        f: 逐点场 (可带尾轴)
        p: 指数
        g: 几何

    Returns:
        (int |f|^p)^{1/p}; p = inf 时为格点最大值

    Raises:
        UnsupportedNormError: 其它指数
    """
    mag = pointwise_magnitude(f, g)
    if p in (np.inf, math.inf, "inf", "infinity"):
        return float(np.max(mag))
    if p == 2:
        return math.sqrt(integrate(mag ** 2, g))
    if p == 4:
        return integrate(mag ** 4, g) ** 0.25
    raise UnsupportedNormError(f"unsupported p={p}; expected 2, 4 or inf")


def inner_l2(u: np.ndarray, v: np.ndarray, g: Geometry) -> float:
    """实 L^2 内积 Re sum conj(u) v * cell_volume, 梯度检验使用"""
    return float(np.real(np.sum(np.conj(u) * v)) * g.cell_volume)


# ============= 随机光滑场 =============

def random_smooth_field(
    g: Geometry,
    rng: np.random.Generator,
    trailing: tuple = (),
    modes: int = 1,
    amplitude: float = 1.0,
    complex_valued: bool = False,
    axes: Sequence[int] = (0, 1, 2, 3),
) -> np.ndarray:
    """
    带限随机场: 波数分量 |m_i| <= modes 的三角多项式

    Args:
        g: 几何
        rng: 随机数生成器
        trailing: 尾轴形状, 例如旋量用 (2,)
        modes: 最高波数
        amplitude: 逐点量级
        complex_valued: 是否复值
        axes: 场依赖的坐标轴, 其它方向为常数

    Returns:
        形状 dims + trailing 的数组
    """
    shape = g.dims + tuple(trailing)
    field = np.zeros(shape, dtype=complex if complex_valued else float)
    ranges = [range(-modes, modes + 1) if ax in axes else range(0, 1) for ax in range(4)]
    count = 0
    for m0 in ranges[0]:
        for m1 in ranges[1]:
            for m2 in ranges[2]:
                for m3 in ranges[3]:
                    phases = sum(
                        2 * np.pi * m * g.coordinates(ax) / g.lengths[ax]
                        for ax, m in enumerate((m0, m1, m2, m3))
                    )
                    coeff = rng.normal(size=trailing) if trailing else rng.normal()
                    if complex_valued:
                        coeff = coeff + 1j * (rng.normal(size=trailing) if trailing else rng.normal())
                        wave = np.exp(1j * phases)
                    else:
                        wave = np.cos(phases + rng.uniform(0, 2 * np.pi))
                    field = field + (wave[..., None] * coeff if trailing else wave * coeff)
                    count += 1
    return amplitude * field / np.sqrt(count)
