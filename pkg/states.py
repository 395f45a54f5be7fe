"""
状态定义模块
定义实验配置、各类报告与异常
"""

import math
from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator


# ============= 异常定义 =============

class GeometryError(ValueError):
    """网格维数或步长不合法"""


class GridMismatchError(ValueError):
    """场与网格尺寸不一致"""


class UnsupportedNormError(ValueError):
    """不支持的 L^p 指数"""


class DimensionMismatchError(ValueError):
    """类向量长度与交叉形式秩不一致"""


class NotCharacteristicError(ValueError):
    """Spin^c 类不是特征向量"""


class NotUnimodularError(ValueError):
    """矩阵不对称或 |det| != 1"""


class UnknownFormError(KeyError):
    """未知的标准交叉形式名称"""


class EnumerationBudgetError(RuntimeError):
    """枚举规模超出预算"""


class UnconvergedError(RuntimeError):
    """对未收敛的流结果做分类"""


class StepUnderflowError(RuntimeError):
    """回溯线搜索步长下溢"""


class WindowViolationError(RuntimeError):
    """单极子分类落在 alpha^2 容许窗口之外"""


class ConfigError(ValueError):
    """实验配置不合法, 消息逐行给出 section.field: 原因"""


# ============= 枚举 =============

class Classification(str, Enum):
    """流终点的分类"""
    MONOPOLE = "MONOPOLE"
    PHI_VANISHES = "PHI_VANISHES"
    REDUCIBLE_MIN = "REDUCIBLE_MIN"
    NOT_CONVERGED = "NOT_CONVERGED"


class FlowStatus(str, Enum):
    """梯度流停止原因"""
    CONVERGED = "CONVERGED"
    MAX_ITERS = "MAX_ITERS"
    STEP_UNDERFLOW = "STEP_UNDERFLOW"


# ============= 配置模型 =============

class KSpec(BaseModel):
    """数量曲率权函数 k_g 的描述"""
    kind: Literal["constant", "bump"] = Field(default="constant", description="常数或光滑凹陷")
    value: float = Field(default=0.0, description="常数值, bump 时为背景值")
    center: Optional[List[float]] = Field(default=None, description="bump 中心 (长度单位)")
    radius: float = Field(default=0.25, gt=0, description="bump 半径")
    depth: float = Field(default=1.0, description="bump 深度, k = value - depth * bump")


class GeometryConfig(BaseModel):
    """几何配置"""
    dims: Tuple[int, int, int, int] = Field(default=(8, 8, 8, 8), description="每个方向格点数")
    spacing: Tuple[float, float, float, float] = Field(
        default=(0.125, 0.125, 0.125, 0.125), description="每个方向格距"
    )
    k: KSpec = Field(default_factory=KSpec, description="数量曲率权函数")

    @field_validator("dims")
    @classmethod
    def _dims_at_least_four(cls, value):
        if any(n < 4 for n in value):
            raise ValueError("every axis needs at least 4 sites")
        return value

    @field_validator("spacing")
    @classmethod
    def _spacing_positive(cls, value):
        if any(h <= 0 for h in value):
            raise ValueError("spacing must be positive")
        return value


class SectorConfig(BaseModel):
    """通量扇区, 顺序为 12 13 14 23 24 34"""
    flux: Tuple[int, int, int, int, int, int] = Field(default=(0, 0, 0, 0, 0, 0))

    @field_validator("flux")
    @classmethod
    def _flux_even(cls, value):
        if any(n % 2 for n in value):
            raise ValueError("flux entries must be even integers (w2(T^4) = 0)")
        return value


class FlowOptions(BaseModel):
    """梯度流求解参数"""
    max_iters: int = Field(default=2000, ge=0)
    step_rule: Literal["fixed", "backtracking"] = Field(default="backtracking")
    eta: float = Field(default=2e-3, gt=0, description="初始/固定步长")
    armijo_c: float = Field(default=1e-4, gt=0, lt=1)
    shrink: float = Field(default=0.5, gt=0, lt=1)
    min_step: float = Field(default=1e-12, gt=0)
    grad_tol: float = Field(
        default=1e-6,
        gt=0,
        description="回溯模式下能量的舍入误差决定可分辨的下限, 约 sqrt(eps |E| / (64 eta)); 更小的值以 STEP_UNDERFLOW 结束",
    )
    gauge_fix: bool = Field(default=True)
    eps_mono: Optional[float] = Field(default=None, gt=0, description="缺省为 1e-4*sqrt(v)")
    eps_phi: float = Field(default=1e-4, gt=0)

    def mono_threshold(self, volume: float) -> float:
        return self.eps_mono if self.eps_mono is not None else 1e-4 * math.sqrt(volume)


class FlowConfig(FlowOptions):
    """梯度流配置: 求解参数加初值与多起点"""
    init: Literal["random", "constant", "zero"] = Field(default="random")
    init_amplitude: float = Field(default=0.5, ge=0)
    init_modes: int = Field(default=1, ge=0, description="随机光滑初值的最高波数")
    constant_phi: Tuple[float, float] = Field(default=(1.0, 0.0))
    starts: int = Field(default=1, ge=1, description="带种子的多起点次数")


class ScreenConfig(BaseModel):
    """可容许性筛选参数"""
    form: str = Field(default="torus", description="例如 'hyperbolic:1' 或 'hyperbolic:3 e8 -e8'")
    coeff_bound: int = Field(default=2, ge=0)
    budget: int = Field(default=2_000_000, gt=0)
    volume: Optional[float] = Field(default=None, gt=0)
    k_minus: Optional[float] = Field(default=None, ge=0)

    @field_validator("form", mode="before")
    @classmethod
    def _join_tokens(cls, value):
        if isinstance(value, list):
            return " ".join(value)
        return value

    @field_validator("form")
    @classmethod
    def _form_parses(cls, value):
        # 延迟导入, admissibility 依赖本模块的异常
        from admissibility import parse_form_spec

        try:
            parse_form_spec(value)
        except (UnknownFormError, NotUnimodularError, ValueError) as exc:
            raise ValueError(exc.args[0] if exc.args else str(exc)) from exc
        return value


class IdentitiesConfig(BaseModel):
    """恒等式检查参数"""
    samples: int = Field(default=1000, gt=0)
    holder_samples: int = Field(default=500, gt=0)
    gauge_trials: int = Field(default=50, gt=0)
    gradient_points: int = Field(default=10, gt=0, description="每个点取 10 个方向")
    refinement: Tuple[int, int, int] = Field(default=(8, 16, 32))
    clifford_scale: float = Field(default=1.0, description="故障注入钩子, 正常为 1")


class OutputConfig(BaseModel):
    """输出配置"""
    dir: str = Field(default="out")
    prefix: str = Field(default="swtk")


class ExperimentConfig(BaseModel):
    """完整实验配置"""
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    sector: SectorConfig = Field(default_factory=SectorConfig)
    flow: FlowConfig = Field(default_factory=FlowConfig)
    screen: ScreenConfig = Field(default_factory=ScreenConfig)
    identities: IdentitiesConfig = Field(default_factory=IdentitiesConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: int = Field(default=0)
    parallel: bool = Field(default=False)


# ============= 报告模型 =============

class EnergyTerms(BaseModel):
    """展开泛函的四项"""
    curvature_quarter: float
    grad_sq: float
    quartic_eighth: float
    curvature_coupling: float


class EnergyReport(BaseModel):
    """一阶泛函与展开泛函的取值"""
    sw_first_order: float
    sw_energy: float
    topological_gap: float
    terms: EnergyTerms


class BoundReport(BaseModel):
    """不等式链的取值"""
    sup_norm: float = Field(description="||phi||_inf")
    k_minus: float
    sup_bound_holds: bool
    l2_norm: float
    l4_norm: float
    holder_slack: float = Field(description="v^{1/4}||phi||_4 - ||phi||_2")
    quadratic_value: float = Field(description="f(||phi||_2^2)")
    discriminant: float
    root_low: Optional[float] = None
    root_high: Optional[float] = None
    sw_energy: float
    topological_floor: float
    curvature_floor: float = Field(description="-2 v (k^-)^4")
    lower_bound: float
    lower_bound_holds: bool


class CheckResult(BaseModel):
    """单项检查结果"""
    name: str
    passed: bool
    measured: Dict[str, float] = Field(default_factory=dict)
    tolerance: Optional[float] = None
    detail: str = ""
