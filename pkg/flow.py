"""
梯度流模块
在固定通量扇区内对 SW 泛函做梯度下降, 可选 Coulomb 规范固定, 并对终点分类
"""

import math
from typing import List, Optional, Sequence

import numpy as np
import scipy.fft
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from admissibility import window
from gauge_field import Connection, GaugeTransform, alpha_square_from_flux, apply_gauge, backward_diff, forward_diff
from states import (
    BoundReport,
    Classification,
    FlowConfig,
    FlowOptions,
    FlowStatus,
    StepUnderflowError,
    UnconvergedError,
    WindowViolationError,
)
from sw_functional import (
    ConfigurationPoint,
    bound_suite,
    energy_value,
    first_order_residuals,
    gradient,
    gradient_norm,
)
from torus_geometry import Geometry, lp_norm, random_smooth_field

ENERGY_EPS = float(np.finfo(float).eps)


# ============= 数据模型 =============

class FlowResult(BaseModel):
    """一次梯度流的结果"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    point: ConfigurationPoint
    energy_trace: List[float] = Field(default_factory=list)
    grad_norm: float
    iterations: int
    status: FlowStatus
    classification: Classification = Classification.NOT_CONVERGED
    bounds: Optional[BoundReport] = None
    residuals: dict = Field(default_factory=dict)
    window_consistent: Optional[bool] = None

    @property
    def converged(self) -> bool:
        return self.status == FlowStatus.CONVERGED

    def summary(self) -> dict:
        """不含场数组的 JSON 友好摘要"""
        return {
            "status": self.status,
            "classification": self.classification,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "initial_energy": self.energy_trace[0] if self.energy_trace else None,
            "final_energy": self.energy_trace[-1] if self.energy_trace else None,
            "residuals": self.residuals,
            "bounds": self.bounds,
            "window_consistent": self.window_consistent,
        }


# ============= Coulomb 规范 =============

def coulomb_gauge_phase(a: np.ndarray, g: Geometry) -> np.ndarray:
    """
    求解 Delta chi = d*a, 其中 d*a = -sum D^-_mu a_mu, Delta = -sum D^- D^+

    周期 Poisson 方程在 Fourier 空间对角化, 零模取 0。

    Args:
        a: 1-形式, 形状 (4,) + dims
        g: 几何

    Returns:
        chi, 形状 dims
    """
    div = -sum(backward_diff(a[mu], mu, g.spacing[mu]) for mu in range(4))
    symbol = np.zeros(g.dims)
    for mu in range(4):
        shape = [1, 1, 1, 1]
        shape[mu] = g.dims[mu]
        k = np.arange(g.dims[mu])
        eig = (4 / g.spacing[mu] ** 2) * np.sin(np.pi * k / g.dims[mu]) ** 2
        symbol = symbol + eig.reshape(shape)
    rhs = scipy.fft.fftn(div)
    symbol[0, 0, 0, 0] = 1.0
    chi_hat = rhs / symbol
    chi_hat[0, 0, 0, 0] = 0.0
    return np.real(scipy.fft.ifftn(chi_hat))


def coulomb_project(a: np.ndarray, g: Geometry) -> np.ndarray:
    """去掉 a 的恰当部分: a - D^+ chi, 结果满足 d*a = 0"""
    chi = coulomb_gauge_phase(a, g)
    return np.stack([a[mu] - forward_diff(chi, mu, g.spacing[mu]) for mu in range(4)])


def _gauge_fix(p: ConfigurationPoint, g: Geometry) -> ConfigurationPoint:
    # a -> a - D^+ chi 对应 theta = -chi/2
    chi = coulomb_gauge_phase(p.A.a, g)
    A, phi = apply_gauge(GaugeTransform(theta=-0.5 * chi), p.A, p.phi, g)
    return ConfigurationPoint(A=A, phi=phi)


# ============= 初值 =============

def random_start(
    g: Geometry,
    rng: np.random.Generator,
    flux: Sequence[int] = (0, 0, 0, 0, 0, 0),
    amplitude: float = 0.5,
    modes: int = 1,
) -> ConfigurationPoint:
    """带限随机初值"""
    phi = random_smooth_field(g, rng, trailing=(2,), modes=modes, amplitude=amplitude, complex_valued=True)
    a = np.stack([random_smooth_field(g, rng, modes=modes, amplitude=amplitude) for _ in range(4)])
    return ConfigurationPoint(A=Connection(flux=tuple(flux), a=a), phi=phi)


def constant_start(
    g: Geometry,
    flux: Sequence[int] = (0, 0, 0, 0, 0, 0),
    phi_value: Sequence[complex] = (1.0, 0.0),
) -> ConfigurationPoint:
    """常数旋量加调和联络"""
    phi = np.empty(g.dims + (2,), dtype=complex)
    phi[...] = np.asarray(phi_value, dtype=complex)
    return ConfigurationPoint(A=Connection.flat(g, flux), phi=phi)


def zero_start(g: Geometry, flux: Sequence[int] = (0, 0, 0, 0, 0, 0)) -> ConfigurationPoint:
    return ConfigurationPoint(A=Connection.flat(g, flux), phi=np.zeros(g.dims + (2,), dtype=complex))


# ============= 分类 =============

def classify(
    r: FlowResult,
    g: Geometry,
    alpha_sq: Optional[int] = None,
    eps_mono: Optional[float] = None,
    eps_phi: float = 1e-4,
) -> Classification:
    """
    对已收敛的流终点分类

    Args:
        r: 流结果, 必须已收敛
        g: 几何
        alpha_sq: alpha^2, 缺省由通量计算
        eps_mono: 一阶残差阈值, 缺省 1e-4 * sqrt(v)
        eps_phi: 旋量消失阈值

    Returns:
        MONOPOLE / PHI_VANISHES / REDUCIBLE_MIN

    Raises:
        UnconvergedError: 输入未收敛
        WindowViolationError: 单极子的 alpha^2 不在容许窗口内
    """
    if not r.converged:
        raise UnconvergedError(f"cannot classify a flow that stopped with status {r.status.value}")
    if eps_mono is None:
        eps_mono = 1e-4 * math.sqrt(g.volume)
    phi = r.point.phi
    if lp_norm(phi, np.inf, g) <= eps_phi:
        return Classification.PHI_VANISHES
    res = first_order_residuals(r.point, g)
    if res["dirac"] + res["curvature"] <= eps_mono and lp_norm(phi, 2, g) >= eps_phi:
        if alpha_sq is None:
            alpha_sq = alpha_square_from_flux(r.point.A.flux)
        win = window(g.volume, g.k_minus)
        if not win.contains(alpha_sq):
            raise WindowViolationError(f"MONOPOLE with alpha^2={alpha_sq} outside window [{win.lo}, {win.hi}]")
        return Classification.MONOPOLE
    return Classification.REDUCIBLE_MIN


# ============= 梯度流 =============

def resolution_floor(energy: float, eta: float) -> float:
    """回溯搜索可分辨的最小梯度范数: eta |grad|^2 低于能量舍入误差的 1/64 时无法判定下降"""
    return math.sqrt(ENERGY_EPS * max(1.0, abs(energy)) / (64 * eta))


def _descent_step(p, grad, energy, g, opts: FlowOptions):
    g_phi, g_a = grad
    if opts.step_rule == "fixed":
        cand = p.moved(g_phi, g_a, -opts.eta)
        return cand, energy_value(cand, g)
    gn = gradient_norm(grad, g)
    if gn < resolution_floor(energy, opts.eta):
        raise StepUnderflowError(f"energy stagnated at roundoff: |grad|={gn:.3e} below the resolvable floor")
    gn_sq = gn ** 2
    t = opts.eta
    while t >= opts.min_step:
        cand = p.moved(g_phi, g_a, -t)
        e_cand = energy_value(cand, g)
        if e_cand <= energy - opts.armijo_c * t * gn_sq:
            return cand, e_cand
        t *= opts.shrink
    raise StepUnderflowError(f"backtracking step fell below {opts.min_step}")


def minimize(p0: ConfigurationPoint, g: Geometry, opts: Optional[FlowOptions] = None) -> FlowResult:
    """
    在通量扇区内对 SW02 做梯度下降

    回溯模式下能量单调不增; 达到 grad_tol 即停, 否则在 max_iters 处报告 MAX_ITERS,
    步长下溢与能量在舍入误差处停滞 (梯度低于 resolution_floor) 都报告为 STEP_UNDERFLOW。
    收敛到窗口外的单极子时记录 window_consistent=False, 由调用方判为失败。

    Args:
        p0: 初始配置
        g: 几何
        opts: 参数, 也接受 FlowConfig

    Returns:
        FlowResult, 已收敛时附带分类与界的报告
    """
    opts = opts or FlowOptions()
    p = p0.check(g)
    if opts.gauge_fix:
        p = _gauge_fix(p, g)
    energy = energy_value(p, g)
    trace = [energy]
    status = FlowStatus.MAX_ITERS
    iterations = 0
    logger.info(f"🚀 开始梯度流: flux={p.A.flux}, E0={energy:.6g}, step_rule={opts.step_rule}")

    grad = gradient(p, g)
    gn = gradient_norm(grad, g)
    while True:
        if gn <= opts.grad_tol:
            status = FlowStatus.CONVERGED
            break
        if iterations >= opts.max_iters:
            status = FlowStatus.MAX_ITERS
            break
        try:
            p, energy = _descent_step(p, grad, energy, g, opts)
        except StepUnderflowError as exc:
            logger.warning(f"⚠️ 第 {iterations} 步: {exc}")
            status = FlowStatus.STEP_UNDERFLOW
            break
        if opts.gauge_fix:
            p = _gauge_fix(p, g)
        iterations += 1
        trace.append(energy)
        grad = gradient(p, g)
        gn = gradient_norm(grad, g)
        if iterations % 100 == 0:
            logger.debug(f"iter={iterations} E={energy:.12g} |grad|={gn:.3e}")

    result = FlowResult(
        point=p,
        energy_trace=trace,
        grad_norm=gn,
        iterations=iterations,
        status=status,
        residuals=first_order_residuals(p, g),
        bounds=bound_suite(p, g),
    )
    if result.converged:
        try:
            result.classification = classify(
                result, g, eps_mono=opts.mono_threshold(g.volume), eps_phi=opts.eps_phi
            )
            if result.classification == Classification.MONOPOLE:
                result.window_consistent = True
        except WindowViolationError as exc:
            logger.error(f"❌ {exc}")
            result.classification = Classification.MONOPOLE
            result.window_consistent = False
        logger.info(f"✅ 梯度流收敛: {iterations} 步, E={energy:.12g}, 分类 {result.classification.value}")
    else:
        logger.warning(f"❌ 梯度流未收敛: status={status.value}, |grad|={gn:.3e}")
    return result


def multi_start(
    g: Geometry,
    flux: Sequence[int],
    cfg: FlowConfig,
    seed: int = 0,
) -> List[FlowResult]:
    """
    带种子的多起点

    每个起点使用独立的子生成器, 结果只依赖 seed。

    Args:
        g: 几何
        flux: 通量扇区
        cfg: 流配置
        seed: 随机种子

    Returns:
        每个起点一个 FlowResult
    """
    children = np.random.SeedSequence(seed).spawn(cfg.starts)
    results = []
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        if cfg.init == "random":
            p0 = random_start(g, rng, flux, cfg.init_amplitude, cfg.init_modes)
        elif cfg.init == "constant":
            p0 = constant_start(g, flux, cfg.constant_phi)
        else:
            p0 = zero_start(g, flux)
        logger.info(f"起点 {i + 1}/{cfg.starts}")
        results.append(minimize(p0, g, cfg))
    return results
