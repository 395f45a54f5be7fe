"""
恒等式检查模块
逐点代数恒等式、自对偶分解、陈-韦伊、Weitzenböck 加密研究、Hölder、规范不变性与梯度检查

每个检查接收实验配置与独立的随机数生成器, 返回 CheckResult。
"""

import asyncio
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from admissibility import window
from dirac_operator import covariant_derivative, dirac, dirac_adjoint, laplacian, weitzenbock_residual
from gauge_field import (
    Connection,
    alpha_square_from_flux,
    apply_gauge,
    chern_square,
    curvature,
    flux_vector,
    plaquette_fluxes,
    pure_gauge,
    random_gauge,
    reassemble,
    split_sd_asd,
)
from meta import get_check_description
from spinor_algebra import (
    C_RHO,
    apply_endo,
    clifford_sd,
    endo_norm_sq,
    endo_to_triple,
    norm_sq,
    sigma,
    spinor_inner,
)
from states import CheckResult, ExperimentConfig
from sw_functional import (
    ConfigurationPoint,
    analytic_directional,
    directional_derivative,
    el_residual_connection,
    el_residual_spinor,
    energy_value,
    gap_limit,
    gradient,
    sw_first_order,
    topological_gap,
)
from torus_geometry import Geometry, build_geometry, inner_l2, lp_norm, random_smooth_field

# 代数恒等式的相对容差
ALGEBRA_TOL = 1e-12
# 规范不变性与拓扑量的容差
EXACT_TOL = 1e-10
GRADIENT_TOL = 1e-6
ORDER_TARGET = 2.0
ORDER_TOL = 0.3

CheckFn = Callable[[ExperimentConfig, np.random.Generator], CheckResult]


# ============= 公共工具 =============

def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale


def _random_spinors(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))


def _config_geometry(cfg: ExperimentConfig) -> Geometry:
    return build_geometry(cfg.geometry.dims, cfg.geometry.spacing, cfg.geometry.k)


def _random_point(g: Geometry, rng: np.random.Generator, flux, amplitude: float = 0.5) -> ConfigurationPoint:
    phi = random_smooth_field(g, rng, trailing=(2,), amplitude=amplitude, complex_valued=True)
    a = np.stack([random_smooth_field(g, rng, amplitude=amplitude) for _ in range(4)])
    return ConfigurationPoint(A=Connection(flux=tuple(flux), a=a), phi=phi)


def _random_even_flux(rng: np.random.Generator, bound: int = 2) -> Tuple[int, ...]:
    return tuple(int(2 * x) for x in rng.integers(-bound, bound + 1, size=6))


def _result(name: str, passed: bool, measured: Dict[str, float], tolerance: float, detail: str = "") -> CheckResult:
    if not passed:
        logger.warning(f"❌ 检查失败: {name} {measured}")
    return CheckResult(
        name=name,
        passed=bool(passed),
        measured={k: float(v) for k, v in measured.items()},
        tolerance=tolerance,
        detail=detail or get_check_description(name),
    )


# ============= 旋量代数 =============

def check_sigma_traceless(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    phi = _random_spinors(rng, cfg.identities.samples)
    s = sigma(phi)
    trace = np.max(np.abs(s[:, 0, 0] + s[:, 1, 1]))
    herm = np.max(np.abs(s - np.conj(np.swapaxes(s, -1, -2))))
    scale = np.max(norm_sq(phi))
    err = max(trace, herm) / scale
    return _result("sigma_traceless", err <= ALGEBRA_TOL, {"max_rel_error": err}, ALGEBRA_TOL)


def check_sigma_pairing(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    """clifford_scale != 1 时该检查应失败"""
    n = cfg.identities.samples
    phi = _random_spinors(rng, n)
    omega = rng.normal(size=(n, 3))
    lhs = np.sum(omega * endo_to_triple(sigma(phi)), axis=-1)
    rho = clifford_sd(omega, c_rho=C_RHO * cfg.identities.clifford_scale)
    rhs_complex = 0.5 * spinor_inner(apply_endo(rho, phi), phi)
    scale = np.linalg.norm(omega, axis=-1) * norm_sq(phi)
    err = float(np.max(np.abs(lhs - rhs_complex) / scale))
    imag = float(np.max(np.abs(rhs_complex.imag) / scale))
    return _result(
        "sigma_pairing",
        err <= ALGEBRA_TOL and imag <= ALGEBRA_TOL,
        {"max_rel_error": err, "max_imag_part": imag, "clifford_scale": cfg.identities.clifford_scale},
        ALGEBRA_TOL,
    )


def check_sigma_norm(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    phi = _random_spinors(rng, cfg.identities.samples)
    # 配对自身的内积 1/2 tr(E E*)
    lhs = 0.5 * endo_norm_sq(sigma(phi))
    rhs = norm_sq(phi) ** 2 / 4
    err = float(np.max(np.abs(lhs - rhs) / rhs))
    return _result("sigma_norm", err <= ALGEBRA_TOL, {"max_rel_error": err}, ALGEBRA_TOL)


def check_sigma_eigen(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    phi = _random_spinors(rng, cfg.identities.samples)
    lhs = apply_endo(sigma(phi), phi)
    rhs = 0.5 * norm_sq(phi)[:, None] * phi
    err = float(np.max(np.linalg.norm(lhs - rhs, axis=-1) / np.linalg.norm(rhs, axis=-1)))
    return _result("sigma_eigen", err <= ALGEBRA_TOL, {"max_rel_error": err}, ALGEBRA_TOL)


def check_sigma_homogeneity(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    n = cfg.identities.samples
    phi = _random_spinors(rng, n)
    lam = rng.normal(size=n) + 1j * rng.normal(size=n)
    unit = np.exp(1j * rng.uniform(0, 2 * np.pi, size=n))
    base = sigma(phi)
    scale = np.sqrt(endo_norm_sq(base))
    scaled = sigma(lam[:, None] * phi) - (np.abs(lam) ** 2)[:, None, None] * base
    rotated = sigma(unit[:, None] * phi) - base
    err_scaled = float(np.max(np.sqrt(endo_norm_sq(scaled)) / (np.abs(lam) ** 2 * scale)))
    err_rotated = float(np.max(np.sqrt(endo_norm_sq(rotated)) / scale))
    err = max(err_scaled, err_rotated)
    return _result(
        "sigma_homogeneity",
        err <= ALGEBRA_TOL,
        {"scaling_rel_error": err_scaled, "phase_rel_error": err_rotated},
        ALGEBRA_TOL,
    )


# ============= 曲率与拓扑 =============

def check_sd_split(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    F = rng.normal(size=(6, cfg.identities.samples))
    sd, asd = split_sd_asd(F)
    norms = np.sum(sd ** 2, axis=0) + np.sum(asd ** 2, axis=0)
    total = np.sum(F ** 2, axis=0)
    err_norm = float(np.max(np.abs(norms - total) / total))
    err_inverse = float(np.max(np.abs(reassemble(sd, asd) - F)) / np.max(np.abs(F)))
    err = max(err_norm, err_inverse)
    return _result(
        "sd_split", err <= ALGEBRA_TOL, {"norm_rel_error": err_norm, "reassemble_error": err_inverse}, ALGEBRA_TOL
    )


def check_flux_quantization(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    g = _config_geometry(cfg)
    worst = 0.0
    for _ in range(5):
        flux = _random_even_flux(rng)
        a = np.stack([random_smooth_field(g, rng, amplitude=1.0) for _ in range(4)])
        A = Connection(flux=flux, a=a)
        measured = plaquette_fluxes(curvature(A, g), g)
        worst = max(worst, float(np.max(np.abs(measured - flux_vector(A)))))
    return _result("flux_quantization", worst <= EXACT_TOL, {"max_abs_error": worst}, EXACT_TOL)


def check_chern_weil(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    g = _config_geometry(cfg)
    harmonic_err = 0.0
    fluct_err = 0.0
    sd_err = 0.0
    for _ in range(20):
        flux = _random_even_flux(rng)
        alpha_sq = alpha_square_from_flux(flux)
        F0 = curvature(Connection.flat(g, flux), g)
        harmonic_err = max(harmonic_err, abs(chern_square(F0, g) - alpha_sq))
        a = np.stack([random_smooth_field(g, rng, amplitude=1.0) for _ in range(4)])
        F = curvature(Connection(flux=flux, a=a), g)
        fluct_err = max(fluct_err, abs(chern_square(F, g) - alpha_sq))
        sd, asd = split_sd_asd(F)
        difference = lp_norm(np.moveaxis(sd, 0, -1), 2, g) ** 2 - lp_norm(np.moveaxis(asd, 0, -1), 2, g) ** 2
        sd_err = max(sd_err, abs(difference - 4 * math.pi ** 2 * alpha_sq) / (4 * math.pi ** 2))
    worst = max(harmonic_err, fluct_err, sd_err)
    return _result(
        "chern_weil",
        worst <= EXACT_TOL,
        {"harmonic_error": harmonic_err, "fluctuation_error": fluct_err, "sd_asd_error": sd_err},
        EXACT_TOL,
    )


# ============= 几何 =============

def check_holder(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    worst = -np.inf
    for _ in range(cfg.identities.holder_samples):
        dims = tuple(int(n) for n in rng.integers(4, 7, size=4))
        spacing = tuple(float(h) for h in rng.uniform(0.05, 0.5, size=4))
        g = build_geometry(dims, spacing, 0.0)
        f = rng.normal(size=dims) * rng.uniform(0.1, 10.0)
        slack = lp_norm(f, 2, g) - g.volume ** 0.25 * lp_norm(f, 4, g)
        worst = max(worst, slack)
    return _result("holder", worst <= ALGEBRA_TOL, {"max_violation": worst}, ALGEBRA_TOL)


def check_k_minus_branch(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    g = _config_geometry(cfg)
    branch = "negative" if g.k_min < 0 else "nonnegative"
    consistent = (g.k_minus > 0) == (g.k_min < 0)
    return _result(
        "k_minus_branch",
        consistent,
        {"k_min": g.k_min, "k_minus": g.k_minus},
        0.0,
        f"k_min {branch}: k^- = {'sqrt(-k_min)' if branch == 'negative' else '0'}",
    )


# ============= Dirac 算子 =============

def check_dirac_adjoint(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    g = _config_geometry(cfg)
    p = _random_point(g, rng, cfg.sector.flux)
    psi = random_smooth_field(g, rng, trailing=(2,), complex_valued=True)
    lhs = np.sum(np.conj(dirac(p.A, p.phi, g)) * psi) * g.cell_volume
    rhs = np.sum(np.conj(p.phi) * dirac_adjoint(p.A, psi, g)) * g.cell_volume
    adjoint_err = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    lap = inner_l2(laplacian(p.A, p.phi, g), p.phi, g)
    grad_sq = lp_norm(np.moveaxis(covariant_derivative(p.A, p.phi, g), 0, -2), 2, g) ** 2
    lap_err = _rel(lap, grad_sq)
    worst = max(adjoint_err, lap_err)
    return _result(
        "dirac_adjoint", worst <= EXACT_TOL, {"adjoint_rel_error": adjoint_err, "laplacian_rel_error": lap_err}, EXACT_TOL
    )


def check_weitzenbock_flat(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    dims = cfg.geometry.dims
    g = build_geometry(dims, cfg.geometry.spacing, 0.0)
    phi = random_smooth_field(g, rng, trailing=(2,), complex_valued=True)
    flat = weitzenbock_residual(Connection.flat(g), phi, g)
    gauge = pure_gauge(random_gauge(g, rng), g)
    twisted = weitzenbock_residual(gauge, phi, g)
    scale = lp_norm(phi, 2, g) / min(g.spacing) ** 2
    err = max(flat, twisted) / scale
    return _result("weitzenbock_flat", err <= ALGEBRA_TOL, {"flat": flat, "pure_gauge": twisted}, ALGEBRA_TOL)


def _plane_geometry(n: int) -> Geometry:
    # 局部化旋量只依赖前两个方向, 后两个方向取最小网格
    return build_geometry((n, n, 4, 4), (1.0 / n, 1.0 / n, 0.25, 0.25), 0.0)


def _smooth_fluctuation_case(n: int) -> float:
    g = build_geometry((n,) * 4, (1.0 / n,) * 4, 0.0)
    x0, x1, x2, x3 = (g.coordinates(mu) for mu in range(4))
    h = g.spacing[0]
    a = np.empty((4,) + g.dims)
    # 链中点取值
    a[0] = 0.8 * np.sin(2 * np.pi * (x1 + x2) + 0.3) + 0.5 * np.cos(2 * np.pi * (x0 + h / 2))
    a[1] = 0.6 * np.cos(2 * np.pi * (x0 + x1 + h / 2 - x3))
    a[2] = 0.4 * np.sin(2 * np.pi * (x3 - x2 - h / 2))
    a[3] = 0.5 * np.cos(2 * np.pi * (x1 + x3 + h / 2))
    phi = np.stack(
        [
            np.cos(2 * np.pi * x0) + 0.5j * np.sin(2 * np.pi * (x1 + x2)),
            0.3 * np.exp(2j * np.pi * (x0 - x1 + x3)),
        ],
        axis=-1,
    )
    return weitzenbock_residual(Connection(flux=(0,) * 6, a=a), phi, g)


def _flux_bump_case(n: int) -> float:
    g = _plane_geometry(n)
    x0, x1 = g.coordinates(0), g.coordinates(1)
    width = 1.0 / 12
    bump = np.exp(-((x0 - 0.5) ** 2 + (x1 - 0.5) ** 2) / (2 * width ** 2))
    phi = np.stack([bump, 0.5 * bump * (x0 - 0.5) / width], axis=-1).astype(complex)
    return weitzenbock_residual(Connection.flat(g, (2, 0, 0, 0, 0, 0)), phi, g)


def _order_study(name: str, case: Callable[[int], float], grids) -> CheckResult:
    residuals = [case(n) for n in grids]
    orders = [math.log2(residuals[i] / residuals[i + 1]) for i in range(len(residuals) - 1)]
    measured = {f"residual_{n}": r for n, r in zip(grids, residuals)}
    measured.update({f"order_{grids[i]}_{grids[i + 1]}": o for i, o in enumerate(orders)})
    observed = orders[-1]
    return _result(name, abs(observed - ORDER_TARGET) <= ORDER_TOL, measured, ORDER_TOL)


def check_weitzenbock_order(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    return _order_study("weitzenbock_order", _smooth_fluctuation_case, list(cfg.identities.refinement))


def check_weitzenbock_flux_order(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    grids = [3 * n for n in cfg.identities.refinement]
    return _order_study("weitzenbock_flux_order", _flux_bump_case, grids)


# ============= 泛函 =============

def check_gauge_invariance(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    g = _config_geometry(cfg)
    p = _random_point(g, rng, cfg.sector.flux)
    functionals = {
        "sw_first_order": sw_first_order,
        "sw_energy": energy_value,
        "el_spinor": el_residual_spinor,
        "el_connection": el_residual_connection,
    }
    base = {name: fn(p, g) for name, fn in functionals.items()}
    worst = {name: 0.0 for name in functionals}
    for _ in range(cfg.identities.gauge_trials):
        t = random_gauge(g, rng, amplitude=2.0, max_winding=2)
        A, phi = apply_gauge(t, p.A, p.phi, g)
        q = ConfigurationPoint(A=A, phi=phi)
        for name, fn in functionals.items():
            worst[name] = max(worst[name], _rel(fn(q, g), base[name]))
    err = max(worst.values())
    return _result("gauge_invariance", err <= EXACT_TOL, worst, EXACT_TOL)


def check_gradient(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    g = _config_geometry(cfg)
    worst = 0.0
    for _ in range(cfg.identities.gradient_points):
        p = _random_point(g, rng, cfg.sector.flux)
        grad = gradient(p, g)
        g_norm = math.sqrt(inner_l2(grad[0], grad[0], g) + inner_l2(grad[1], grad[1], g))
        for _ in range(10):
            d_phi = random_smooth_field(g, rng, trailing=(2,), complex_valued=True)
            d_a = np.stack([random_smooth_field(g, rng) for _ in range(4)])
            d_norm = math.sqrt(inner_l2(d_phi, d_phi, g) + inner_l2(d_a, d_a, g))
            fd = directional_derivative(p, g, d_phi, d_a)
            an = analytic_directional(grad, d_phi, d_a, g)
            worst = max(worst, abs(fd - an) / (g_norm * d_norm))
    return _result("gradient", worst <= GRADIENT_TOL, {"max_rel_error": worst}, GRADIENT_TOL)


def check_constant_solution(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    g = build_geometry(cfg.geometry.dims, cfg.geometry.spacing, -1.0)
    phi = np.zeros(g.dims + (2,), dtype=complex)
    phi[..., 0] = 1.0
    p = ConfigurationPoint(A=Connection.flat(g), phi=phi)
    residual = el_residual_spinor(p, g)
    g_phi, g_a = gradient(p, g)
    grad = max(float(np.max(np.abs(g_phi))), float(np.max(np.abs(g_a))))
    worst = max(residual, grad)
    return _result("constant_solution", worst <= ALGEBRA_TOL, {"el_residual": residual, "gradient_max": grad}, ALGEBRA_TOL)


def check_topological_gap(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    g = build_geometry(cfg.geometry.dims, cfg.geometry.spacing, 0.0)
    sectors = {"alpha_0": (2, 0, 0, 0, 0, 0), "alpha_8": (2, 0, 0, 0, 0, 2), "alpha_minus_8": (0, 2, 0, 0, 2, 0)}
    measured = {}
    worst = 0.0
    for label, flux in sectors.items():
        target = gap_limit(alpha_square_from_flux(flux))
        for _ in range(5):
            a = np.stack([random_smooth_field(g, rng, amplitude=1.0) for _ in range(4)])
            p = ConfigurationPoint(A=Connection(flux=flux, a=a), phi=np.zeros(g.dims + (2,), dtype=complex))
            err = abs(topological_gap(p, g) - target) / max(abs(target), math.pi ** 2)
            worst = max(worst, err)
        measured[label] = target
    measured["max_rel_error"] = worst
    return _result("topological_gap", worst <= EXACT_TOL, measured, EXACT_TOL)


def check_window_endpoints(cfg: ExperimentConfig, rng: np.random.Generator) -> CheckResult:
    w = window(1.0, 1.0)
    err = max(abs(w.lo + 1 / math.pi ** 2), abs(w.hi - 0.25))
    return _result("window_endpoints", err <= 1e-15, {"lo": w.lo, "hi": w.hi}, 1e-15)


# ============= 注册与运行 =============

CHECK_FUNCTIONS: Dict[str, CheckFn] = {
    "sigma_traceless": check_sigma_traceless,
    "sigma_pairing": check_sigma_pairing,
    "sigma_norm": check_sigma_norm,
    "sigma_eigen": check_sigma_eigen,
    "sigma_homogeneity": check_sigma_homogeneity,
    "sd_split": check_sd_split,
    "flux_quantization": check_flux_quantization,
    "chern_weil": check_chern_weil,
    "holder": check_holder,
    "k_minus_branch": check_k_minus_branch,
    "dirac_adjoint": check_dirac_adjoint,
    "weitzenbock_flat": check_weitzenbock_flat,
    "weitzenbock_order": check_weitzenbock_order,
    "weitzenbock_flux_order": check_weitzenbock_flux_order,
    "gauge_invariance": check_gauge_invariance,
    "gradient": check_gradient,
    "constant_solution": check_constant_solution,
    "topological_gap": check_topological_gap,
    "window_endpoints": check_window_endpoints,
}


def _check_rngs(seed: int, names: List[str]) -> Dict[str, np.random.Generator]:
    # 每个检查一个子生成器, 顺序与并行执行得到相同结果
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(child) for name, child in zip(names, children)}


def run_checks(cfg: ExperimentConfig, names: Optional[List[str]] = None) -> List[CheckResult]:
    """顺序执行检查"""
    names = names or list(CHECK_FUNCTIONS)
    rngs = _check_rngs(cfg.seed, list(CHECK_FUNCTIONS))
    results = []
    for name in names:
        logger.info(f"▶ 检查 {name}")
        results.append(CHECK_FUNCTIONS[name](cfg, rngs[name]))
    return results


async def run_checks_async(cfg: ExperimentConfig, names: Optional[List[str]] = None) -> List[CheckResult]:
    """通过 asyncio.to_thread 并发执行检查, 结果顺序与 names 一致"""
    names = names or list(CHECK_FUNCTIONS)
    rngs = _check_rngs(cfg.seed, list(CHECK_FUNCTIONS))
    tasks = [asyncio.to_thread(CHECK_FUNCTIONS[name], cfg, rngs[name]) for name in names]
    return list(await asyncio.gather(*tasks))
