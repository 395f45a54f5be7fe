"""
元信息模块
统一管理检查项名称、说明与报告的 schema 版本
"""

from typing import List, Optional


# 报告格式版本, 字段变化时递增
SCHEMA_VERSION = "1.0"

TOOL_NAME = "swtk"


# ============= 检查项注册表 =============

CHECKS = {
    "sigma_traceless": "sigma(phi) 无迹且 Hermite",
    "sigma_pairing": "<omega, sigma(phi)> = 1/2 <rho(omega) phi, phi>",
    "sigma_norm": "<sigma(phi), sigma(phi)> = |phi|^4 / 4",
    "sigma_eigen": "sigma(phi) phi = |phi|^2 / 2 phi",
    "sigma_homogeneity": "sigma(lambda phi) = |lambda|^2 sigma(phi), 单位复数下不变",
    "sd_split": "|F+|^2 + |F-|^2 = |F|^2 且分解可逆",
    "flux_quantization": "每个坐标平面上的通量等于 2 pi n",
    "chern_weil": "chern_square 等于通量公式给出的 alpha^2, ||F+||^2 - ||F-||^2 = 4 pi^2 alpha^2",
    "holder": "||f||_2 <= v^{1/4} ||f||_4",
    "k_minus_branch": "k^- 的分支与 k_min 的符号一致",
    "dirac_adjoint": "<D phi, psi> = <phi, D* psi>, <Delta phi, phi> = ||nabla phi||^2",
    "weitzenbock_flat": "平坦联络上离散 Weitzenböck 缺陷为零",
    "weitzenbock_order": "光滑涨落下 Weitzenböck 缺陷的收敛阶约为 2",
    "weitzenbock_flux_order": "调和通量加局部化旋量时 Weitzenböck 缺陷的收敛阶约为 2",
    "gauge_invariance": "SW00, SW02 与两个 EL 残差在随机规范变换 (含绕数) 下不变",
    "gradient": "解析梯度与中心有限差分一致",
    "constant_solution": "k = -1, phi = (1, 0) 是 EL 方程的精确解",
    "topological_gap": "phi = 0 时 SW00 - SW02 = pi^2 alpha^2",
    "window_endpoints": "v = 1, k^- = 1 时窗口为 [-1/pi^2, 1/4]",
}


# ============= 描述生成 =============

def get_check_description(name: str) -> str:
    """
    获取检查项说明

    Args:
        name: 检查项名称

    Returns:
        说明文本

    Raises:
        KeyError: 如果检查项不存在
    """
    if name not in CHECKS:
        raise KeyError(f"Check '{name}' not found. Available checks: {list(CHECKS.keys())}")
    return CHECKS[name]


def build_checks_description(names: Optional[List[str]] = None) -> str:
    """
    构建检查项列表的描述文本

    Args:
        names: 检查项名称, 默认全部

    Returns:
        每行一个检查项
    """
    names = names if names is not None else list(CHECKS)
    if not names:
        return "检查项:\n暂无检查项"
    return "检查项:\n" + "\n".join(f"- {name}: {get_check_description(name)}" for name in names)
