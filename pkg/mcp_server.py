"""
MCP 服务器模块 (FastMCP 实现)
提供工具能力: alpha_square, admissibility_window, check_class, enumerate_classes, list_checks

只暴露代数部分, 格点上的梯度流走命令行。
"""

from typing import Any, Dict, List

from fastmcp import FastMCP

from admissibility import (
    admissible_values,
    enumerate_admissible,
    is_characteristic,
    parse_form_spec,
    q_value,
    window,
)
from gauge_field import alpha_square_from_flux
from meta import CHECKS
from states import DimensionMismatchError, EnumerationBudgetError, NotUnimodularError, UnknownFormError

# 创建 FastMCP 服务器实例
mcp = FastMCP("swtk-tools")

# 工具调用允许的最大枚举规模, 比命令行默认值小
TOOL_BUDGET = 200_000


# ============= 工具定义 =============

@mcp.tool()
def alpha_square(flux: List[int]) -> int:
    """
    由 4-环面上六个平面的通量整数计算 alpha^2

    Args:
        flux: 顺序为 12 13 14 23 24 34 的偶数通量

    Returns:
        2 (n12 n34 - n13 n24 + n14 n23)
    """
    return alpha_square_from_flux(flux)


@mcp.tool()
def admissibility_window(volume: float, k_minus: float) -> Dict[str, float]:
    """
    计算单极子存在所需的 alpha^2 窗口

    Args:
        volume: 流形体积
        k_minus: 数量曲率负部的上确界

    Returns:
        {"lo": ..., "hi": ...}
    """
    win = window(volume, k_minus)
    return {"lo": win.lo, "hi": win.hi}


@mcp.tool()
def check_class(form: str, alpha: List[int], volume: float, k_minus: float) -> Dict[str, Any]:
    """
    检查单个 Spin^c 类

    Args:
        form: 交叉形式描述, 例如 "hyperbolic:1" 或 "hyperbolic:3 e8 -e8"
        alpha: 类在该形式基下的坐标
        volume: 体积
        k_minus: k^-

    Returns:
        characteristic / alpha_sq / admissible / margin; 输入不合法时返回 error
    """
    try:
        Q = parse_form_spec(form)
        value = q_value(Q, alpha)
        characteristic = is_characteristic(Q, alpha)
        win = window(volume, k_minus)
    except (UnknownFormError, NotUnimodularError, DimensionMismatchError, ValueError) as e:
        return {"error": f"输入不合法: {str(e)}"}
    return {
        "characteristic": characteristic,
        "alpha_sq": value,
        "admissible": characteristic and win.contains(value),
        "margin": win.margin(value),
    }


@mcp.tool()
def enumerate_classes(form: str, coeff_bound: int, volume: float, k_minus: float) -> Dict[str, Any]:
    """
    在系数盒子内枚举可容许特征向量

    Args:
        form: 交叉形式描述
        coeff_bound: 坐标绝对值上界
        volume: 体积
        k_minus: k^-

    Returns:
        包含 count, classes, admissible_values 的字典; 超出预算时返回 error
    """
    try:
        Q = parse_form_spec(form)
        classes = enumerate_admissible(Q, coeff_bound, volume, k_minus, budget=TOOL_BUDGET)
    except EnumerationBudgetError as e:
        return {"error": f"枚举超出预算: {str(e)}", "classes": []}
    except (UnknownFormError, NotUnimodularError, ValueError) as e:
        return {"error": f"输入不合法: {str(e)}", "classes": []}
    return {
        "count": len(classes),
        "classes": [list(c) for c in classes],
        "admissible_values": admissible_values(Q, classes),
    }


@mcp.tool()
def list_checks() -> Dict[str, str]:
    """
    列出恒等式检查项及说明

    Returns:
        检查项名称到说明的映射
    """
    return dict(CHECKS)


# ============= 服务器启动 =============

if __name__ == "__main__":
    # 运行 MCP 服务器
    mcp.run()
