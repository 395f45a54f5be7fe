"""
命令行模块
配置驱动的批处理前端: identities / flow / screen 三个子命令, 输出机器可读的报告

退出码: 0 成功, 1 检查失败、配置不合法或单极子违反窗口, 2 梯度流未收敛, 3 枚举超出预算
"""

import argparse
import asyncio
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from dotenv import dotenv_values
from loguru import logger
from pydantic import ValidationError

from admissibility import admissible_values, enumerate_admissible, parse_form_spec, q_value, torus_form, window
from flow import multi_start
from gauge_field import alpha_square_from_flux
from identities import run_checks, run_checks_async
from meta import SCHEMA_VERSION, TOOL_NAME
from states import ConfigError, EnumerationBudgetError, ExperimentConfig, FlowStatus
from torus_geometry import build_geometry
from utils import log_step, nest_dotted, write_csv, write_report

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NOT_CONVERGED = 2
EXIT_BUDGET = 3


# ============= 配置 =============

def parse_config_text(flat: Dict[str, Optional[str]]) -> ExperimentConfig:
    """
    扁平的 section.key = value 映射转为 ExperimentConfig

    Raises:
        ConfigError: 校验失败, 每行一条 section.field: 原因
    """
    try:
        return ExperimentConfig.model_validate(nest_dotted(flat))
    except ValidationError as exc:
        lines = [f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in exc.errors()]
        raise ConfigError("\n".join(lines)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Optional[str]) -> ExperimentConfig:
    """读取配置文件; path 为空时使用默认配置"""
    if not path:
        return ExperimentConfig()
    if not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(dotenv_values(path))


def apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """命令行参数覆盖配置文件"""
    update: Dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        update["seed"] = args.seed
    if getattr(args, "parallel", False):
        update["parallel"] = True
    if getattr(args, "out", None):
        update["output"] = cfg.output.model_copy(update={"dir": args.out})
    return cfg.model_copy(update=update)


def _metadata(cfg: ExperimentConfig, command: str) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL_NAME,
        "command": command,
        "seed": cfg.seed,
        "parallel": cfg.parallel,
    }


def _out_path(cfg: ExperimentConfig, suffix: str) -> Path:
    return Path(cfg.output.dir) / f"{cfg.output.prefix}_{suffix}"


# ============= identities =============

def run_identities(cfg: ExperimentConfig) -> Tuple[Dict[str, Any], int]:
    """
    执行完整的恒等式与性质检查

    Args:
        cfg: 实验配置

    Returns:
        (报告, 退出码), 任一检查失败时退出码为 1
    """
    logger.info(f"🚀 identities: seed={cfg.seed}, parallel={cfg.parallel}")
    if cfg.parallel:
        results = asyncio.run(run_checks_async(cfg))
    else:
        results = run_checks(cfg)
    failed = [r.name for r in results if not r.passed]
    report = {
        "metadata": _metadata(cfg, "identities"),
        "config": cfg,
        "checks": results,
        "passed": not failed,
        "failed": failed,
    }
    write_report(_out_path(cfg, "identities.json"), report)
    if failed:
        logger.error(f"❌ {len(failed)} 项检查失败: {failed}")
        return report, EXIT_FAILED
    logger.info(f"✅ 全部 {len(results)} 项检查通过")
    return report, EXIT_OK


# ============= flow =============

def run_flow(cfg: ExperimentConfig) -> Tuple[Dict[str, Any], int]:
    """
    在配置的通量扇区内运行 (多起点) 梯度流

    Args:
        cfg: 实验配置

    Returns:
        (报告, 退出码), 单极子落在窗口外时为 1, 任一起点未收敛时为 2, 报告照常写出
    """
    g = build_geometry(cfg.geometry.dims, cfg.geometry.spacing, cfg.geometry.k)
    flux = cfg.sector.flux
    alpha_sq = alpha_square_from_flux(flux)
    win = window(g.volume, g.k_minus)
    Q = torus_form()
    log_step("flow 配置", {"geometry": g.summary(), "flux": list(flux), "alpha_sq": alpha_sq})

    results = multi_start(g, flux, cfg.flow, cfg.seed)
    runs: List[Dict[str, Any]] = []
    trace_rows = []
    for i, r in enumerate(results):
        entry = r.summary()
        entry["start"] = i
        entry["admissible"] = win.contains(q_value(Q, flux))
        runs.append(entry)
        trace_rows.extend((i, it, e) for it, e in enumerate(r.energy_trace))

    not_converged = [i for i, r in enumerate(results) if r.status != FlowStatus.CONVERGED]
    violations = [i for i, r in enumerate(results) if r.window_consistent is False]
    report = {
        "metadata": _metadata(cfg, "flow"),
        "config": cfg,
        "geometry": g.summary(),
        "sector": {"flux": list(flux), "alpha_sq": alpha_sq},
        "window": {"lo": win.lo, "hi": win.hi},
        "runs": runs,
        "converged": not not_converged,
        "window_consistent": not violations,
    }
    write_report(_out_path(cfg, "flow.json"), report)
    write_csv(_out_path(cfg, "flow_trace.csv"), ["start", "iteration", "energy"], trace_rows)
    if violations:
        logger.error(f"❌ 起点 {violations}: 单极子出现在 alpha^2 窗口之外")
        return report, EXIT_FAILED
    if not_converged:
        logger.warning(f"❌ 起点 {not_converged} 未收敛")
        return report, EXIT_NOT_CONVERGED
    return report, EXIT_OK


# ============= screen =============

def run_screen(cfg: ExperimentConfig) -> Tuple[Dict[str, Any], int]:
    """
    窗口求值与可容许类枚举

    体积与 k^- 缺省取自几何配置, 可由 screen.volume / screen.k_minus 覆盖。

    Args:
        cfg: 实验配置

    Returns:
        (报告, 退出码), 超出枚举预算时退出码为 3
    """
    form = parse_form_spec(cfg.screen.form)
    if cfg.screen.volume is None or cfg.screen.k_minus is None:
        g = build_geometry(cfg.geometry.dims, cfg.geometry.spacing, cfg.geometry.k)
    volume = cfg.screen.volume if cfg.screen.volume is not None else g.volume
    k_minus = cfg.screen.k_minus if cfg.screen.k_minus is not None else g.k_minus
    win = window(volume, k_minus)
    report: Dict[str, Any] = {
        "metadata": _metadata(cfg, "screen"),
        "config": cfg,
        "form": {"name": form.name, "rank": form.rank, "even": form.is_even, "signature": list(form.signature())},
        "volume": volume,
        "k_minus": k_minus,
        "window": {"lo": win.lo, "hi": win.hi},
        "coeff_bound": cfg.screen.coeff_bound,
    }
    try:
        classes = enumerate_admissible(form, cfg.screen.coeff_bound, volume, k_minus, budget=cfg.screen.budget)
    except EnumerationBudgetError as exc:
        report["error"] = str(exc)
        write_report(_out_path(cfg, "screen.json"), report)
        return report, EXIT_BUDGET

    rows = []
    for alpha in classes:
        value = q_value(form, alpha)
        rows.append((" ".join(str(x) for x in alpha), value, win.lo, win.hi, win.margin(value)))
    report["count"] = len(classes)
    report["admissible_values"] = admissible_values(form, classes)
    write_report(_out_path(cfg, "screen.json"), report)
    write_csv(_out_path(cfg, "screen.csv"), ["alpha", "alpha_sq", "window_lo", "window_hi", "margin"], rows)
    return report, EXIT_OK


# ============= 入口 =============

COMMANDS = {
    "identities": run_identities,
    "flow": run_flow,
    "screen": run_screen,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL_NAME, description="Seiberg-Witten toolkit on the lattice 4-torus")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("identities", "run the identity and property suite"),
        ("flow", "minimize the functional in a flux sector"),
        ("screen", "evaluate the window and enumerate admissible classes"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", default=None, help="experiment config (section.key = value)")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="random seed")
        cmd.add_argument("--parallel", action="store_true", help="run independent checks concurrently")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        for line in str(exc).splitlines():
            logger.error(f"❌ 配置错误: {line}")
            print(line, file=sys.stderr)
        return EXIT_FAILED
    _, code = COMMANDS[args.command](cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())
