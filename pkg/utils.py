"""
工具函数模块
提供日志初始化、确定性报告序列化、随机数生成等通用功能
"""

import os
import csv
import json
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from dotenv import load_dotenv
from loguru import logger

# 加载环境变量
load_dotenv()


# ============= Loguru 配置 =============

def setup_logger(level: Optional[str] = None):
    """
    配置 Loguru 日志系统

    Args:
        level: 控制台日志级别, 默认读取环境变量 SWTK_LOG
    """
    # 移除默认的处理器
    logger.remove()

    console_level = (level or os.getenv("SWTK_LOG", "INFO")).upper()

    # 控制台输出走 stderr, stdout 留给报告
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        level=console_level,
        colorize=True
    )

    # 可选的文件输出
    log_file = os.getenv("SWTK_LOG_FILE", "")
    if log_file:
        logger.add(
            log_file,
            rotation="10 MB",
            retention="7 days",
            level="DEBUG",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
            encoding="utf-8"
        )

    logger.debug(f"日志系统初始化完成, 级别 {console_level}")


# 自动初始化日志系统
setup_logger()


# ============= 日志工具 =============

def log_step(step_name: str, data: Any):
    """
    打印步骤日志

    Args:
        step_name: 步骤名称
        data: 数据
    """
    logger.info(f"{'='*60}")
    logger.info(f"[{step_name}]")
    if isinstance(data, (dict, list)):
        logger.info(json.dumps(data, indent=2, ensure_ascii=False, default=str))
    else:
        logger.info(data)
    logger.info(f"{'='*60}")


# ============= 随机数 =============

def make_rng(seed: int) -> np.random.Generator:
    """所有随机性都从这里出发, 同一 seed 得到同一序列"""
    return np.random.default_rng(seed)


# ============= 确定性序列化 =============

def format_float(value: float) -> str:
    """
    浮点数统一输出 17 位有效数字

    Args:
        value: 浮点数

    Returns:
        字符串形式; nan/inf 返回 JSON 的 null
    """
    if not math.isfinite(value):
        return "null"
    text = format(value, ".17g")
    # 保证 JSON 里仍然是浮点数字面量
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def _render(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, Enum):
        return _render(obj.value, indent, level)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _render(obj.tolist(), indent, level)
    if hasattr(obj, "model_dump"):
        return _render(obj.model_dump(mode="json"), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(key), ensure_ascii=False)}: {_render(obj[key], indent, level + 1)}"
            for key in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end_pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_render(item, indent, level + 1)}" for item in obj]
        return "[\n" + ",\n".join(items) + "\n" + end_pad + "]"
    raise TypeError(f"Cannot serialize object of type {type(obj).__name__}")


def dumps_report(obj: Any, indent: int = 2) -> str:
    """
    把报告渲染为确定性的 JSON 文本

    键排序、浮点数 17 位有效数字、不含时间戳, 相同输入必然得到相同字节。

    Args:
        obj: dict / list / pydantic 模型
        indent: 缩进

    Returns:
        JSON 文本 (以换行结尾)
    """
    return _render(obj, indent, 0) + "\n"


def write_report(path: Path, obj: Any) -> Path:
    """写出 JSON 报告"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(obj), encoding="utf-8")
    logger.info(f"✅ 报告已写入 {path}")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """
    写出带表头的 CSV, 浮点数同样按 17 位有效数字

    Args:
        path: 输出路径
        header: 表头
        rows: 数据行

    Returns:
        输出路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def cell(value: Any) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, (float, np.floating)):
            return format_float(float(value))
        if isinstance(value, (list, tuple, np.ndarray)):
            return " ".join(cell(v) for v in value)
        return str(value)

    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([cell(v) for v in row])
    logger.info(f"✅ CSV 已写入 {path}")
    return path


def nest_dotted(flat: Dict[str, Any]) -> Dict[str, Any]:
    """
    把 "geometry.dims" 形式的扁平键展开为嵌套字典

    值中含空白时拆成列表, 其余保持字符串, 类型转换交给 pydantic。

    Args:
        flat: 扁平字典

    Returns:
        嵌套字典
    """
    nested: Dict[str, Any] = {}
    for key, raw in flat.items():
        if raw is None:
            continue
        value: Any = raw.strip()
        if isinstance(value, str) and len(value.split()) > 1:
            value = value.split()
        parts: List[str] = key.split(".")
        node = nested
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ValueError(f"Config key '{key}' conflicts with scalar '{part}'")
            node = child
        node[parts[-1]] = value
    return nested
