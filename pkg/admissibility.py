"""
可容许性模块
交叉形式算术与单极子存在的必要条件窗口: 特征向量、Q(alpha, alpha)、窗口求值与有界枚举
"""

import itertools
import math
from typing import Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, field_validator

from states import (
    DimensionMismatchError,
    EnumerationBudgetError,
    NotCharacteristicError,
    NotUnimodularError,
    UnknownFormError,
)

# 枚举时每批处理的向量数
CHUNK_SIZE = 65536

E8_CARTAN = (
    (2, -1, 0, 0, 0, 0, 0, 0),
    (-1, 2, -1, 0, 0, 0, 0, 0),
    (0, -1, 2, -1, 0, 0, 0, 0),
    (0, 0, -1, 2, -1, 0, 0, 0),
    (0, 0, 0, -1, 2, -1, 0, -1),
    (0, 0, 0, 0, -1, 2, -1, 0),
    (0, 0, 0, 0, 0, -1, 2, 0),
    (0, 0, 0, 0, -1, 0, 0, 2),
)


# ============= 数据模型 =============

class IntersectionForm(BaseModel):
    """对称幺模整数矩阵"""

    model_config = ConfigDict(frozen=True)

    name: str = ""
    matrix: Tuple[Tuple[int, ...], ...]

    @field_validator("matrix")
    @classmethod
    def _square(cls, value):
        n = len(value)
        if any(len(row) != n for row in value):
            raise ValueError("intersection form must be a square matrix")
        return value

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[int]], name: str = "") -> "IntersectionForm":
        """
        构造并检查对称性与幺模性

        Raises:
            NotUnimodularError: 不对称或 |det| != 1
        """
        rows = tuple(tuple(int(x) for x in row) for row in matrix)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise NotUnimodularError(f"matrix is not square: {n} rows")
        for i in range(n):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise NotUnimodularError(f"matrix is not symmetric at ({i}, {j})")
        det = integer_det(rows)
        if abs(det) != 1:
            raise NotUnimodularError(f"|det| = {abs(det)} != 1")
        return cls(name=name, matrix=rows)

    @property
    def rank(self) -> int:
        return len(self.matrix)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64).reshape(self.rank, self.rank)

    @property
    def is_even(self) -> bool:
        return all(self.matrix[i][i] % 2 == 0 for i in range(self.rank))

    def signature(self) -> Tuple[int, int]:
        eig = np.linalg.eigvalsh(self.array.astype(float))
        return int(np.sum(eig > 0)), int(np.sum(eig < 0))


class Window(NamedTuple):
    """alpha^2 的容许区间 [lo, hi]"""
    lo: float
    hi: float

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def margin(self, value: float) -> float:
        """到最近端点的距离, 窗口外为负"""
        return min(value - self.lo, self.hi - value)


# ============= 整数线性代数 =============

def integer_det(matrix: Sequence[Sequence[int]]) -> int:
    """
    Bareiss 无分数消元求整数行列式

    Args:
        matrix: 方阵

    Returns:
        精确整数行列式
    """
    m = [[int(x) for x in row] for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def characteristic_coset(Q: IntersectionForm) -> Tuple[int, ...]:
    """
    在 GF(2) 上解 Q c = diag(Q), 特征向量恰为 c + 2Z^n

    Q 幺模故 Q mod 2 可逆, 解唯一。

    Returns:
        分量为 0/1 的代表元
    """
    n = Q.rank
    aug = [[Q.matrix[i][j] % 2 for j in range(n)] + [Q.matrix[i][i] % 2] for i in range(n)]
    row = 0
    pivots = []
    for col in range(n):
        pivot = next((r for r in range(row, n) if aug[r][col]), None)
        if pivot is None:
            continue
        aug[row], aug[pivot] = aug[pivot], aug[row]
        for r in range(n):
            if r != row and aug[r][col]:
                aug[r] = [x ^ y for x, y in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
    if len(pivots) != n:
        raise NotUnimodularError("form is singular mod 2")
    solution = [0] * n
    for r, col in enumerate(pivots):
        solution[col] = aug[r][n]
    return tuple(solution)


# ============= 基本算术 =============

def _as_vector(Q: IntersectionForm, alpha: Sequence[int]) -> np.ndarray:
    vec = np.asarray(alpha, dtype=np.int64)
    if vec.shape != (Q.rank,):
        raise DimensionMismatchError(f"class of length {vec.size} does not match form rank {Q.rank}")
    return vec


def q_value(Q: IntersectionForm, alpha: Sequence[int]) -> int:
    """alpha^T Q alpha"""
    vec = _as_vector(Q, alpha)
    return int(vec @ Q.array @ vec)


def is_characteristic(Q: IntersectionForm, alpha: Sequence[int]) -> bool:
    """(Q alpha)_i = Q_ii mod 2 对所有 i 成立"""
    vec = _as_vector(Q, alpha)
    return bool(np.all((Q.array @ vec - np.diag(Q.array)) % 2 == 0))


def window(v: float, k_minus: float) -> Window:
    """
    容许窗口 [-v k^4 / pi^2, v k^4 / 4]

    k_minus = 0 时退化为 [0, 0]。

    Args:
        v: 体积
        k_minus: k^-

    Returns:
        Window
    """
    if v <= 0:
        raise ValueError(f"volume must be positive, got {v}")
    if k_minus < 0:
        raise ValueError(f"k_minus must be non-negative, got {k_minus}")
    scale = v * k_minus ** 4
    return Window(lo=-scale / math.pi ** 2, hi=scale / 4)


def is_admissible(Q: IntersectionForm, alpha: Sequence[int], v: float, k_minus: float) -> bool:
    """
    alpha^2 是否落在窗口内

    Raises:
        DimensionMismatchError: 长度不符
        NotCharacteristicError: alpha 不是特征向量
    """
    if not is_characteristic(Q, alpha):
        raise NotCharacteristicError(f"class {tuple(alpha)} is not characteristic for {Q.name or 'form'}")
    return window(v, k_minus).contains(q_value(Q, alpha))


# ============= 枚举 =============

def _coset_box(Q: IntersectionForm, coeff_bound: int) -> List[List[int]]:
    coset = characteristic_coset(Q)
    return [[x for x in range(-coeff_bound, coeff_bound + 1) if (x - c) % 2 == 0] for c in coset]


def enumeration_size(Q: IntersectionForm, coeff_bound: int) -> int:
    """盒子内特征向量的个数"""
    return math.prod(len(axis) for axis in _coset_box(Q, coeff_bound))


def enumerate_admissible(
    Q: IntersectionForm,
    coeff_bound: int,
    v: float,
    k_minus: float,
    budget: int = 2_000_000,
) -> List[Tuple[int, ...]]:
    """
    枚举 |alpha_i| <= coeff_bound 的可容许特征向量

    先用特征陪集过滤奇偶, 再按字典序遍历盒子。

    Args:
        Q: 交叉形式
        coeff_bound: 系数界
        v: 体积
        k_minus: k^-
        budget: 允许遍历的最大向量数

    Returns:
        按字典序排列的类

    Raises:
        EnumerationBudgetError: 盒子规模超出预算
    """
    if coeff_bound < 0:
        raise ValueError(f"coeff_bound must be non-negative, got {coeff_bound}")
    win = window(v, k_minus)
    axes = _coset_box(Q, coeff_bound)
    size = math.prod(len(axis) for axis in axes)
    if size > budget:
        logger.warning(f"⚠️ 枚举规模 {size} 超出预算 {budget} (rank={Q.rank}, bound={coeff_bound})")
        raise EnumerationBudgetError(f"enumeration of {size} classes exceeds budget {budget}")
    logger.info(f"开始枚举: rank={Q.rank}, bound={coeff_bound}, 候选 {size} 个, 窗口 [{win.lo:.6g}, {win.hi:.6g}]")

    M = Q.array
    found: List[Tuple[int, ...]] = []
    product = itertools.product(*axes)
    while True:
        chunk = list(itertools.islice(product, CHUNK_SIZE))
        if not chunk:
            break
        vecs = np.array(chunk, dtype=np.int64).reshape(len(chunk), Q.rank)
        values = np.einsum("bi,ij,bj->b", vecs, M, vecs)
        keep = (values >= win.lo) & (values <= win.hi)
        found.extend(tuple(int(x) for x in row) for row in vecs[keep])
    logger.info(f"✅ 枚举完成: {len(found)} 个可容许类")
    return found


def admissible_values(Q: IntersectionForm, classes: Iterable[Sequence[int]]) -> List[int]:
    """可容许类给出的 alpha^2 取值集合, 升序"""
    return sorted({q_value(Q, alpha) for alpha in classes})


# ============= 标准形式 =============

def _block_diag(forms: Sequence[IntersectionForm]) -> List[List[int]]:
    n = sum(f.rank for f in forms)
    out = [[0] * n for _ in range(n)]
    offset = 0
    for f in forms:
        for i in range(f.rank):
            for j in range(f.rank):
                out[offset + i][offset + j] = f.matrix[i][j]
        offset += f.rank
    return out


def negate(Q: IntersectionForm) -> IntersectionForm:
    return IntersectionForm(name=f"-{Q.name}", matrix=tuple(tuple(-x for x in row) for row in Q.matrix))


def torus_form() -> IntersectionForm:
    """
    4-环面在通量坐标 (12 13 14 23 24 34) 下的交叉形式

    q_value 与 alpha_square_from_flux 一致: 12-34 与 14-23 配对为 +1, 13-24 为 -1。
    """
    m = [[0] * 6 for _ in range(6)]
    m[0][5] = m[5][0] = 1
    m[1][4] = m[4][1] = -1
    m[2][3] = m[3][2] = 1
    return IntersectionForm.from_matrix(m, name="torus")


def standard_form(name: str, params: Sequence = ()) -> IntersectionForm:
    """
    标准幺模形式库

    Args:
        name: diag / hyperbolic / e8 / direct_sum / torus
        params: diag 为对角元, hyperbolic 为份数, direct_sum 为形式列表

    Returns:
        IntersectionForm

    Raises:
        UnknownFormError: 未知名称
    """
    key = name.lower()
    if key == "diag":
        entries = [int(x) for x in params]
        m = [[entries[i] if i == j else 0 for j in range(len(entries))] for i in range(len(entries))]
        return IntersectionForm.from_matrix(m, name=f"diag({','.join(map(str, entries))})")
    if key in ("hyperbolic", "h"):
        copies = int(params[0]) if params else 1
        block = IntersectionForm(name="H", matrix=((0, 1), (1, 0)))
        return IntersectionForm.from_matrix(_block_diag([block] * copies), name=f"hyperbolic({copies})")
    if key == "e8":
        return IntersectionForm.from_matrix(E8_CARTAN, name="e8")
    if key == "torus":
        return torus_form()
    if key == "direct_sum":
        forms = list(params)
        label = " + ".join(f.name for f in forms)
        return IntersectionForm.from_matrix(_block_diag(forms), name=label)
    raise UnknownFormError(f"unknown intersection form '{name}'")


def parse_form_spec(spec: str) -> IntersectionForm:
    """
    解析形式描述, 例如 "hyperbolic:3 e8 -e8" 或 "diag:1,1,-1,-1"

    多个记号取直和; 前缀 '-' 取负。
    """
    tokens = spec.replace("+", " ").split()
    if not tokens:
        raise UnknownFormError("empty form spec")
    forms = []
    for token in tokens:
        negative = token.startswith("-")
        body = token[1:] if negative else token
        name, _, raw = body.partition(":")
        params = [x for x in raw.split(",") if x] if raw else []
        form = standard_form(name, params)
        forms.append(negate(form) if negative else form)
    if len(forms) == 1:
        return forms[0]
    return standard_form("direct_sum", forms)
