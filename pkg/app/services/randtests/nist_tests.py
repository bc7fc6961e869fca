"""
SP 800-22 检验
九项本地实现；p 值统一由 erfc / 不完全 Gamma 函数给出
"""
import math
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft as sp_fft
from scipy import special

from app.core.errors import ApplicabilityError, InputError
from app.models.randtests import NistParams, NistTestKind

# 最长游程检验：(块长, 类别下界, 类别上界, 各类概率)
_LONGEST_RUN_TABLES = [
    (8, 1, 4, [0.2148, 0.3672, 0.2305, 0.1875]),
    (128, 4, 9, [0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124]),
    (10_000, 10, 16, [0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727]),
]

APEN_DEFAULT_M = 10
SERIAL_DEFAULT_M = 16


@lru_cache(maxsize=None)
def rank_probabilities(rows: int, cols: int) -> Tuple[float, float, float]:
    """rows×cols 随机二元矩阵秩为 min(rows, cols)、减一及更低的概率"""
    def prob(r: int) -> float:
        product = 1.0
        for i in range(r):
            product *= (1.0 - 2.0 ** (i - cols)) * (1.0 - 2.0 ** (i - rows)) / (1.0 - 2.0 ** (i - r))
        return 2.0 ** (r * (rows + cols - r) - rows * cols) * product

    top = min(rows, cols)
    full = prob(top)
    deficient = prob(top - 1)
    return full, deficient, max(0.0, 1.0 - full - deficient)


def template_length(requested: Optional[int], n: int, default: int, slack: int) -> int:
    """未指定时取默认值，并截到 ⌊log2 n⌋ - slack 以满足适用条件"""
    if requested is not None:
        return requested
    return max(2, min(default, int(math.log2(n)) - slack))


def _as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size == 0:
        raise InputError("比特序列不能为空")
    if arr.max() > 1:
        raise InputError("比特序列只能包含 0 和 1")
    return arr


def _require(condition: bool, kind: NistTestKind, reason: str) -> None:
    if not condition:
        raise ApplicabilityError(f"{kind.value}: {reason}")


def _clip(p: float) -> float:
    return float(min(1.0, max(0.0, p)))


def frequency(bits: np.ndarray, params: NistParams) -> List[float]:
    n = bits.size
    _require(n >= 100 or not params.strict_minimums, NistTestKind.FREQUENCY, "需要 n ≥ 100")
    s = 2 * int(np.count_nonzero(bits)) - n
    return [_clip(math.erfc(abs(s) / math.sqrt(n) / math.sqrt(2.0)))]


def block_frequency(bits: np.ndarray, params: NistParams) -> List[float]:
    n, m = bits.size, params.block_frequency_m
    blocks = n // m
    _require(blocks >= 1, NistTestKind.BLOCK_FREQUENCY, f"序列短于块长 {m}")
    if params.strict_minimums:
        _require(n >= 100 and m >= 20, NistTestKind.BLOCK_FREQUENCY, "需要 n ≥ 100 且 M ≥ 20")
    pi = bits[:blocks * m].reshape(blocks, m).mean(axis=1)
    chi2 = 4.0 * m * float(np.sum((pi - 0.5) ** 2))
    return [_clip(special.gammaincc(blocks / 2.0, chi2 / 2.0))]


def runs(bits: np.ndarray, params: NistParams) -> List[float]:
    n = bits.size
    _require(n >= 100 or not params.strict_minimums, NistTestKind.RUNS, "需要 n ≥ 100")
    pi = np.count_nonzero(bits) / n
    # 频数预检不通过时不再计算游程
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return [0.0]
    v_obs = 1 + int(np.count_nonzero(np.diff(bits)))
    numerator = abs(v_obs - 2.0 * n * pi * (1.0 - pi))
    return [_clip(math.erfc(numerator / (2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi))))]


def _cusum_p(bits: np.ndarray) -> float:
    n = bits.size
    z = float(np.max(np.abs(np.cumsum(2 * bits.astype(np.int64) - 1))))
    root = math.sqrt(n)
    k1 = np.arange(int((-n / z + 1) / 4), int((n / z - 1) / 4) + 1)
    k2 = np.arange(int((-n / z - 3) / 4), int((n / z - 1) / 4) + 1)
    first = np.sum(special.ndtr((4 * k1 + 1) * z / root) - special.ndtr((4 * k1 - 1) * z / root))
    second = np.sum(special.ndtr((4 * k2 + 3) * z / root) - special.ndtr((4 * k2 + 1) * z / root))
    return _clip(1.0 - first + second)


def cumulative_sums(bits: np.ndarray, params: NistParams) -> List[float]:
    """前向与反向两个 p 值"""
    _require(bits.size >= 100 or not params.strict_minimums, NistTestKind.CUMULATIVE_SUMS, "需要 n ≥ 100")
    return [_cusum_p(bits), _cusum_p(bits[::-1])]


def _longest_runs(blocks: np.ndarray) -> np.ndarray:
    """每块中最长的 1 游程"""
    current = np.zeros(blocks.shape[0], dtype=np.int64)
    longest = np.zeros(blocks.shape[0], dtype=np.int64)
    for column in blocks.T:
        current = (current + 1) * column
        np.maximum(longest, current, out=longest)
    return longest


def longest_run(bits: np.ndarray, params: NistParams) -> List[float]:
    n = bits.size
    _require(n >= 128, NistTestKind.LONGEST_RUN, "需要 n ≥ 128")
    if n < 6272:
        m, low, high, probs = _LONGEST_RUN_TABLES[0]
    elif n < 750_000:
        m, low, high, probs = _LONGEST_RUN_TABLES[1]
    else:
        m, low, high, probs = _LONGEST_RUN_TABLES[2]
    blocks = n // m
    runs_per_block = np.clip(_longest_runs(bits[:blocks * m].reshape(blocks, m)), low, high)
    counts = np.bincount(runs_per_block - low, minlength=high - low + 1)
    expected = blocks * np.asarray(probs)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    return [_clip(special.gammaincc((len(probs) - 1) / 2.0, chi2 / 2.0))]


def gf2_rank(rows: List[int]) -> int:
    """二元矩阵（每行一个整数）的秩"""
    basis: List[int] = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            basis.sort(reverse=True)
    return len(basis)


def rank(bits: np.ndarray, params: NistParams) -> List[float]:
    n, rows, cols = bits.size, params.rank_rows, params.rank_cols
    count = n // (rows * cols)
    _require(count >= 1, NistTestKind.RANK, f"序列短于一个 {rows}×{cols} 矩阵")
    if params.strict_minimums:
        _require(n >= 38 * rows * cols, NistTestKind.RANK, f"需要 n ≥ {38 * rows * cols}")
    weights = 1 << np.arange(cols - 1, -1, -1, dtype=np.int64)
    packed = bits[:count * rows * cols].reshape(count, rows, cols).astype(np.int64) @ weights
    ranks = np.array([gf2_rank([int(v) for v in matrix]) for matrix in packed])
    top = min(rows, cols)
    full = int(np.count_nonzero(ranks == top))
    deficient = int(np.count_nonzero(ranks == top - 1))
    observed = np.array([full, deficient, count - full - deficient], dtype=np.float64)
    expected = count * np.asarray(rank_probabilities(rows, cols))
    used = expected > 0
    chi2 = float(np.sum((observed[used] - expected[used]) ** 2 / expected[used]))
    return [_clip(math.exp(-chi2 / 2.0))]


def spectral(bits: np.ndarray, params: NistParams) -> List[float]:
    """离散傅里叶变换（频谱）检验"""
    n = bits.size
    _require(n >= 1000 or not params.strict_minimums, NistTestKind.FFT, "需要 n ≥ 1000")
    _require(n >= 2, NistTestKind.FFT, "需要 n ≥ 2")
    modulus = np.abs(sp_fft.fft(2.0 * bits - 1.0))[:n // 2]
    threshold = math.sqrt(math.log(1.0 / 0.05) * n)
    n0 = 0.95 * n / 2.0
    n1 = float(np.count_nonzero(modulus < threshold))
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    return [_clip(math.erfc(abs(d) / math.sqrt(2.0)))]


def pattern_counts(bits: np.ndarray, length: int) -> np.ndarray:
    """循环扩展后所有长度为 length 的重叠模式计数"""
    if length == 0:
        return np.array([bits.size])
    extended = np.concatenate([bits, bits[:length - 1]]).astype(np.int64)
    weights = 1 << np.arange(length - 1, -1, -1, dtype=np.int64)
    values = sliding_window_view(extended, length) @ weights
    return np.bincount(values, minlength=1 << length)


def approximate_entropy(bits: np.ndarray, params: NistParams) -> List[float]:
    n = bits.size
    m = template_length(params.approximate_entropy_m, n, APEN_DEFAULT_M, 6)
    if params.strict_minimums:
        _require(m < int(math.log2(n)) - 5, NistTestKind.APPROXIMATE_ENTROPY,
                 f"m={m} 过大，需要 m < ⌊log2 n⌋ - 5")
    _require(n > m + 1, NistTestKind.APPROXIMATE_ENTROPY, "序列过短")

    def phi(length: int) -> float:
        c = pattern_counts(bits, length) / n
        c = c[c > 0]
        return float(np.sum(c * np.log(c)))

    apen = phi(m) - phi(m + 1)
    chi2 = 2.0 * n * (math.log(2.0) - apen)
    return [_clip(special.gammaincc(2.0 ** (m - 1), chi2 / 2.0))]


def serial(bits: np.ndarray, params: NistParams) -> List[float]:
    """返回 ∇ψ² 与 ∇²ψ² 两个 p 值"""
    n = bits.size
    m = template_length(params.serial_m, n, SERIAL_DEFAULT_M, 3)
    if params.strict_minimums:
        _require(m < int(math.log2(n)) - 2, NistTestKind.SERIAL, f"m={m} 过大，需要 m < ⌊log2 n⌋ - 2")
    _require(n > m, NistTestKind.SERIAL, "序列过短")

    def psi2(length: int) -> float:
        if length <= 0:
            return 0.0
        counts = pattern_counts(bits, length).astype(np.float64)
        return float((2.0 ** length) / n * np.sum(counts ** 2) - n)

    p_m, p_m1, p_m2 = psi2(m), psi2(m - 1), psi2(m - 2)
    delta1 = p_m - p_m1
    delta2 = p_m - 2.0 * p_m1 + p_m2
    return [
        _clip(special.gammaincc(2.0 ** (m - 2), delta1 / 2.0)),
        _clip(special.gammaincc(2.0 ** (m - 3), delta2 / 2.0)),
    ]


_TESTS: Dict[NistTestKind, Callable[[np.ndarray, NistParams], List[float]]] = {
    NistTestKind.FREQUENCY: frequency,
    NistTestKind.BLOCK_FREQUENCY: block_frequency,
    NistTestKind.CUMULATIVE_SUMS: cumulative_sums,
    NistTestKind.RUNS: runs,
    NistTestKind.LONGEST_RUN: longest_run,
    NistTestKind.RANK: rank,
    NistTestKind.FFT: spectral,
    NistTestKind.APPROXIMATE_ENTROPY: approximate_entropy,
    NistTestKind.SERIAL: serial,
}

SUBTEST_COUNTS = {kind: 2 if kind in (NistTestKind.CUMULATIVE_SUMS, NistTestKind.SERIAL) else 1
                  for kind in NistTestKind}


def nist_test(kind: NistTestKind, bits, params: NistParams = None) -> List[float]:
    """单项检验；序列不满足适用条件时抛 ApplicabilityError"""
    return _TESTS[NistTestKind(kind)](_as_bits(bits), params or NistParams())
