"""
统计指标服务
分数汉明距离、高斯拟合等错误率、密钥均匀性
"""
import logging
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import special, stats

from app.core.config import settings
from app.core.errors import DegenerateFitError, InputError
from app.models.keys import BinaryKey
from app.models.metrics import EerReport, HammingStats, KeyUniformity
from app.utils.seeds import rng_for

logger = logging.getLogger(__name__)

KeyLike = Union[BinaryKey, np.ndarray]

_PAIR_CHUNK = 50_000


def _bits(key: KeyLike) -> np.ndarray:
    return key.bits if isinstance(key, BinaryKey) else np.asarray(key, dtype=np.uint8)


def hamming_frac(a: KeyLike, b: KeyLike) -> float:
    """popcount(a ⊕ b) / length"""
    a, b = _bits(a), _bits(b)
    if a.shape != b.shape:
        raise InputError(f"密钥长度不一致: {a.size} vs {b.size}")
    if a.size == 0:
        raise InputError("密钥不能为空")
    return float(np.count_nonzero(a != b) / a.size)


def pair_indices(count: int, max_pairs: Optional[int] = None, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """全部 i<j 配对；超过上限时用固定种子均匀抽样"""
    if count < 2:
        raise InputError("至少需要 2 个密钥才能配对")
    max_pairs = max_pairs or settings.MAX_PAIRS
    total = count * (count - 1) // 2
    if total <= max_pairs:
        return np.triu_indices(count, k=1)
    rng = rng_for(seed)
    i = rng.integers(0, count, size=max_pairs)
    j = (i + rng.integers(1, count, size=max_pairs)) % count
    return np.minimum(i, j), np.maximum(i, j)


def pairwise_fractions(keys: np.ndarray, max_pairs: Optional[int] = None, seed: int = 0) -> np.ndarray:
    """密钥矩阵 [k, L] 的两两分数汉明距离"""
    keys = np.asarray(keys, dtype=np.uint8)
    if keys.ndim != 2 or keys.shape[1] == 0:
        raise InputError("密钥矩阵必须为非空二维数组")
    first, second = pair_indices(keys.shape[0], max_pairs, seed)
    out = np.empty(first.size)
    for start in range(0, first.size, _PAIR_CHUNK):
        stop = start + _PAIR_CHUNK
        out[start:stop] = np.count_nonzero(keys[first[start:stop]] != keys[second[start:stop]], axis=1)
    return out / keys.shape[1]


def hamming_stats(fractions, bins: Optional[int] = None) -> HammingStats:
    values = np.asarray(fractions, dtype=np.float64)
    if values.size == 0:
        raise InputError("距离样本为空")
    counts, edges = np.histogram(values, bins=bins or settings.HISTOGRAM_BINS, range=(0.0, 1.0))
    return HammingStats(
        mean=float(values.mean()),
        std=float(values.std()),
        count=int(values.size),
        histogram=counts.tolist(),
        bin_edges=edges.tolist(),
    )


def key_matrix_stats(keys: np.ndarray, max_pairs: Optional[int] = None, seed: int = 0) -> HammingStats:
    return hamming_stats(pairwise_fractions(keys, max_pairs, seed))


def eer_fit(intra: HammingStats, inter: HammingStats, strict: bool = False) -> EerReport:
    """
    两类分别拟合正态分布，阈值 τ = (μi σe + μe σi) / (σi + σe)，
    EER = Q((τ - μi) / σi) = Q((μe - μi) / (σi + σe))
    """
    mu_i, sd_i = intra.mean, intra.std
    mu_e, sd_e = inter.mean, inter.std
    floor = 1.0 / min(intra.count, inter.count)

    if sd_i <= 0.0 or sd_e <= 0.0:
        if strict:
            raise DegenerateFitError("类内或类间标准差为零，无法拟合正态分布")
        total = sd_i + sd_e
        threshold = (mu_i * sd_e + mu_e * sd_i) / total if total > 0 else 0.5 * (mu_i + mu_e)
        eer = 0.5 if mu_i == mu_e else 0.0
        logger.warning(f"Degenerate EER fit (sigma_intra={sd_i}, sigma_inter={sd_e}); reporting eer={eer}")
        return EerReport(intra=intra, inter=inter, threshold=threshold, eer=eer,
                         degenerate=True, below_floor=0.0 < eer < floor)

    threshold = (mu_i * sd_e + mu_e * sd_i) / (sd_i + sd_e)
    eer = float(stats.norm.sf((mu_e - mu_i) / (sd_i + sd_e)))
    below = eer < floor
    if below:
        logger.debug(f"EER {eer:.3e} below the empirical floor {floor:.3e}; value is extrapolated")
    return EerReport(intra=intra, inter=inter, threshold=threshold, eer=eer, below_floor=below)


def key_uniformity(keys: np.ndarray) -> KeyUniformity:
    """逐位偏置与熵"""
    keys = np.asarray(keys, dtype=np.uint8)
    if keys.ndim != 2 or keys.shape[0] == 0:
        raise InputError("密钥矩阵必须为非空二维数组")
    p = keys.mean(axis=0)
    entropy = (special.entr(p) + special.entr(1.0 - p)) / np.log(2.0)
    return KeyUniformity(
        bit_aliasing=float(np.mean(np.abs(p - 0.5) * 2.0)),
        entropy=float(np.mean(entropy)),
        key_count=int(keys.shape[0]),
        key_bits=int(keys.shape[1]),
    )


def histogram_frame(hist: HammingStats) -> pd.DataFrame:
    """直方图导出 (bin_left, count)"""
    return pd.DataFrame({"bin_left": hist.bin_edges[:-1], "count": hist.histogram})
