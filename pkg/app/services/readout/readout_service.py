"""
读出层服务
构造 N×taps+1 回归特征并训练岭回归读出 W_out
"""
import logging
from typing import NamedTuple, Optional, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg

from app.core.errors import InputError, NumericalError, UndefinedMetricError
from app.models.device import StateMatrix
from app.models.readout import FeatureMatrix, FeatureTransform, RidgeConfig

logger = logging.getLogger(__name__)

_PIVOT_TOLERANCE = 1e-10


def build_features(states: StateMatrix, x_in, cfg: RidgeConfig) -> FeatureMatrix:
    """
    第 t 行: 每个通道在 t, t-1, ..., t-(taps-1) 的样本（通道优先排列），
    最后一列为直接输入 x_in[t]；丢弃前 washout 行
    """
    samples = states.samples
    x = np.asarray(x_in, dtype=np.float64)
    n_symbols, n_channels = samples.shape
    if x.shape != (n_symbols,):
        raise InputError(f"状态长度 {n_symbols} 与输入长度 {x.shape[0]} 不一致")
    if n_symbols <= cfg.washout:
        raise InputError("序列长度必须大于 washout")

    taps = cfg.taps
    padded = np.vstack([np.zeros((taps - 1, n_channels)), samples])
    lagged = sliding_window_view(padded, taps, axis=0)[..., ::-1]  # [t, c, j] = S[t-j, c]
    values = np.hstack([lagged.reshape(n_symbols, n_channels * taps), x[:, None]])[cfg.washout:]
    return FeatureMatrix(values=np.ascontiguousarray(values), n_channels=n_channels, taps=taps, washout=cfg.washout)


def ridge_fit(features: Union[FeatureMatrix, np.ndarray], targets, lam: float) -> np.ndarray:
    """argmin ‖F w - y‖² + λ‖w‖²，正规方程 + Cholesky 分解"""
    F = features.values if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if F.shape[0] != y.shape[0]:
        raise InputError("目标长度与特征行数不一致")
    if lam < 0:
        raise InputError("正则化系数不能为负")

    gram = F.T @ F + lam * np.eye(F.shape[1])
    try:
        factor = linalg.cho_factor(gram, lower=False, check_finite=True)
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericalError("正规方程奇异，请使用 λ > 0") from e
    pivots = np.abs(np.diag(factor[0]))
    if pivots.min() <= _PIVOT_TOLERANCE * pivots.max():
        raise NumericalError("正规方程奇异，请使用 λ > 0")
    return linalg.cho_solve(factor, F.T @ y)


def nmse(pred, target) -> float:
    """mean((pred - target)²) / var(target)"""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise InputError("预测与目标长度不一致")
    variance = float(np.var(target))
    if variance <= 0.0:
        raise UndefinedMetricError("目标序列方差为零，NMSE 无定义")
    return float(np.mean((pred - target) ** 2) / variance)


def fit_standardizer(values: np.ndarray) -> FeatureTransform:
    scale = values.std(axis=0)
    scale[scale == 0.0] = 1.0
    return FeatureTransform(mean=values.mean(axis=0), scale=scale)


class Readout(NamedTuple):
    """训练好的读出层；截距单独拟合，不计入 weights（N×taps+1 中的 +1 是直接输入项）"""
    weights: np.ndarray
    intercept: float
    nmse: float
    transform: Optional[FeatureTransform]


def fit_readout(states: StateMatrix, x_in, y_out, cfg: RidgeConfig) -> Readout:
    """训练读出层；启用标准化时连同训练段上的变换一起返回"""
    features = build_features(states, x_in, cfg)
    targets = np.asarray(y_out, dtype=np.float64)[cfg.washout:]
    values = features.values
    transform = None
    if cfg.standardize:
        transform = fit_standardizer(values)
        values = transform.apply(values)
    intercept = float(targets.mean())
    weights = ridge_fit(values, targets - intercept, cfg.lam)
    error = nmse(values @ weights + intercept, targets)
    logger.debug(f"Readout trained: {weights.size} weights, NMSE={error:.4f}")
    return Readout(weights, intercept, error, transform)
